#include "core/lockin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/fft.hpp"

namespace puc {

double FilterSpec::magnitude_at(double f_hz) const {
    const double w = two_pi * f_hz / sample_rate_hz;
    const cplx z_inv(std::cos(-w), std::sin(-w));
    const cplx z_inv2 = z_inv * z_inv;
    cplx h(1.0, 0.0);
    for (const auto& s : sections) {
        h *= (s.b0 + s.b1 * z_inv + s.b2 * z_inv2) / (1.0 + s.a1 * z_inv + s.a2 * z_inv2);
    }
    return std::abs(h);
}

std::vector<double> FilterSpec::apply(const std::vector<double>& x) const {
    std::vector<double> y = x;
    for (const auto& s : sections) {
        // direct form II transposed
        double w1 = 0.0, w2 = 0.0;
        for (double& v : y) {
            const double in = v;
            const double out = s.b0 * in + w1;
            w1 = s.b1 * in - s.a1 * out + w2;
            w2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    return y;
}

FilterSpec design_lowpass(int order, double cutoff_hz, double sample_rate_hz) {
    if (order < 2 || order % 2 != 0)
        raise(Status::domain_error, "filter order must be a positive even integer");
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * sample_rate_hz))
        raise(Status::domain_error, "cutoff must lie in (0, sample_rate/2)");

    FilterSpec spec;
    spec.order = order;
    spec.cutoff_hz = cutoff_hz;
    spec.sample_rate_hz = sample_rate_hz;

    const double w0 = two_pi * cutoff_hz / sample_rate_hz;
    const double cw = std::cos(w0);
    const double sw = std::sin(w0);

    for (int k = 0; k < order / 2; ++k) {
        // Butterworth pole pair s^2 + 2 sin(phi) s + 1, phi = (2k+1)pi/(2n)
        const double phi = (2.0 * k + 1.0) * std::numbers::pi / (2.0 * order);
        const double q = 1.0 / (2.0 * std::sin(phi));
        const double alpha = sw / (2.0 * q);

        BiquadSection s;
        const double a0 = 1.0 + alpha;
        s.b0 = (1.0 - cw) / 2.0 / a0;
        s.b1 = (1.0 - cw) / a0;
        s.b2 = s.b0;
        s.a1 = -2.0 * cw / a0;
        s.a2 = (1.0 - alpha) / a0;

        // pin DC gain of the section to exactly one
        const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        s.b0 /= dc;
        s.b1 /= dc;
        s.b2 /= dc;

        if (!(std::abs(s.a2) < 1.0 && std::abs(s.a1) < 1.0 + s.a2))
            raise(Status::internal_error, "designed biquad section is unstable");
        spec.sections.push_back(s);
    }
    return spec;
}

EnvelopeTrace demodulate(const EchoTrace& trace, double f_osc_hz, const FilterSpec& filter) {
    trace.validate();
    if (filter.sample_rate_hz != trace.sample_rate_hz)
        raise(Status::domain_error, "filter sample rate does not match trace");
    if (!(f_osc_hz > 0.0) || !(f_osc_hz < 0.5 * trace.sample_rate_hz))
        raise(Status::domain_error, "oscillator must lie in (0, Nyquist)");

    const std::size_t n = trace.samples.size();
    std::vector<double> in_phase(n), quadrature(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = trace.time_at(i);
        const double arg = (two_pi * f_osc_hz) * t;
        in_phase[i] = trace.samples[i] * std::cos(arg);
        quadrature[i] = trace.samples[i] * std::sin(arg);
    }
    in_phase = filter.apply(in_phase);
    quadrature = filter.apply(quadrature);

    EnvelopeTrace env;
    env.sample_rate_hz = trace.sample_rate_hz;
    env.t0_s = trace.t0_s;
    env.magnitude.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        env.magnitude[i] = std::hypot(in_phase[i], quadrature[i]);
    return env;
}

double gate_average(const EnvelopeTrace& envelope, double t_start_s, double t_end_s) {
    if (!(t_end_s > t_start_s)) raise(Status::domain_error, "gate end must exceed gate start");
    const double fs = envelope.sample_rate_hz;
    const double first = envelope.t0_s;
    const double last = envelope.time_at(envelope.magnitude.size() - 1);
    if (t_start_s < first || t_end_s > last)
        raise(Status::domain_error, "gate window outside envelope span");

    const auto i0 = static_cast<std::size_t>(std::ceil((t_start_s - first) * fs));
    const auto i1 = static_cast<std::size_t>(std::floor((t_end_s - first) * fs));
    if (i1 < i0) raise(Status::domain_error, "gate window contains no samples");
    return mean({envelope.magnitude.data() + i0, i1 - i0 + 1});
}

TofResult detect_tof(const EchoTrace& trace, const EchoTrace& excitation, double threshold_mads) {
    trace.validate();
    excitation.validate();
    if (trace.sample_rate_hz != excitation.sample_rate_hz)
        raise(Status::domain_error, "trace and excitation sample rates differ");
    if (trace.samples.size() < excitation.samples.size())
        raise(Status::no_echo, "trace shorter than excitation");

    const std::size_t nfft = next_pow2(trace.samples.size() + excitation.samples.size());
    std::vector<cplx> ft = fft_real_padded(trace.samples, nfft);
    const std::vector<cplx> fe = fft_real_padded(excitation.samples, nfft);
    for (std::size_t k = 0; k < nfft; ++k) ft[k] *= std::conj(fe[k]);
    fft_inplace(ft, true);

    // Lags up to the trace end; the reference may overhang (zero padded).
    const std::size_t n_lags = trace.samples.size();
    std::vector<double> corr(n_lags);
    for (std::size_t k = 0; k < n_lags; ++k) corr[k] = ft[k].real();

    std::size_t best = 0;
    double peak = 0.0;
    for (std::size_t k = 0; k < n_lags; ++k) {
        const double v = std::abs(corr[k]);
        if (v > peak) {
            peak = v;
            best = k;
        }
    }

    // Robust floor estimate: median absolute deviation of the correlation.
    std::vector<double> tmp = corr;
    const std::size_t mid = tmp.size() / 2;
    std::nth_element(tmp.begin(), tmp.begin() + mid, tmp.end());
    const double med = tmp[mid];
    for (double& v : tmp) v = std::abs(v - med);
    std::nth_element(tmp.begin(), tmp.begin() + mid, tmp.end());
    const double sigma = 1.4826 * tmp[mid];

    const double threshold = threshold_mads * sigma;
    if (!(peak > 0.0) || peak <= threshold)
        raise(Status::no_echo, "correlation peak below detection threshold");

    TofResult result;
    result.lag_samples = best;
    result.tof_s = trace.t0_s + static_cast<double>(best) / trace.sample_rate_hz;
    result.peak_to_threshold = threshold > 0.0 ? peak / threshold
                                               : std::numeric_limits<double>::infinity();
    return result;
}

} // namespace puc
