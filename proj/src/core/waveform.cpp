#include "core/waveform.hpp"

#include <algorithm>
#include <cmath>

#include "core/fft.hpp"

namespace puc {

namespace {

constexpr std::size_t delay_precursor_samples = 64;

std::size_t gate_sample_count(double duration_s, double sample_rate_hz) {
    return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

} // namespace

void EchoTrace::validate() const {
    if (!(sample_rate_hz > 0.0)) raise(Status::domain_error, "trace sample rate must be > 0");
    if (samples.empty()) raise(Status::domain_error, "trace has no samples");
    for (double s : samples)
        if (!std::isfinite(s)) raise(Status::domain_error, "trace has non-finite samples");
}

double BandSpec::magnitude_at(double f_hz) const {
    // -3 dB magnitude points at center * (1 +- fbw/2).
    const double half_bw = 0.5 * fractional_bandwidth * center_hz;
    const double sigma = half_bw / std::sqrt(std::numbers::ln2);
    const double d = (f_hz - center_hz) / sigma;
    return std::exp(-0.5 * d * d);
}

void LinkScenario::validate() const {
    stack.validate();
    load.validate();
    medium.validate();
    if (!(distance_m > 0.0)) raise(Status::domain_error, "scenario distance must be > 0");
    if (!(band.fractional_bandwidth > 0.0) || !(band.fractional_bandwidth < 2.0))
        raise(Status::domain_error, "fractional bandwidth must lie in (0, 2)");
    if (!(amplitude_scale >= 0.0)) raise(Status::domain_error, "amplitude scale must be >= 0");
    if (!(trace_tail_s > 0.0)) raise(Status::domain_error, "trace tail must be > 0");
}

EchoTrace make_burst(double f_hz, double duration_s, double amplitude_v, double sample_rate_hz,
                     double tail_s) {
    if (!(f_hz > 0.0)) raise(Status::domain_error, "burst frequency must be > 0");
    if (sample_rate_hz < 10.0 * f_hz)
        raise(Status::domain_error, "undersampled burst: need sample_rate >= 10*f");
    if (duration_s < 2.0 / f_hz)
        raise(Status::domain_error, "burst too short: need duration >= 2/f");
    if (tail_s < 0.0) raise(Status::domain_error, "burst tail must be >= 0");

    const std::size_t n_gate = gate_sample_count(duration_s, sample_rate_hz);
    const std::size_t n_tail = gate_sample_count(tail_s, sample_rate_hz);

    EchoTrace trace;
    trace.sample_rate_hz = sample_rate_hz;
    trace.samples.assign(n_gate + n_tail, 0.0);
    for (std::size_t i = 0; i < n_gate; ++i) {
        const double t = static_cast<double>(i) / sample_rate_hz;
        trace.samples[i] = amplitude_v * std::sin((two_pi * f_hz) * t);
    }
    return trace;
}

int burst_cycles(double f_hz, double duration_s) {
    return static_cast<int>(std::llround(f_hz * duration_s));
}

EchoTrace make_chirp(double f_start_hz, double f_end_hz, double duration_s, double amplitude_v,
                     double sample_rate_hz, double tail_s) {
    if (!(f_start_hz > 0.0) || f_end_hz < f_start_hz)
        raise(Status::domain_error, "chirp needs 0 < f_start <= f_end");
    if (sample_rate_hz < 10.0 * f_end_hz)
        raise(Status::domain_error, "undersampled chirp: need sample_rate >= 10*f_end");
    if (duration_s < 2.0 / f_start_hz)
        raise(Status::domain_error, "chirp too short: need duration >= 2/f_start");
    if (tail_s < 0.0) raise(Status::domain_error, "chirp tail must be >= 0");

    const std::size_t n_gate = gate_sample_count(duration_s, sample_rate_hz);
    const std::size_t n_tail = gate_sample_count(tail_s, sample_rate_hz);
    const double half_rate = 0.5 * (f_end_hz - f_start_hz) / duration_s;

    EchoTrace trace;
    trace.sample_rate_hz = sample_rate_hz;
    trace.samples.assign(n_gate + n_tail, 0.0);
    for (std::size_t i = 0; i < n_gate; ++i) {
        const double t = static_cast<double>(i) / sample_rate_hz;
        // phase = 2*pi * (f_start + half_rate * t) * t, matching make_burst
        // bit-for-bit when the sweep rate is zero
        trace.samples[i] = amplitude_v * std::sin((two_pi * (f_start_hz + half_rate * t)) * t);
    }
    return trace;
}

EchoSynthesizer::EchoSynthesizer(const LinkScenario& scenario, double sample_rate_hz,
                                 std::size_t excitation_samples)
    : scenario_(scenario), sample_rate_hz_(sample_rate_hz) {
    scenario.validate();
    tof_s_ = time_of_flight(scenario.distance_m, scenario.medium);

    const auto n_tail = static_cast<std::size_t>(std::ceil(scenario.trace_tail_s * sample_rate_hz));
    n_short_ = excitation_samples + n_tail + 2 * delay_precursor_samples;
    nfft_ = std::max<std::size_t>(next_pow2(4 * n_short_), 16384);

    const double delay_samples = tof_s_ * sample_rate_hz;
    const auto k_int = static_cast<std::size_t>(std::floor(delay_samples));
    place_index_ = (k_int > delay_precursor_samples) ? k_int - delay_precursor_samples : 0;
    const double local_delay_s =
        (delay_samples - static_cast<double>(place_index_)) / sample_rate_hz;

    // Unit-scale transfer: the scenario amplitude scale is applied to the
    // signal afterwards so the demodulation path can stay scale-free.
    transfer_.resize(nfft_ / 2 + 1);
    transfer_[0] = {0.0, 0.0};
    const double df = sample_rate_hz / static_cast<double>(nfft_);
    for (std::size_t k = 1; k < nfft_ / 2; ++k) {
        const double f = df * static_cast<double>(k);
        const double t_band = scenario.band.magnitude_at(f);
        const cplx gamma = (scenario.target == TargetKind::flat_reflector)
                               ? cplx(scenario.flat_gamma, 0.0)
                               : reflection_coefficient(scenario.stack, scenario.load, f);
        const double atten = attenuation_factor(scenario.medium, f, scenario.distance_m);
        const double phase = -two_pi * f * local_delay_s;
        transfer_[k] = gamma * (t_band * t_band * atten * atten) *
                       cplx(std::cos(phase), std::sin(phase));
    }
    transfer_[nfft_ / 2] = {0.0, 0.0};
}

double EchoSynthesizer::gated_noise_sigma(const EchoTrace& echo,
                                          double excitation_duration_s) const {
    if (!scenario_.noise.snr_db) return 0.0;
    const auto i0 = static_cast<std::size_t>(std::floor(tof_s_ * sample_rate_hz_));
    const auto n_gate = gate_sample_count(excitation_duration_s, sample_rate_hz_);
    const std::size_t i1 = std::min(i0 + n_gate, echo.samples.size());
    if (i0 >= i1) raise(Status::internal_error, "echo gate outside trace");
    const double signal_rms = rms({echo.samples.data() + i0, i1 - i0});
    if (!(signal_rms > 0.0))
        raise(Status::domain_error, "cannot size noise: gated echo power is zero");
    return signal_rms * std::pow(10.0, -*scenario_.noise.snr_db / 20.0);
}

EchoTrace EchoSynthesizer::synthesize(const EchoTrace& excitation,
                                      std::optional<std::uint64_t> noise_seed,
                                      std::optional<double> sigma_override,
                                      bool apply_amplitude_scale) const {
    excitation.validate();
    if (excitation.sample_rate_hz != sample_rate_hz_)
        raise(Status::domain_error, "excitation sample rate differs from synthesizer");
    if (excitation.samples.size() + 2 * delay_precursor_samples > n_short_)
        raise(Status::invalid_argument, "excitation longer than synthesizer window");

    std::vector<cplx> spectrum = fft_real_padded(excitation.samples, nfft_);

    // Band-support check: excitation energy peak inside the -3 dB band.
    const double df = sample_rate_hz_ / static_cast<double>(nfft_);
    const double f_lo = scenario_.band.center_hz * (1.0 - 0.5 * scenario_.band.fractional_bandwidth);
    const double f_hi = scenario_.band.center_hz * (1.0 + 0.5 * scenario_.band.fractional_bandwidth);
    double peak_all = 0.0, peak_band = 0.0;
    for (std::size_t k = 1; k < nfft_ / 2; ++k) {
        const double mag = std::abs(spectrum[k]);
        peak_all = std::max(peak_all, mag);
        const double f = df * static_cast<double>(k);
        if (f >= f_lo && f <= f_hi) peak_band = std::max(peak_band, mag);
    }

    spectrum[0] = {0.0, 0.0};
    for (std::size_t k = 1; k < nfft_ / 2; ++k) {
        spectrum[k] *= transfer_[k];
        spectrum[nfft_ - k] = std::conj(spectrum[k]);
    }
    spectrum[nfft_ / 2] = {0.0, 0.0};

    const std::vector<double> short_trace = ifft_real(spectrum, n_short_);

    EchoTrace echo;
    echo.sample_rate_hz = sample_rate_hz_;
    echo.t0_s = 0.0;
    echo.samples.assign(place_index_ + n_short_, 0.0);
    std::copy(short_trace.begin(), short_trace.end(), echo.samples.begin() + place_index_);
    echo.band_support_warning = (peak_band < 0.01 * peak_all);

    for (double s : echo.samples)
        if (!std::isfinite(s)) raise(Status::internal_error, "echo synthesis produced non-finite samples");

    // Noise sigma references the unit-scale echo gate, so the noise floor
    // survives amplitude_scale = 0 (the spec's pure-noise edge case).
    double sigma = 0.0;
    if (noise_seed && scenario_.noise.snr_db)
        sigma = sigma_override ? *sigma_override : gated_noise_sigma(echo, excitation.duration_s());

    if (apply_amplitude_scale && scenario_.amplitude_scale != 1.0)
        for (double& s : echo.samples) s *= scenario_.amplitude_scale;

    if (sigma > 0.0) {
        Rng rng(*noise_seed);
        for (double& s : echo.samples) s += sigma * rng.next_gaussian();
    }
    return echo;
}

EchoTrace EchoSynthesizer::zero_delay_template(const EchoTrace& excitation) const {
    excitation.validate();
    if (excitation.sample_rate_hz != sample_rate_hz_)
        raise(Status::domain_error, "excitation sample rate differs from synthesizer");

    std::vector<cplx> spectrum = fft_real_padded(excitation.samples, nfft_);
    const double df = sample_rate_hz_ / static_cast<double>(nfft_);
    spectrum[0] = {0.0, 0.0};
    const double local_delay_s =
        (tof_s_ * sample_rate_hz_ - static_cast<double>(place_index_)) / sample_rate_hz_;
    for (std::size_t k = 1; k < nfft_ / 2; ++k) {
        // transfer_ carries the in-window delay; unwind it for the template
        const double f = df * static_cast<double>(k);
        const double phase = two_pi * f * local_delay_s;
        spectrum[k] *= transfer_[k] * cplx(std::cos(phase), std::sin(phase));
        spectrum[nfft_ - k] = std::conj(spectrum[k]);
    }
    spectrum[nfft_ / 2] = {0.0, 0.0};

    EchoTrace tpl;
    tpl.sample_rate_hz = sample_rate_hz_;
    tpl.samples = ifft_real(spectrum, n_short_);
    return tpl;
}

EchoTrace synthesize_echo(const EchoTrace& excitation, const LinkScenario& scenario) {
    EchoSynthesizer synth(scenario, excitation.sample_rate_hz, excitation.samples.size());
    std::optional<std::uint64_t> seed;
    if (scenario.noise.snr_db) seed = derive_substream(scenario.noise.seed, 0);
    return synth.synthesize(excitation, seed);
}

EchoTrace add_noise(const EchoTrace& trace, double snr_db, std::uint64_t seed) {
    trace.validate();
    double peak = 0.0;
    for (double s : trace.samples) peak = std::max(peak, std::abs(s));
    if (!(peak > 0.0))
        raise(Status::domain_error, "add_noise: trace has zero signal power");

    // Signal gate: smallest index window holding everything above 1% of peak.
    std::size_t lo = 0, hi = trace.samples.size();
    while (lo < hi && std::abs(trace.samples[lo]) < 0.01 * peak) ++lo;
    while (hi > lo && std::abs(trace.samples[hi - 1]) < 0.01 * peak) --hi;
    const double signal_rms = rms({trace.samples.data() + lo, hi - lo});
    const double sigma = signal_rms * std::pow(10.0, -snr_db / 20.0);

    EchoTrace out = trace;
    Rng rng(derive_substream(seed, 0));
    for (double& s : out.samples) s += sigma * rng.next_gaussian();
    return out;
}

std::size_t correlation_peak_lag(const std::vector<double>& trace,
                                 const std::vector<double>& reference) {
    if (reference.empty() || trace.size() < reference.size())
        raise(Status::domain_error, "correlation needs trace at least as long as reference");
    const std::size_t nfft = next_pow2(trace.size() + reference.size());
    std::vector<cplx> ft = fft_real_padded(trace, nfft);
    const std::vector<cplx> fr = fft_real_padded(reference, nfft);
    for (std::size_t k = 0; k < nfft; ++k) ft[k] *= std::conj(fr[k]);
    fft_inplace(ft, true);

    std::size_t best = 0;
    double best_val = -1.0;
    const std::size_t n_lags = trace.size() - reference.size() + 1;
    for (std::size_t k = 0; k < n_lags; ++k) {
        const double v = std::abs(ft[k].real());
        if (v > best_val) {
            best_val = v;
            best = k;
        }
    }
    return best;
}

} // namespace puc
