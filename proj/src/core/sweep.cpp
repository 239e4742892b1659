#include "core/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/fft.hpp"

namespace puc {

void SweepGrid::validate() const {
    if (!(f_start_hz > 0.0) || !(f_stop_hz > f_start_hz) || !(step_hz > 0.0))
        raise(Status::domain_error, "sweep grid needs 0 < f_start < f_stop and step > 0");
}

std::vector<double> SweepGrid::frequencies() const {
    validate();
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::floor((f_stop_hz - f_start_hz) / step_hz + 0.5)) + 1;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(f_start_hz + step_hz * static_cast<double>(i));
    return out;
}

void DspSettings::validate() const {
    if (!(sample_rate_hz > 0.0)) raise(Status::domain_error, "sample rate must be > 0");
    if (filter_order < 2 || filter_order % 2 != 0)
        raise(Status::domain_error, "filter order must be even and >= 2");
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * sample_rate_hz))
        raise(Status::domain_error, "cutoff must lie in (0, Nyquist)");
    if (!(gate_guard_fraction >= 0.0) || !(gate_guard_fraction < 0.5))
        raise(Status::domain_error, "gate guard fraction must lie in [0, 0.5)");
    if (!(tof_threshold_mads > 0.0)) raise(Status::domain_error, "tof threshold must be > 0");
}

void SweepSettings::validate() const {
    grid.validate();
    if (!(burst_duration_s > 0.0)) raise(Status::domain_error, "burst duration must be > 0");
    if (!(excitation_amplitude_v >= 0.0))
        raise(Status::domain_error, "excitation amplitude must be >= 0");
    if (!(smoothing_sigma_bins >= 0.0)) raise(Status::domain_error, "smoothing sigma must be >= 0");
    if (!(chirp_duration_s > 0.0)) raise(Status::domain_error, "chirp duration must be > 0");
}

void SweepSpectrum::validate() const {
    if (freqs_hz.size() != amplitudes.size() || freqs_hz.size() < 3)
        raise(Status::domain_error, "sweep spectrum needs matching freqs/amplitudes, >= 3 points");
    for (double a : amplitudes)
        if (!(a >= 0.0) || !std::isfinite(a))
            raise(Status::domain_error, "sweep amplitudes must be finite and >= 0");
    const double step = freqs_hz[1] - freqs_hz[0];
    for (std::size_t i = 0; i + 1 < freqs_hz.size(); ++i) {
        const double d = freqs_hz[i + 1] - freqs_hz[i];
        if (!(d > 0.0) || std::abs(d - step) > 1e-6 * step)
            raise(Status::domain_error, "sweep grid must be uniform and increasing");
    }
}

double SweepSpectrum::step_hz() const { return freqs_hz[1] - freqs_hz[0]; }

namespace {

void check_band_support(const LinkScenario& scenario, double f_lo, double f_hi) {
    const double lo = scenario.band.center_hz * (1.0 - scenario.band.fractional_bandwidth);
    const double hi = scenario.band.center_hz * (1.0 + scenario.band.fractional_bandwidth);
    if (f_lo < lo || f_hi > hi)
        raise(Status::domain_error, "sweep grid outside interrogator band support");
}

// Per-point substream: (rep, frequency index) so evaluation order is free.
std::uint64_t point_seed(std::uint64_t master, std::uint64_t rep, std::uint64_t index) {
    return derive_substream(derive_substream(master, rep), index);
}

} // namespace

SweepEngine::SweepEngine(const LinkScenario& scenario, const DspSettings& dsp,
                         const SweepSettings& sweep)
    : scenario_(scenario), dsp_(dsp), sweep_(sweep) {
    scenario.validate();
    dsp.validate();
    sweep.validate();
    freqs_ = sweep.grid.frequencies();
    check_band_support(scenario, freqs_.front(), freqs_.back());

    gain_ = sweep.excitation_amplitude_v * scenario.amplitude_scale;
    if (!(gain_ > 0.0))
        raise(Status::no_echo, "zero-amplitude excitation produces no echo");

    filter_ = design_lowpass(dsp.filter_order, dsp.cutoff_hz, dsp.sample_rate_hz);

    first_burst_ = make_burst(freqs_.front(), sweep.burst_duration_s, 1.0, dsp.sample_rate_hz);
    synth_ = std::make_unique<EchoSynthesizer>(scenario, dsp.sample_rate_hz,
                                               first_burst_.samples.size());

    tof_template_ = synth_->zero_delay_template(first_burst_);

    unit_echoes_.reserve(freqs_.size());
    for (double f : freqs_) {
        const EchoTrace burst = make_burst(f, sweep.burst_duration_s, 1.0, dsp.sample_rate_hz);
        unit_echoes_.push_back(
            synth_->synthesize(burst, std::nullopt, std::nullopt, /*apply_amplitude_scale=*/false));
    }

    if (scenario.noise.snr_db)
        noise_sigma_ = synth_->gated_noise_sigma(unit_echoes_.front(), sweep.burst_duration_s);
}

SweepSpectrum SweepEngine::run(std::uint64_t rep_index) const {
    const double dur = sweep_.burst_duration_s;
    const double guard = dsp_.gate_guard_fraction * dur;

    SweepSpectrum spectrum;
    spectrum.freqs_hz = freqs_;
    spectrum.amplitudes.resize(freqs_.size());
    spectrum.meta.distance_m = scenario_.distance_m;
    spectrum.meta.amplitude_gain = gain_;
    spectrum.meta.pulse_echo_count = freqs_.size();

    double tof = 0.0;
    for (std::size_t k = 0; k < freqs_.size(); ++k) {
        EchoTrace trace = unit_echoes_[k];
        if (noise_sigma_ > 0.0) {
            Rng rng(point_seed(scenario_.noise.seed, rep_index, k));
            for (double& s : trace.samples) s += noise_sigma_ * rng.next_gaussian();
        }
        if (k == 0) {
            tof = detect_tof(trace, tof_template_, dsp_.tof_threshold_mads).tof_s;
            spectrum.meta.tof_s = tof;
        }
        const EnvelopeTrace env = demodulate(trace, freqs_[k], filter_);
        spectrum.amplitudes[k] = gate_average(env, tof + guard, tof + dur - guard);
    }
    spectrum.validate();
    return spectrum;
}

SweepSpectrum run_sweep(const LinkScenario& scenario, const DspSettings& dsp,
                        const SweepSettings& sweep, std::uint64_t rep_index) {
    return SweepEngine(scenario, dsp, sweep).run(rep_index);
}

SweepSpectrum smooth_spectrum(const SweepSpectrum& spectrum, double sigma_bins) {
    spectrum.validate();
    if (sigma_bins < 0.0) raise(Status::domain_error, "smoothing sigma must be >= 0");
    SweepSpectrum out = spectrum;
    out.meta.smoothed = true;
    if (sigma_bins == 0.0) return out;

    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma_bins));
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0.0;
    for (std::ptrdiff_t j = -radius; j <= radius; ++j) {
        const double w = std::exp(-0.5 * (static_cast<double>(j) / sigma_bins) *
                                  (static_cast<double>(j) / sigma_bins));
        kernel[j + radius] = w;
        norm += w;
    }
    for (double& w : kernel) w /= norm;

    const auto n = static_cast<std::ptrdiff_t>(spectrum.amplitudes.size());
    auto reflect = [n](std::ptrdiff_t i) {
        while (i < 0 || i >= n) {
            if (i < 0) i = -i - 1;
            if (i >= n) i = 2 * n - 1 - i;
        }
        return i;
    };
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t j = -radius; j <= radius; ++j)
            acc += kernel[j + radius] * spectrum.amplitudes[reflect(i + j)];
        out.amplitudes[i] = acc;
    }
    return out;
}

ValleyResult find_valley_detailed(const SweepSpectrum& spectrum) {
    spectrum.validate();
    const auto& amp = spectrum.amplitudes;
    const std::size_t n = amp.size();

    std::size_t idx = 0;
    bool ambiguous = false;
    for (std::size_t i = 1; i < n; ++i) {
        if (amp[i] < amp[idx]) {
            idx = i;
        } else if (amp[i] == amp[idx] && amp[idx] < amp[0]) {
            ambiguous = true; // equal minima: keep the lowest frequency
        }
    }
    if (idx == 0 || idx == n - 1)
        raise(Status::boundary_error, "spectrum minimum at sweep edge; widen the sweep span");

    const double offset = parabolic_vertex_offset(amp[idx - 1], amp[idx], amp[idx + 1]);
    const double peak = *std::max_element(amp.begin(), amp.end());

    ValleyResult result;
    result.f_hz = spectrum.freqs_hz[idx] + offset * spectrum.step_hz();
    result.depth_db = db_from_amplitude(peak / amp[idx]);
    result.ambiguous = ambiguous;
    return result;
}

double find_valley(const SweepSpectrum& spectrum) { return find_valley_detailed(spectrum).f_hz; }

SweepSpectrum compensate_distance(const SweepSpectrum& spectrum, const Medium& medium) {
    spectrum.validate();
    if (!(spectrum.meta.tof_s > 0.0))
        raise(Status::domain_error, "compensation needs the measured time of flight");
    const double round_trip_m = medium.sound_speed_m_s * spectrum.meta.tof_s;
    SweepSpectrum out = spectrum;
    out.meta.compensated = true;
    for (std::size_t k = 0; k < out.freqs_hz.size(); ++k)
        out.amplitudes[k] =
            spectrum.amplitudes[k] / attenuation_factor(medium, out.freqs_hz[k], round_trip_m);
    return out;
}

SweepSpectrum chirp_sweep(const LinkScenario& scenario, const DspSettings& dsp,
                          const SweepSettings& sweep, std::uint64_t rep_index) {
    scenario.validate();
    dsp.validate();
    sweep.validate();
    const std::vector<double> freqs = sweep.grid.frequencies();
    check_band_support(scenario, freqs.front(), freqs.back());

    const double f0 = sweep.grid.f_start_hz;
    const double f1 = sweep.grid.f_stop_hz;
    const double duration = sweep.chirp_duration_s;
    if ((f1 - f0) * duration < 50.0)
        raise(Status::domain_error, "chirp time-bandwidth product must be >= 50");

    const double gain = sweep.excitation_amplitude_v * scenario.amplitude_scale;
    if (!(gain > 0.0)) raise(Status::no_echo, "zero-amplitude excitation produces no echo");

    const EchoTrace excitation = make_chirp(f0, f1, duration, 1.0, dsp.sample_rate_hz);
    EchoSynthesizer synth(scenario, dsp.sample_rate_hz, excitation.samples.size());

    std::optional<std::uint64_t> seed;
    if (scenario.noise.snr_db) seed = point_seed(scenario.noise.seed, rep_index, 0);
    const EchoTrace echo =
        synth.synthesize(excitation, seed, std::nullopt, /*apply_amplitude_scale=*/false);

    const TofResult tof =
        detect_tof(echo, synth.zero_delay_template(excitation), dsp.tof_threshold_mads);

    // Gate the echo around [tof, tof + duration + tail] before the ratio.
    const double fs = dsp.sample_rate_hz;
    const auto pre = static_cast<std::size_t>(std::floor(2e-6 * fs));
    const std::size_t gate_lo = tof.lag_samples > pre ? tof.lag_samples - pre : 0;
    std::vector<double> gated(echo.samples.begin() + static_cast<std::ptrdiff_t>(gate_lo),
                              echo.samples.end());

    // Resolution fine enough to interpolate the sweep grid from FFT bins.
    const std::size_t nfft =
        std::max(next_pow2(gated.size()), next_pow2(static_cast<std::size_t>(
                                              std::ceil(fs / (0.5 * sweep.grid.step_hz)))));
    const std::vector<cplx> spec_echo = fft_real_padded(gated, nfft);
    const std::vector<cplx> spec_exc = fft_real_padded(excitation.samples, nfft);

    const double df = fs / static_cast<double>(nfft);
    auto band_bin = [&](double f) { return f / df; };

    double denom_peak = 0.0;
    for (double f = f0; f <= f1; f += sweep.grid.step_hz) {
        const auto k = static_cast<std::size_t>(band_bin(f));
        denom_peak = std::max(denom_peak, std::abs(spec_exc[k]));
    }
    const double floor_mag = 1e-3 * denom_peak;

    SweepSpectrum spectrum;
    spectrum.freqs_hz = freqs;
    spectrum.amplitudes.resize(freqs.size());
    spectrum.meta.tof_s = tof.tof_s;
    spectrum.meta.distance_m = scenario.distance_m;
    spectrum.meta.amplitude_gain = gain;
    spectrum.meta.pulse_echo_count = 1;

    std::size_t starved = 0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double pos = band_bin(freqs[i]);
        const auto k = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(k);
        const double num = std::abs(spec_echo[k]) * (1.0 - frac) + std::abs(spec_echo[k + 1]) * frac;
        const double den = std::abs(spec_exc[k]) * (1.0 - frac) + std::abs(spec_exc[k + 1]) * frac;
        if (den < floor_mag) ++starved;
        spectrum.amplitudes[i] = num / std::max(den, floor_mag);
    }
    if (starved * 10 > freqs.size())
        raise(Status::domain_error,
              "insufficient excitation: chirp spectrum below floor over >10% of the band");
    spectrum.validate();
    return spectrum;
}

double CalibrationCurve::evaluate(double f_hz, double extrapolation_margin) const {
    const double span = domain_hi_hz - domain_lo_hz;
    if (f_hz < domain_lo_hz - extrapolation_margin * span ||
        f_hz > domain_hi_hz + extrapolation_margin * span)
        raise(Status::domain_error, "calibration evaluated outside its fitted domain");
    const double u = (2.0 * f_hz - domain_lo_hz - domain_hi_hz) / span;
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * u + coeffs[i];
    return acc;
}

double CalibrationCurve::derivative_at(double f_hz) const {
    const double span = domain_hi_hz - domain_lo_hz;
    const double u = (2.0 * f_hz - domain_lo_hz - domain_hi_hz) / span;
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 1;)
        acc = acc * u + coeffs[i] * static_cast<double>(i);
    return acc * 2.0 / span;
}

CalibrationCurve fit_calibration(const std::vector<CalibrationPoint>& points, int order,
                                 CalibrationKind kind) {
    if (order < 1) raise(Status::fit_error, "calibration order must be >= 1");
    const std::size_t n = points.size();
    const auto m = static_cast<std::size_t>(order) + 1;
    if (n < m) raise(Status::fit_error, "calibration needs at least order+1 points");

    double lo = points[0].f_hz, hi = points[0].f_hz;
    for (const auto& p : points) {
        lo = std::min(lo, p.f_hz);
        hi = std::max(hi, p.f_hz);
    }
    if (!(hi > lo)) raise(Status::fit_error, "calibration frequencies must be distinct");

    // Normal equations in the centered basis; m is tiny (order 2 default).
    std::vector<double> ata(m * m, 0.0);
    std::vector<double> atb(m, 0.0);
    for (const auto& p : points) {
        const double u = (2.0 * p.f_hz - lo - hi) / (hi - lo);
        std::vector<double> row(m);
        double pw = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            row[j] = pw;
            pw *= u;
        }
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = 0; c < m; ++c) ata[r * m + c] += row[r] * row[c];
            atb[r] += row[r] * p.value;
        }
    }

    // Gaussian elimination with partial pivoting.
    std::vector<double> a = ata, b = atb;
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::abs(a[r * m + col]) > std::abs(a[piv * m + col])) piv = r;
        if (std::abs(a[piv * m + col]) < 1e-12)
            raise(Status::fit_error, "calibration fit is rank deficient");
        if (piv != col) {
            for (std::size_t c = 0; c < m; ++c) std::swap(a[col * m + c], a[piv * m + c]);
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < m; ++r) {
            const double factor = a[r * m + col] / a[col * m + col];
            for (std::size_t c = col; c < m; ++c) a[r * m + c] -= factor * a[col * m + c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> coeffs(m, 0.0);
    for (std::size_t r = m; r-- > 0;) {
        double acc = b[r];
        for (std::size_t c = r + 1; c < m; ++c) acc -= a[r * m + c] * coeffs[c];
        coeffs[r] = acc / a[r * m + r];
    }

    CalibrationCurve curve;
    curve.kind = kind;
    curve.order = order;
    curve.coeffs = coeffs;
    curve.domain_lo_hz = lo;
    curve.domain_hi_hz = hi;

    double ss = 0.0;
    for (const auto& p : points) {
        const double r = curve.evaluate(p.f_hz) - p.value;
        ss += r * r;
    }
    curve.residual_rms = std::sqrt(ss / static_cast<double>(n));
    return curve;
}

void SensorModel::validate() const {
    if (!(base_capacitance_f >= 0.0) || !(sensitivity_f_per_kpa > 0.0) || !(knee_kpa > 0.0) ||
        !(saturation_slope_factor >= 0.0))
        raise(Status::domain_error, "sensor model parameters out of range");
}

double sensor_capacitance(double pressure_kpa, const SensorModel& model) {
    model.validate();
    if (pressure_kpa < 0.0) raise(Status::domain_error, "pressure must be >= 0");
    if (pressure_kpa <= model.knee_kpa)
        return model.base_capacitance_f + model.sensitivity_f_per_kpa * pressure_kpa;
    return model.base_capacitance_f + model.sensitivity_f_per_kpa * model.knee_kpa +
           model.sensitivity_f_per_kpa * model.saturation_slope_factor *
               (pressure_kpa - model.knee_kpa);
}

std::vector<EstimateResult> estimate_stream(const LinkScenario& scenario, const DspSettings& dsp,
                                            const SweepSettings& sweep, const SensorModel& sensor,
                                            const std::vector<PressureSample>& pressure_trace,
                                            const StreamSettings& stream,
                                            const CalibrationCurve* capacitance_cal,
                                            const CalibrationCurve* pressure_cal) {
    if (pressure_trace.empty()) raise(Status::domain_error, "pressure trace is empty");
    for (std::size_t i = 0; i + 1 < pressure_trace.size(); ++i)
        if (!(pressure_trace[i].t_s < pressure_trace[i + 1].t_s))
            raise(Status::domain_error, "pressure trace times must be strictly increasing");
    if (!(stream.tick_rate_hz > 0.0)) raise(Status::domain_error, "tick rate must be > 0");
    if (capacitance_cal == nullptr && pressure_cal == nullptr)
        raise(Status::domain_error, "estimate stream needs at least one calibration curve");

    const double t_end = stream.duration_s > 0.0 ? stream.duration_s : pressure_trace.back().t_s;
    const auto n_ticks = static_cast<std::size_t>(std::floor(t_end * stream.tick_rate_hz)) + 1;

    // zero-order hold of the input trace
    auto pressure_at = [&](double t) {
        double p = pressure_trace.front().pressure_kpa;
        for (const auto& s : pressure_trace) {
            if (s.t_s <= t) p = s.pressure_kpa;
            else break;
        }
        return p;
    };

    std::vector<EstimateResult> results;
    results.reserve(n_ticks);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (std::size_t tick = 0; tick < n_ticks; ++tick) {
        EstimateResult r;
        r.t_s = static_cast<double>(tick) / stream.tick_rate_hz;
        r.c_load_f = nan;
        r.pressure_kpa = nan;
        try {
            LinkScenario tick_scenario = scenario;
            tick_scenario.load.c_load_f = sensor_capacitance(pressure_at(r.t_s), sensor);

            SweepSpectrum spectrum = sweep.use_chirp
                                         ? chirp_sweep(tick_scenario, dsp, sweep, tick)
                                         : run_sweep(tick_scenario, dsp, sweep, tick);
            const SweepSpectrum smoothed = smooth_spectrum(spectrum, sweep.smoothing_sigma_bins);
            const ValleyResult valley = find_valley_detailed(smoothed);

            r.f_valley_hz = valley.f_hz;
            r.valley_depth_db = valley.depth_db;
            r.tof_s = spectrum.meta.tof_s;
            if (capacitance_cal) r.c_load_f = capacitance_cal->evaluate(valley.f_hz);
            if (pressure_cal) {
                double p = pressure_cal->evaluate(valley.f_hz);
                if (p < 0.0) {
                    p = 0.0;
                    r.clipped = true;
                }
                r.pressure_kpa = p;
            }
            r.valid = true;
        } catch (const Error&) {
            r.valid = false;
        }
        results.push_back(r);
    }
    return results;
}

} // namespace puc
