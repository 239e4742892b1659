#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "core/lockin.hpp"
#include "core/waveform.hpp"

namespace puc {

/// Uniform frequency grid for the sweep.
struct SweepGrid {
    double f_start_hz = 2.20e6;
    double f_stop_hz = 2.35e6;
    double step_hz = 500.0;

    void validate() const;
    std::vector<double> frequencies() const;
};

struct DspSettings {
    double sample_rate_hz = 50e6;
    int filter_order = 4;
    double cutoff_hz = 200e3;
    double gate_guard_fraction = 0.2; // trimmed from each end of the burst gate
    double tof_threshold_mads = 5.0;

    void validate() const;
};

struct SweepSettings {
    SweepGrid grid;
    double burst_duration_s = 12e-6;
    double excitation_amplitude_v = 1.0;
    double smoothing_sigma_bins = 2.0;
    double chirp_duration_s = 400e-6;
    bool use_chirp = false;

    void validate() const;
};

struct SweepMeta {
    double tof_s = 0.0;
    double distance_m = 0.0;
    bool smoothed = false;
    bool compensated = false;
    double amplitude_gain = 1.0;   // excitation amplitude x scenario scale
    std::size_t pulse_echo_count = 0;
};

/// Echo-envelope amplitude per swept frequency. Amplitudes are stored at
/// unit gain; amplitude_gain carries the physical scale for export. The
/// valley estimator reads the stored values only, which keeps it bit-exactly
/// independent of any global amplitude factor.
struct SweepSpectrum {
    std::vector<double> freqs_hz;
    std::vector<double> amplitudes;
    SweepMeta meta;

    void validate() const;
    double step_hz() const;
};

/// Precomputes everything a repeated sweep shares: the excitation bursts,
/// their spectra, and the noiseless unit echoes per grid frequency. run()
/// then only draws noise, demodulates and gates.
class SweepEngine {
public:
    SweepEngine(const LinkScenario& scenario, const DspSettings& dsp, const SweepSettings& sweep);

    /// One full sweep; rep_index selects the noise substream so batches can
    /// run in any order and still reproduce bit-exactly.
    SweepSpectrum run(std::uint64_t rep_index = 0) const;

    double tof_s() const { return synth_->tof_s(); }

private:
    LinkScenario scenario_;
    DspSettings dsp_;
    SweepSettings sweep_;
    std::vector<double> freqs_;
    FilterSpec filter_;
    std::unique_ptr<EchoSynthesizer> synth_;
    std::vector<EchoTrace> unit_echoes_;
    EchoTrace first_burst_;
    EchoTrace tof_template_;
    double noise_sigma_ = 0.0;
    double gain_ = 1.0;
};

/// Sequential lock-in sweep (spec pipeline: burst -> echo -> demodulate ->
/// gate average per frequency, time of flight detected once).
SweepSpectrum run_sweep(const LinkScenario& scenario, const DspSettings& dsp,
                        const SweepSettings& sweep, std::uint64_t rep_index = 0);

/// Discrete Gaussian smoothing with reflective boundaries; sigma_bins = 0 is
/// the identity.
SweepSpectrum smooth_spectrum(const SweepSpectrum& spectrum, double sigma_bins);

struct ValleyResult {
    double f_hz = 0.0;
    double depth_db = 0.0;
    bool ambiguous = false;
};

/// Grid argmin refined by parabolic interpolation; boundary error when the
/// minimum touches the grid edge. Ties resolve to the lowest frequency and
/// set the ambiguity flag.
ValleyResult find_valley_detailed(const SweepSpectrum& spectrum);
double find_valley(const SweepSpectrum& spectrum);

/// Divides out the round-trip attenuation derived from the stored time of
/// flight, flattening the medium tilt.
SweepSpectrum compensate_distance(const SweepSpectrum& spectrum, const Medium& medium);

/// Single-pulse band excitation: one chirp echo, spectrum estimated as the
/// regularized ratio |FFT(gated echo)| / |FFT(excitation)| on the sweep grid.
SweepSpectrum chirp_sweep(const LinkScenario& scenario, const DspSettings& dsp,
                          const SweepSettings& sweep, std::uint64_t rep_index = 0);

enum class CalibrationKind { freq_to_capacitance, freq_to_pressure };

/// Polynomial value(f) in a centered frequency basis u = (2f - lo - hi) /
/// (hi - lo), directly invertible from a measured valley frequency.
struct CalibrationCurve {
    CalibrationKind kind = CalibrationKind::freq_to_capacitance;
    int order = 2;
    std::vector<double> coeffs; // ascending powers of u
    double domain_lo_hz = 0.0;
    double domain_hi_hz = 0.0;
    double residual_rms = 0.0;

    double evaluate(double f_hz, double extrapolation_margin = 0.05) const;
    double derivative_at(double f_hz) const; // d value / d f
};

struct CalibrationPoint {
    double f_hz = 0.0;
    double value = 0.0; // farads or kPa according to the curve kind
};

CalibrationCurve fit_calibration(const std::vector<CalibrationPoint>& points, int order,
                                 CalibrationKind kind);

/// Pressure sensor: linear below the knee, reduced slope beyond it.
struct SensorModel {
    double base_capacitance_f = 20e-12;
    double sensitivity_f_per_kpa = 5.83e-12;
    double knee_kpa = 20.0;
    double saturation_slope_factor = 0.2;

    void validate() const;
};

double sensor_capacitance(double pressure_kpa, const SensorModel& model);

struct EstimateResult {
    double t_s = 0.0;
    double f_valley_hz = 0.0;
    double c_load_f = 0.0;      // NaN when no capacitance calibration given
    double pressure_kpa = 0.0;  // NaN when no pressure calibration given
    double tof_s = 0.0;
    double valley_depth_db = 0.0;
    bool valid = false;
    bool clipped = false;       // negative pressure clipped to zero
};

struct PressureSample {
    double t_s = 0.0;
    double pressure_kpa = 0.0;
};

struct StreamSettings {
    double tick_rate_hz = 1.0;
    double duration_s = 0.0; // 0 = run to the end of the pressure trace
};

/// Replays a pressure trace through the full measurement chain at the tick
/// rate: sensor capacitance -> sweep -> smooth -> valley -> calibration
/// inversion. Invalid ticks (boundary or domain failures) are flagged and
/// the stream continues.
std::vector<EstimateResult> estimate_stream(const LinkScenario& scenario, const DspSettings& dsp,
                                            const SweepSettings& sweep, const SensorModel& sensor,
                                            const std::vector<PressureSample>& pressure_trace,
                                            const StreamSettings& stream,
                                            const CalibrationCurve* capacitance_cal,
                                            const CalibrationCurve* pressure_cal);

} // namespace puc
