#pragma once

#include <vector>

#include "core/waveform.hpp"

namespace puc {

struct BiquadSection {
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0; // a0 normalized to 1
};

/// Butterworth low-pass realized as a cascade of stable biquads.
struct FilterSpec {
    int order = 0;
    double cutoff_hz = 0.0;
    double sample_rate_hz = 0.0;
    std::vector<BiquadSection> sections;

    /// |H| at frequency f from the cascaded z-domain response.
    double magnitude_at(double f_hz) const;

    /// Single-pass causal filtering with zero initial state.
    std::vector<double> apply(const std::vector<double>& x) const;
};

/// Bilinear-transform Butterworth design; DC gain forced to exactly one and
/// every section checked for stability.
FilterSpec design_lowpass(int order, double cutoff_hz, double sample_rate_hz);

struct EnvelopeTrace {
    double sample_rate_hz = 0.0;
    double t0_s = 0.0;
    std::vector<double> magnitude;

    double time_at(std::size_t i) const { return t0_s + static_cast<double>(i) / sample_rate_hz; }
};

/// Dual-phase lock-in: magnitude = sqrt(I^2 + Q^2) of the low-passed mixer
/// products. A tone at f_osc with amplitude A settles to A/2 regardless of
/// phase.
EnvelopeTrace demodulate(const EchoTrace& trace, double f_osc_hz, const FilterSpec& filter);

/// Mean envelope magnitude over [t_start, t_end].
double gate_average(const EnvelopeTrace& envelope, double t_start_s, double t_end_s);

struct TofResult {
    double tof_s = 0.0;
    std::size_t lag_samples = 0;
    double peak_to_threshold = 0.0;
};

/// Matched-filter time of flight: lag of the cross-correlation peak against
/// the excitation. Raises no_echo when the peak is below threshold_mads
/// robust deviations of the correlation floor.
TofResult detect_tof(const EchoTrace& trace, const EchoTrace& excitation,
                     double threshold_mads = 5.0);

} // namespace puc
