#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "core/acoustic.hpp"
#include "core/rng.hpp"

namespace puc {

/// Uniformly sampled real waveform.
struct EchoTrace {
    double sample_rate_hz = 0.0;
    double t0_s = 0.0;
    std::vector<double> samples;
    bool band_support_warning = false;

    void validate() const;
    double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
    double time_at(std::size_t i) const { return t0_s + static_cast<double>(i) / sample_rate_hz; }
};

/// Interrogator transducer response: Gaussian magnitude, linear phase.
/// fractional_bandwidth is the full -3 dB width over the center frequency.
struct BandSpec {
    double center_hz = 2.25e6;
    double fractional_bandwidth = 0.6;

    double magnitude_at(double f_hz) const;
};

struct NoiseSpec {
    std::optional<double> snr_db; // absent = noiseless
    std::uint64_t seed = 1;
};

enum class TargetKind { antenna, flat_reflector };

/// Everything one pulse-echo needs: the device stack and its electrical
/// load, the propagation medium and distance, the interrogator band, and
/// the noise/gain bookkeeping.
struct LinkScenario {
    PiezoStack stack;
    LoadNetwork load;
    Medium medium;
    double distance_m = 0.05;
    BandSpec band;
    NoiseSpec noise;
    double amplitude_scale = 1.0;
    TargetKind target = TargetKind::antenna;
    double flat_gamma = 0.9;    // reflection used by the flat-reflector target
    double trace_tail_s = 24e-6;

    void validate() const;
};

/// Rectangular-gated sinusoid over [0, duration] with an optional zero tail.
EchoTrace make_burst(double f_hz, double duration_s, double amplitude_v, double sample_rate_hz,
                     double tail_s = 0.0);

/// Number of carrier cycles in a gated burst.
int burst_cycles(double f_hz, double duration_s);

/// Linear chirp from f_start to f_end with continuous phase. Degenerates to
/// make_burst samples when f_start == f_end.
EchoTrace make_chirp(double f_start_hz, double f_end_hz, double duration_s, double amplitude_v,
                     double sample_rate_hz, double tail_s = 0.0);

/// Precomputed frequency-domain transfer of one scenario: band response
/// applied twice, reflection coefficient, two-way attenuation, propagation
/// delay, and the scenario amplitude scale. Reused across a sweep since none
/// of it depends on the excitation.
class EchoSynthesizer {
public:
    EchoSynthesizer(const LinkScenario& scenario, double sample_rate_hz,
                    std::size_t excitation_samples);

    /// Synthesizes the echo trace (t0 = 0, covers ToF + excitation + tail).
    /// noise_seed, when set, adds white Gaussian noise across the trace,
    /// sized from the unit-scale gated echo power (or sigma_override). The
    /// sweep pipeline passes apply_amplitude_scale = false and keeps the
    /// gain in spectrum metadata, which is what makes the valley estimate
    /// amplitude-independent bit for bit.
    EchoTrace synthesize(const EchoTrace& excitation,
                         std::optional<std::uint64_t> noise_seed = std::nullopt,
                         std::optional<double> sigma_override = std::nullopt,
                         bool apply_amplitude_scale = true) const;

    double tof_s() const { return tof_s_; }
    std::size_t nfft() const { return nfft_; }

    /// Zero-delay echo shape for matched-filter time-of-flight detection:
    /// the excitation through the full transfer with the propagation delay
    /// removed. Correlating the echo against this template cancels the
    /// antenna's own phase ringing, so the peak sits at the geometric delay.
    EchoTrace zero_delay_template(const EchoTrace& excitation) const;

    /// Noise standard deviation for a given echo trace at the scenario SNR,
    /// measured over the [tof, tof + excitation duration] gate.
    double gated_noise_sigma(const EchoTrace& echo, double excitation_duration_s) const;

private:
    const LinkScenario scenario_;
    double sample_rate_hz_;
    double tof_s_;
    std::size_t n_short_;
    std::size_t place_index_;
    std::size_t nfft_;
    std::vector<cplx> transfer_; // positive-frequency half, DC..Nyquist
};

/// One-call convenience wrapper around EchoSynthesizer.
EchoTrace synthesize_echo(const EchoTrace& excitation, const LinkScenario& scenario);

/// Adds white Gaussian noise sized against the gated signal power.
EchoTrace add_noise(const EchoTrace& trace, double snr_db, std::uint64_t seed);

/// Lag (in samples) of the cross-correlation peak between two sequences.
std::size_t correlation_peak_lag(const std::vector<double>& trace,
                                 const std::vector<double>& reference);

} // namespace puc
