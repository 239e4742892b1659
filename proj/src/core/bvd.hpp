#pragma once

#include <optional>
#include <vector>

#include "core/mathutil.hpp"

namespace puc {

/// Four-element Butterworth-van Dyke circuit of the loaded resonator:
/// shunt capacitance c0 with a series r1-l1-c1 motional branch.
struct BvdParams {
    double c0_f = 0.0;
    double r1_ohm = 0.0;
    double l1_h = 0.0;
    double c1_f = 0.0;

    void validate() const;

    /// Series (motional) resonance 1/(2*pi*sqrt(l1*c1)).
    double series_resonance_hz() const;
};

/// Electrical termination on the sensor side: parallel capacitance and
/// optional parallel resistance, with an optional series parasitic
/// capacitance between the resonator and the load.
struct LoadNetwork {
    double c_load_f = 0.0;
    std::optional<double> r_load_ohm;   // absent = open
    std::optional<double> c_series_f;   // absent = ideal short

    void validate() const;

    /// Capacitance the resonator effectively sees: series combination of
    /// c_series and c_load when the parasitic is present.
    double effective_capacitance_f() const;

    /// Complex admittance of the full termination at frequency f.
    cplx admittance(double f_hz) const;
};

struct ImpedanceSpectrum {
    std::vector<double> freqs_hz;
    std::vector<cplx> values_ohm;

    void validate() const;
};

/// Impedance of [r1-l1-c1] || c0 || load at one frequency.
cplx bvd_impedance(const BvdParams& params, const LoadNetwork& load, double f_hz);

ImpedanceSpectrum bvd_impedance_spectrum(const BvdParams& params, const LoadNetwork& load,
                                         const std::vector<double>& freqs_hz);

/// Lossless closed-form anti-resonance f_s*sqrt(1 + c1/(c0 + c_eff)).
/// r1 and r_load are ignored by construction.
double bvd_antiresonance(const BvdParams& params, const LoadNetwork& load);

/// d f_a / d c_load at the given load, analytic (lossless closed form).
double bvd_antiresonance_slope(const BvdParams& params, const LoadNetwork& load);

/// Frequency of max |Z|, grid argmax refined by parabolic interpolation of
/// log|Z|. Errors if the maximum sits on the grid boundary.
double find_antiresonance_numeric(const ImpedanceSpectrum& spectrum);

/// Same refinement for the |Z| minimum (series resonance).
double find_resonance_numeric(const ImpedanceSpectrum& spectrum);

/// Measured anchors the paper provides for the loaded resonator. Slopes are
/// magnitudes (Hz per farad of load capacitance).
struct BvdAnchors {
    double f_s_hz = 0.0;
    double f_a0_hz = 0.0;
    double slope0_hz_per_f = 0.0;
    std::optional<double> shift_total_hz;     // over [0, shift_span_f]
    double shift_span_f = 0.0;
    std::optional<double> slope_end_hz_per_f; // at c_load = shift_span_f
    double quality_factor = 30.0;
    bool use_series_parasitic = true;
};

struct BvdFit {
    BvdParams params;
    LoadNetwork load;               // carries the fitted c_series (if enabled)
    double slope0_rel_error = 0.0;  // relative residuals against the anchors
    double shift_rel_error = 0.0;
    double slope_end_rel_error = 0.0;
};

/// Solves the circuit from the anchors: (f_s, f_a0, slope0) pin the
/// exactly-determined three-element relations; when the saturation anchors
/// are present, c0 and the series parasitic are refined by least squares
/// with residuals weighted by the contract tolerances (10% slope0,
/// 15% total shift, 25% end slope). r1 = 2*pi*f_s*l1 / Q.
BvdFit fit_bvd_from_anchors(const BvdAnchors& anchors);

} // namespace puc
