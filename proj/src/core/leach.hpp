#pragma once

#include "core/bvd.hpp"
#include "core/mathutil.hpp"

namespace puc {

/// One acoustic layer treated as a lossy transmission line. Attenuation is
/// Np/m at ref_freq with a power-law frequency dependence; a floor of
/// 1e-3 Np/m is always applied so line poles stay finite.
struct AcousticLayer {
    double thickness_m = 0.0;
    double density_kg_m3 = 0.0;
    double sound_speed_m_s = 0.0;
    double attenuation_np_m = 0.0;
    double attenuation_ref_hz = 2.0e6;
    double attenuation_exponent = 1.0;
    double area_m2 = 0.0;

    void validate() const;

    /// rho * v * area, the force/velocity impedance of the layer.
    double characteristic_impedance() const;

    double attenuation_at(double f_hz) const;

    /// alpha + j*beta at frequency f (loss floor applied).
    cplx propagation_constant(double f_hz) const;

    /// Impedance seen at the input of the layer terminated by z_term.
    cplx input_impedance(double f_hz, cplx z_term) const;
};

/// Thickness-mode piezo plate between an air backing and a semi-infinite
/// front medium. Backing and front are matched half-spaces; only the piezo
/// line's standing wave shapes the spectrum.
struct PiezoStack {
    AcousticLayer backing;
    AcousticLayer piezo;
    double kt = 0.0;             // thickness coupling, 0 < kt < 1
    double eps_clamped_f_m = 0.0;
    AcousticLayer front;         // semi-infinite; thickness ignored

    void validate() const;

    /// eps * area / thickness of the piezo plate.
    double clamped_capacitance_f() const;

    /// Half-wave frequency v/(2t) of the piezo plate.
    double half_wave_hz() const;
};

/// Electrical input impedance of the acoustically loaded plate in parallel
/// with the electrical load network.
cplx leach_input_impedance(const PiezoStack& stack, const LoadNetwork& load, double f_hz);

ImpedanceSpectrum leach_impedance_spectrum(const PiezoStack& stack, const LoadNetwork& load,
                                           const std::vector<double>& freqs_hz);

/// Acoustic impedance looking into the plate from the front medium, with the
/// electrical port terminated by the load network.
cplx leach_face_impedance(const PiezoStack& stack, const LoadNetwork& load, double f_hz);

} // namespace puc
