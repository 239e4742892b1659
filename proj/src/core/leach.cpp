#include "core/leach.hpp"

#include <cmath>

namespace puc {

namespace {

constexpr double loss_floor_np_m = 1e-3;

// Mason three-port line elements: z11 = Zc*coth(gamma*t), z12 = Zc/sinh(gamma*t).
struct LineElements {
    cplx za;
    cplx zb;
};

LineElements piezo_line_elements(const AcousticLayer& layer, double f_hz) {
    const cplx gl = layer.propagation_constant(f_hz) * layer.thickness_m;
    const double zc = layer.characteristic_impedance();
    const cplx sh = std::sinh(gl);
    const cplx ch = std::cosh(gl);
    return {zc * ch / sh, zc / sh};
}

} // namespace

void AcousticLayer::validate() const {
    if (!(thickness_m > 0.0) || !(density_kg_m3 > 0.0) || !(sound_speed_m_s > 0.0) ||
        !(area_m2 > 0.0) || attenuation_np_m < 0.0 || !(attenuation_ref_hz > 0.0))
        raise(Status::domain_error, "acoustic layer parameters must be positive");
}

double AcousticLayer::characteristic_impedance() const {
    return density_kg_m3 * sound_speed_m_s * area_m2;
}

double AcousticLayer::attenuation_at(double f_hz) const {
    const double alpha =
        attenuation_np_m * std::pow(f_hz / attenuation_ref_hz, attenuation_exponent);
    return std::max(alpha, loss_floor_np_m);
}

cplx AcousticLayer::propagation_constant(double f_hz) const {
    return {attenuation_at(f_hz), two_pi * f_hz / sound_speed_m_s};
}

cplx AcousticLayer::input_impedance(double f_hz, cplx z_term) const {
    const double zc = characteristic_impedance();
    const cplx th = std::tanh(propagation_constant(f_hz) * thickness_m);
    return zc * (z_term + zc * th) / (zc + z_term * th);
}

void PiezoStack::validate() const {
    backing.validate();
    piezo.validate();
    front.validate();
    if (!(kt > 0.0) || !(kt < 1.0)) raise(Status::domain_error, "kt must lie in (0, 1)");
    if (!(eps_clamped_f_m > 0.0)) raise(Status::domain_error, "clamped permittivity must be > 0");
}

double PiezoStack::clamped_capacitance_f() const {
    return eps_clamped_f_m * piezo.area_m2 / piezo.thickness_m;
}

double PiezoStack::half_wave_hz() const {
    return piezo.sound_speed_m_s / (2.0 * piezo.thickness_m);
}

cplx leach_input_impedance(const PiezoStack& stack, const LoadNetwork& load, double f_hz) {
    if (!(f_hz > 0.0) || !std::isfinite(f_hz))
        raise(Status::domain_error, "frequency must be finite and positive");

    const double w = two_pi * f_hz;
    const double c0 = stack.clamped_capacitance_f();
    const cplx z_c0(0.0, -1.0 / (w * c0));

    // Backing line terminated into its own half-space; front is semi-infinite.
    const double z_back_hs = stack.backing.characteristic_impedance();
    const cplx z_b = stack.backing.input_impedance(f_hz, cplx(z_back_hs, 0.0));
    const cplx z_f(stack.front.characteristic_impedance(), 0.0);

    const LineElements line = piezo_line_elements(stack.piezo, f_hz);

    // h^2 = kt^2 * (rho v^2) / eps  with the stiffened constants.
    const double c_d = stack.piezo.density_kg_m3 * stack.piezo.sound_speed_m_s *
                       stack.piezo.sound_speed_m_s;
    const double h2 = stack.kt * stack.kt * c_d / stack.eps_clamped_f_m;

    const cplx det = (line.za + z_b) * (line.za + z_f) - line.zb * line.zb;
    const cplx z_plate =
        z_c0 + (h2 / (w * w)) * (2.0 * (line.za - line.zb) + z_b + z_f) / det;

    const cplx y_total = 1.0 / z_plate + load.admittance(f_hz);
    const cplx z = 1.0 / y_total;
    if (!finite(z))
        raise(Status::internal_error, "leach impedance is non-finite despite loss floor");
    return z;
}

ImpedanceSpectrum leach_impedance_spectrum(const PiezoStack& stack, const LoadNetwork& load,
                                           const std::vector<double>& freqs_hz) {
    ImpedanceSpectrum out;
    out.freqs_hz = freqs_hz;
    out.values_ohm.reserve(freqs_hz.size());
    for (double f : freqs_hz) out.values_ohm.push_back(leach_input_impedance(stack, load, f));
    out.validate();
    return out;
}

cplx leach_face_impedance(const PiezoStack& stack, const LoadNetwork& load, double f_hz) {
    if (!(f_hz > 0.0) || !std::isfinite(f_hz))
        raise(Status::domain_error, "frequency must be finite and positive");

    const double w = two_pi * f_hz;
    const double c0 = stack.clamped_capacitance_f();
    const cplx z_c0(0.0, -1.0 / (w * c0));

    const double z_back_hs = stack.backing.characteristic_impedance();
    const cplx z_b = stack.backing.input_impedance(f_hz, cplx(z_back_hs, 0.0));

    const LineElements line = piezo_line_elements(stack.piezo, f_hz);

    const double c_d = stack.piezo.density_kg_m3 * stack.piezo.sound_speed_m_s *
                       stack.piezo.sound_speed_m_s;
    const double h2 = stack.kt * stack.kt * c_d / stack.eps_clamped_f_m;

    // Electrical termination reflected into the acoustic network. An open
    // port (zero admittance) leaves the plate in its stiffened state.
    const cplx y_load = load.admittance(f_hz);
    const cplx z_elec = (y_load == cplx(0.0, 0.0)) ? cplx(0.0, 0.0)
                                                   : cplx(1.0) / y_load;
    cplx kappa(0.0, 0.0);
    if (y_load != cplx(0.0, 0.0)) {
        kappa = (h2 / (w * w)) / (z_elec + z_c0);
    }

    const cplx z_face =
        (line.za + kappa) - (line.zb + kappa) * (line.zb + kappa) / (line.za + z_b + kappa);
    if (!finite(z_face))
        raise(Status::internal_error, "face impedance is non-finite despite loss floor");
    return z_face;
}

} // namespace puc
