#include "core/acoustic.hpp"

#include <algorithm>
#include <cmath>

namespace puc {

void Medium::validate() const {
    if (!(sound_speed_m_s > 0.0) || !(density_kg_m3 > 0.0) || attenuation_db_cm < 0.0 ||
        !(attenuation_ref_hz > 0.0))
        raise(Status::domain_error, "medium parameters must be positive");
}

Medium water_medium() { return Medium{}; }

Medium tissue_medium() {
    Medium m;
    m.attenuation_db_cm = 1.5;
    m.attenuation_ref_hz = 2.0e6;
    m.attenuation_exponent = 1.0;
    return m;
}

cplx reflection_coefficient(const PiezoStack& stack, const LoadNetwork& load, double f_hz) {
    const cplx z_face = leach_face_impedance(stack, load, f_hz);
    const double z_med = stack.front.characteristic_impedance();
    return (z_face - z_med) / (z_face + z_med);
}

ReflectionSpectrum reflection_spectrum(const PiezoStack& stack, const LoadNetwork& load,
                                       const std::vector<double>& freqs_hz) {
    ReflectionSpectrum out;
    out.freqs_hz = freqs_hz;
    out.gamma.reserve(freqs_hz.size());
    for (double f : freqs_hz) out.gamma.push_back(reflection_coefficient(stack, load, f));
    return out;
}

double attenuation_factor(const Medium& medium, double f_hz, double path_m) {
    if (path_m < 0.0) raise(Status::domain_error, "attenuation path must be >= 0");
    const double alpha_db_cm =
        medium.attenuation_db_cm *
        std::pow(f_hz / medium.attenuation_ref_hz, medium.attenuation_exponent);
    return std::pow(10.0, -alpha_db_cm * (path_m * 100.0) / 20.0);
}

double time_of_flight(double distance_m, const Medium& medium) {
    if (!(distance_m > 0.0)) raise(Status::domain_error, "distance must be > 0");
    return 2.0 * distance_m / medium.sound_speed_m_s;
}

PistonField piston_field(const PistonFieldRequest& request, const Medium& medium) {
    if (!(request.depth_m > 0.0) || !(request.aperture_x_m > 0.0) || !(request.aperture_y_m > 0.0))
        raise(Status::domain_error, "piston field needs positive depth and aperture");
    if (request.grid_points < 3)
        raise(Status::domain_error, "piston field grid needs at least three points per axis");

    const double lambda = medium.sound_speed_m_s / request.frequency_hz;
    const double elem = request.element_fraction * lambda;
    if (elem > lambda / 4.0)
        raise(Status::domain_error,
              "quadrature element larger than lambda/4; refine element_fraction");

    const auto n_ex = static_cast<std::size_t>(std::ceil(request.aperture_x_m / elem));
    const auto n_ey = static_cast<std::size_t>(std::ceil(request.aperture_y_m / elem));
    const double dx = request.aperture_x_m / static_cast<double>(n_ex);
    const double dy = request.aperture_y_m / static_cast<double>(n_ey);
    const double k = two_pi / lambda;

    // Element center coordinates, symmetric about the aperture axes.
    std::vector<double> ex(n_ex), ey(n_ey);
    for (std::size_t i = 0; i < n_ex; ++i)
        ex[i] = -0.5 * request.aperture_x_m + (static_cast<double>(i) + 0.5) * dx;
    for (std::size_t j = 0; j < n_ey; ++j)
        ey[j] = -0.5 * request.aperture_y_m + (static_cast<double>(j) + 0.5) * dy;

    PistonField field;
    field.xs_m = linspace(-request.half_extent_m, request.half_extent_m, request.grid_points);
    field.ys_m = field.xs_m;
    field.pressure_norm.resize(request.grid_points * request.grid_points);

    const double z2 = request.depth_m * request.depth_m;
    double peak = 0.0;
    for (std::size_t iy = 0; iy < request.grid_points; ++iy) {
        for (std::size_t ix = 0; ix < request.grid_points; ++ix) {
            const double x = field.xs_m[ix];
            const double y = field.ys_m[iy];
            double re = 0.0, im = 0.0;
            for (double sy : ey) {
                const double ry = y - sy;
                for (double sx : ex) {
                    const double rx = x - sx;
                    const double r = std::sqrt(rx * rx + ry * ry + z2);
                    const double phase = -k * r;
                    re += std::cos(phase) / r;
                    im += std::sin(phase) / r;
                }
            }
            const double mag = std::hypot(re, im) * dx * dy;
            field.pressure_norm[iy * request.grid_points + ix] = mag;
            peak = std::max(peak, mag);
        }
    }
    if (!(peak > 0.0)) raise(Status::internal_error, "piston field has zero peak");
    for (double& v : field.pressure_norm) v /= peak;
    return field;
}

double beam_minus3db_width(const std::vector<double>& positions_m,
                           const std::vector<double>& profile) {
    if (positions_m.size() != profile.size() || profile.size() < 3)
        raise(Status::domain_error, "beam profile needs matching positions and >= 3 samples");

    const auto it_max = std::max_element(profile.begin(), profile.end());
    const auto idx = static_cast<std::size_t>(std::distance(profile.begin(), it_max));
    if (idx == 0 || idx == profile.size() - 1)
        raise(Status::boundary_error, "beam profile maximum at grid edge");

    const double level = *it_max / std::numbers::sqrt2; // intensity -3 dB

    auto interp = [&](std::size_t lo, std::size_t hi) {
        const double t = (level - profile[lo]) / (profile[hi] - profile[lo]);
        return positions_m[lo] + t * (positions_m[hi] - positions_m[lo]);
    };

    // Walk outward from the maximum to the first crossing on each side.
    double left = 0.0;
    bool found_left = false;
    for (std::size_t i = idx; i-- > 0;) {
        if (profile[i] <= level) {
            left = interp(i, i + 1);
            found_left = true;
            break;
        }
    }
    double right = 0.0;
    bool found_right = false;
    for (std::size_t i = idx + 1; i < profile.size(); ++i) {
        if (profile[i] <= level) {
            right = interp(i, i - 1);
            found_right = true;
            break;
        }
    }
    if (!found_left || !found_right)
        raise(Status::boundary_error, "half-power crossing outside profile grid");
    return right - left;
}

} // namespace puc
