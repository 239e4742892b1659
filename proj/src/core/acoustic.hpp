#pragma once

#include <vector>

#include "core/leach.hpp"
#include "core/mathutil.hpp"

namespace puc {

/// Propagation medium between interrogator and antenna.
struct Medium {
    double sound_speed_m_s = 1480.0;
    double density_kg_m3 = 1000.0;
    double attenuation_db_cm = 0.002;
    double attenuation_ref_hz = 2.0e6;
    double attenuation_exponent = 1.0;

    void validate() const;

    double specific_impedance() const { return density_kg_m3 * sound_speed_m_s; }
};

Medium water_medium();
Medium tissue_medium();   // 1.5 dB/cm at 2 MHz, exponent 1

struct ReflectionSpectrum {
    std::vector<double> freqs_hz;
    std::vector<cplx> gamma;
};

/// Pressure reflection coefficient at the antenna front face,
/// (Z_face - Z_medium) / (Z_face + Z_medium).
cplx reflection_coefficient(const PiezoStack& stack, const LoadNetwork& load, double f_hz);

ReflectionSpectrum reflection_spectrum(const PiezoStack& stack, const LoadNetwork& load,
                                       const std::vector<double>& freqs_hz);

/// One-way amplitude factor 10^(-alpha(f)*path_cm/20) with the power-law
/// frequency scaling. path is one-way in meters.
double attenuation_factor(const Medium& medium, double f_hz, double path_m);

/// Round-trip 2*d/c.
double time_of_flight(double distance_m, const Medium& medium);

struct PistonFieldRequest {
    double aperture_x_m = 5e-3;
    double aperture_y_m = 7e-3;
    double depth_m = 0.03;
    double frequency_hz = 2.02e6;
    double half_extent_m = 0.012;    // lateral half width of the output grid
    std::size_t grid_points = 25;    // per axis
    double element_fraction = 0.125; // quadrature element size as a fraction of lambda
};

struct PistonField {
    std::vector<double> xs_m;
    std::vector<double> ys_m;
    std::vector<double> pressure_norm; // row-major [iy * nx + ix], max = 1
};

/// Rayleigh integral of a uniformly vibrating rectangular aperture evaluated
/// on a lateral grid at fixed depth, normalized to the grid maximum.
PistonField piston_field(const PistonFieldRequest& request, const Medium& medium);

/// Width between the two half-power (intensity -3 dB, amplitude 1/sqrt(2))
/// crossings around the profile maximum, linearly interpolated.
double beam_minus3db_width(const std::vector<double>& positions_m,
                           const std::vector<double>& profile);

} // namespace puc
