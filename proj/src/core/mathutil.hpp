#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "core/errors.hpp"

namespace puc {

using cplx = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline double db_from_amplitude(double ratio) { return 20.0 * std::log10(ratio); }
inline double amplitude_from_db(double db) { return std::pow(10.0, db / 20.0); }

inline bool finite(const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Vertex offset of the parabola through (-1,a), (0,b), (+1,c), in bin units.
/// Requires a genuine extremum at the center sample (denominator != 0).
inline double parabolic_vertex_offset(double a, double b, double c) {
    const double denom = a - 2.0 * b + c;
    if (denom == 0.0) return 0.0;
    return 0.5 * (a - c) / denom;
}

/// FNV-1a on raw bytes; used for config hashes and RNG substream derivation.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Arithmetic mean.
inline double mean(std::span<const double> xs) {
    if (xs.empty()) raise(Status::domain_error, "mean of empty range");
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

inline double rms(std::span<const double> xs) {
    if (xs.empty()) raise(Status::domain_error, "rms of empty range");
    double acc = 0.0;
    for (double x : xs) acc += x * x;
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

/// Sample standard deviation (n-1 normalization).
inline double stddev(std::span<const double> xs) {
    if (xs.size() < 2) raise(Status::domain_error, "stddev needs at least two samples");
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Minimizes a smooth single-valley function over [lo, hi] by golden-section
/// search; tol is an absolute interval width.
double golden_minimize(double lo, double hi, double tol, const std::function<double(double)>& f);

} // namespace puc
