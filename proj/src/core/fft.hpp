#pragma once

#include <cstddef>
#include <vector>

#include "core/mathutil.hpp"

namespace puc {

/// In-place iterative radix-2 FFT. Size must be a power of two. The
/// hand-rolled kernel keeps spectra bit-deterministic across runs and
/// threads, which the sweep pipeline relies on.
void fft_inplace(std::vector<cplx>& data, bool inverse);

std::vector<cplx> fft(const std::vector<cplx>& data);
std::vector<cplx> ifft(const std::vector<cplx>& data);

/// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

/// Forward FFT of a real sequence zero-padded to nfft (power of two).
std::vector<cplx> fft_real_padded(const std::vector<double>& x, std::size_t nfft);

/// Inverse FFT keeping the real part of the first n samples.
std::vector<double> ifft_real(const std::vector<cplx>& spectrum, std::size_t n);

} // namespace puc
