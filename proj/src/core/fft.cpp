#include "core/fft.hpp"

#include <cmath>

namespace puc {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

} // namespace

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_inplace(std::vector<cplx>& data, bool inverse) {
    const std::size_t n = data.size();
    if (!is_pow2(n)) raise(Status::invalid_argument, "fft size must be a power of two");

    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = (inverse ? two_pi : -two_pi) / static_cast<double>(len);
        const cplx wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = data[i + k];
                const cplx v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }

    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& z : data) z *= scale;
    }
}

std::vector<cplx> fft(const std::vector<cplx>& data) {
    std::vector<cplx> out = data;
    fft_inplace(out, false);
    return out;
}

std::vector<cplx> ifft(const std::vector<cplx>& data) {
    std::vector<cplx> out = data;
    fft_inplace(out, true);
    return out;
}

std::vector<cplx> fft_real_padded(const std::vector<double>& x, std::size_t nfft) {
    if (nfft < x.size()) raise(Status::invalid_argument, "fft pad shorter than input");
    std::vector<cplx> buf(nfft, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < x.size(); ++i) buf[i] = cplx(x[i], 0.0);
    fft_inplace(buf, false);
    return buf;
}

std::vector<double> ifft_real(const std::vector<cplx>& spectrum, std::size_t n) {
    std::vector<cplx> buf = spectrum;
    fft_inplace(buf, true);
    if (n > buf.size()) raise(Status::invalid_argument, "requested more samples than fft size");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real();
    return out;
}

} // namespace puc
