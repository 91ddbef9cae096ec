#include "bpl/fft.hpp"

#include <cmath>
#include <numbers>

namespace bpl {

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    if (n < 2) return;

    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }

    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& z : a) z *= inv;
    }
}

static size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

std::vector<double> autocorrelate(const std::vector<double>& x) {
    const size_t n = x.size();
    const size_t m = next_pow2(2 * n);
    std::vector<std::complex<double>> buf(m, {0.0, 0.0});
    for (size_t i = 0; i < n; ++i) buf[i] = x[i];
    fft_pow2(buf);
    for (auto& z : buf) z = z * std::conj(z);
    fft_pow2(buf, true);
    std::vector<double> out(n);
    for (size_t j = 0; j < n; ++j) out[j] = buf[j].real();
    return out;
}

std::vector<double> convolve_trunc(const std::vector<double>& x,
                                   const std::vector<double>& k) {
    const size_t n = x.size();
    const size_t m = next_pow2(n + k.size());
    std::vector<std::complex<double>> fx(m, {0.0, 0.0}), fk(m, {0.0, 0.0});
    for (size_t i = 0; i < n; ++i) fx[i] = x[i];
    for (size_t i = 0; i < k.size(); ++i) fk[i] = k[i];
    fft_pow2(fx);
    fft_pow2(fk);
    for (size_t i = 0; i < m; ++i) fx[i] *= fk[i];
    fft_pow2(fx, true);
    std::vector<double> out(n);
    for (size_t j = 0; j < n; ++j) out[j] = fx[j].real();
    return out;
}

}  // namespace bpl
