#pragma once

#include <complex>
#include <vector>

namespace bpl {

// In-place iterative radix-2 transform. n must be a power of two.
// inverse=true applies the conjugate transform and the 1/n factor.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse = false);

// Linear autocorrelation of a real sequence by zero-padded FFT:
// out[j] = sum_i x[i]*x[i+j], j = 0..n-1.
std::vector<double> autocorrelate(const std::vector<double>& x);

// Linear convolution, truncated to the length of x:
// out[j] = sum_i x[i]*k[j-i] over valid i (k indexed from 0).
std::vector<double> convolve_trunc(const std::vector<double>& x,
                                   const std::vector<double>& k);

}  // namespace bpl
