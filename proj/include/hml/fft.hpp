#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace hml {

/// In-place radix-2 FFT; size must be a power of two. inverse = true applies
/// the unnormalized inverse transform (divide by n yourself if needed).
void fft(std::vector<std::complex<double>>& a, bool inverse);

std::size_t next_pow2(std::size_t n);

/// Linear convolution of a and b via zero-padded FFT, length |a|+|b|-1.
std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace hml
