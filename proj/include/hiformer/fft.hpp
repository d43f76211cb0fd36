#pragma once

#include <complex>
#include <span>
#include <vector>

namespace hiformer::fft {

using Complex = std::complex<double>;

/// Unnormalized forward DFT, X[k] = sum_t x[t] exp(-2*pi*i*k*t/n).
std::vector<Complex> forward(std::span<const Complex> x);
std::vector<Complex> forward(std::span<const double> x);
/// Inverse DFT including the 1/n factor.
std::vector<Complex> inverse(std::span<const Complex> spectrum);

}  // namespace hiformer::fft
