#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "hiformer/tensor.hpp"

namespace hiformer::ad {

using Rng = std::mt19937_64;

// Linear algebra.
Tensor matmul(const Tensor& a, const Tensor& b);
/// x[..., in] · weight[in, out] + bias[out]; bias may be undefined.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

// Elementwise with NumPy-style broadcasting (shapes aligned from the right).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
/// scale * x + shift
Tensor affine(const Tensor& x, double scale, double shift = 0.0);

/// rho * a + (1 - rho) * b for equal-shaped operands. Computed as
/// b + rho * (a - b) and kept inside [min(a,b), max(a,b)] so equal operands
/// reproduce exactly.
Tensor convex_mix(const Tensor& rho, const Tensor& a, const Tensor& b);

// Activations.
/// Exact GELU, x * Phi(x) with the Gaussian CDF written through erf.
Tensor gelu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor softmax(const Tensor& x, std::size_t axis);

inline constexpr double kLayerNormEps = 1e-5;
/// Normalizes every slice along `axis` to zero mean and unit (population)
/// variance, then applies gain/bias of extent shape[axis]. Either affine
/// tensor may be undefined, meaning gain 1 / bias 0.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, std::size_t axis,
                  double eps = kLayerNormEps);

/// Inverted dropout: zeroes with probability `rate`, scales survivors by
/// 1/(1-rate). Identity when !training or rate == 0.
Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng);

// Reductions.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// Sums out `axis`, removing it from the shape (a rank-1 input gives shape {1}).
Tensor sum_axis(const Tensor& x, std::size_t axis);

// Layout.
Tensor reshape(const Tensor& x, Shape shape);
Tensor transpose(const Tensor& x);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length);

// Losses.
Tensor mse_loss(const Tensor& prediction, const Tensor& target);
Tensor mae_loss(const Tensor& prediction, const Tensor& target);

}  // namespace hiformer::ad
