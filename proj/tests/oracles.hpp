#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "hiformer/model.hpp"
#include "hiformer/ops.hpp"
#include "support.hpp"

namespace testing_support {

using hiformer::ad::Shape;
using hiformer::ad::Tensor;
namespace ad = hiformer::ad;
namespace model = hiformer::model;

inline double gelu_ref(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }
inline double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline void fill(Tensor& t, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& v : t.mutable_data()) v = u(rng);
}

inline void set_all(Tensor& t, double v) { std::ranges::fill(t.mutable_data(), v); }

// Row-wise layer norm over the last axis of an [R x D] matrix stored flat.
inline std::vector<double> layer_norm_ref(const std::vector<double>& x, std::size_t D, const Tensor& gain, const Tensor& bias) {
  std::vector<double> y(x.size());
  for (std::size_t r = 0; r < x.size() / D; ++r) {
    double m = 0, v = 0;
    for (std::size_t d = 0; d < D; ++d) m += x[r * D + d] / D;
    for (std::size_t d = 0; d < D; ++d) v += (x[r * D + d] - m) * (x[r * D + d] - m) / D;
    for (std::size_t d = 0; d < D; ++d)
      y[r * D + d] = (x[r * D + d] - m) / std::sqrt(v + ad::kLayerNormEps) * gain.data()[d] + bias.data()[d];
  }
  return y;
}

// Dense multi-head attention with explicit loops.
inline std::vector<double> attention_ref(const Tensor& H, const Tensor& ctx, const model::AttentionParams& p, std::size_t K) {
  const std::size_t N = H.dim(0), D = H.dim(1), z = D / K;
  auto proj = [&](const model::Linear& l, bool joint, std::size_t i, std::size_t d) {
    double s = l.bias.at({d});
    for (std::size_t j = 0; j < D; ++j) s += H.at({i, j}) * l.weight.at({j, d});
    if (joint)
      for (std::size_t j = 0; j < D; ++j) s += ctx.at({i, j}) * l.weight.at({D + j, d});
    return gelu_ref(s);
  };
  std::vector<double> q(N * D), k(N * D), v(N * D), out(N * D, 0.0);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t d = 0; d < D; ++d) {
      q[i * D + d] = proj(p.query, true, i, d);
      k[i * D + d] = proj(p.key, true, i, d);
      v[i * D + d] = proj(p.value, false, i, d);
    }
  for (std::size_t h = 0; h < K; ++h)
    for (std::size_t i = 0; i < N; ++i) {
      std::vector<double> s(N);
      for (std::size_t j = 0; j < N; ++j) {
        double acc = 0;
        for (std::size_t d = h * z; d < (h + 1) * z; ++d) acc += q[i * D + d] * k[j * D + d];
        s[j] = acc / std::sqrt(double(z));
      }
      const double mx = *std::max_element(s.begin(), s.end());
      double tot = 0;
      for (auto& x : s) tot += (x = std::exp(x - mx));
      for (std::size_t j = 0; j < N; ++j)
        for (std::size_t d = h * z; d < (h + 1) * z; ++d) out[i * D + d] += s[j] / tot * v[j * D + d];
    }
  return out;
}

inline model::AttentionParams random_attention(std::size_t D, std::size_t S, std::mt19937_64& rng) {
  return {{random_tensor({2 * D, D}, rng), random_tensor({D}, rng)},
          {random_tensor({2 * D, D}, rng), random_tensor({D}, rng)},
          {random_tensor({D, D}, rng), random_tensor({D}, rng)},
          random_tensor({S}, rng)};
}

inline model::GateParams random_gate(std::size_t N, std::size_t D, std::mt19937_64& rng) {
  return {random_tensor({D, D}, rng), random_tensor({D, D}, rng), random_tensor({N, D}, rng)};
}

struct PrimitiveCase {
  const char* name;
  std::vector<Shape> shapes;
  std::function<Tensor(const std::vector<Tensor>&)> fn;
};

/// Every differentiable primitive with small random-input shapes.
inline std::vector<PrimitiveCase> primitive_cases() {
  return {
      {"matmul", {{3, 4}, {4, 2}}, [](const auto& v) { return ad::matmul(v[0], v[1]); }},
      {"linear", {{2, 3, 4}, {4, 5}, {5}}, [](const auto& v) { return ad::linear(v[0], v[1], v[2]); }},
      {"add_broadcast", {{3, 1, 4}, {2, 4}}, [](const auto& v) { return ad::add(v[0], v[1]); }},
      {"sub_broadcast", {{3, 4}, {4}}, [](const auto& v) { return ad::sub(v[0], v[1]); }},
      {"mul_broadcast", {{2, 3}, {2, 1}}, [](const auto& v) { return ad::mul(v[0], v[1]); }},
      {"affine", {{5}}, [](const auto& v) { return ad::affine(v[0], -2.5, 0.3); }},
      {"convex_mix", {{6}, {6}, {6}},
       [](const auto& v) { return ad::convex_mix(ad::sigmoid(v[0]), v[1], v[2]); }},
      {"gelu", {{3, 3}}, [](const auto& v) { return ad::gelu(v[0]); }},
      {"sigmoid", {{3, 3}}, [](const auto& v) { return ad::sigmoid(v[0]); }},
      {"abs", {{7}}, [](const auto& v) { return ad::abs(v[0]); }},
      {"softmax", {{2, 5}}, [](const auto& v) { return ad::softmax(v[0], 1); }},
      {"layer_norm", {{3, 6}, {6}, {6}},
       [](const auto& v) { return ad::layer_norm(v[0], v[1], v[2], 1); }},
      {"sum", {{2, 3}}, [](const auto& v) { return ad::sum(v[0]); }},
      {"mean", {{2, 3}}, [](const auto& v) { return ad::mean(v[0]); }},
      {"sum_axis", {{2, 3, 4}}, [](const auto& v) { return ad::sum_axis(v[0], 1); }},
      {"reshape", {{2, 6}}, [](const auto& v) { return ad::reshape(v[0], {3, 4}); }},
      {"transpose", {{2, 5}}, [](const auto& v) { return ad::transpose(v[0]); }},
      {"permute", {{2, 3, 4}}, [](const auto& v) { return ad::permute(v[0], {1, 2, 0}); }},
      {"concat", {{2, 3}, {2, 2}}, [](const auto& v) { return ad::concat({v[0], v[1]}, 1); }},
      {"slice", {{4, 5}}, [](const auto& v) { return ad::slice(v[0], 1, 1, 3); }},
      {"mse_loss", {{3, 2}, {3, 2}}, [](const auto& v) { return ad::mse_loss(v[0], v[1]); }},
      {"mae_loss", {{3, 2}, {3, 2}}, [](const auto& v) { return ad::mae_loss(v[0], v[1]); }},
      {"dropout", {{40}},
       [](const auto& v) {
         ad::Rng gen(5);  // same mask on every evaluation
         return ad::dropout(v[0], 0.25, true, gen);
       }}};
}

}  // namespace testing_support
