#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hiformer/model.hpp"
#include "hiformer/ops.hpp"
#include "hiformer/tensor.hpp"

namespace testing_support {

using hiformer::ad::Shape;
using hiformer::ad::Tensor;

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0,
                            bool requires_grad = true) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(hiformer::ad::shape_numel(shape));
  for (auto& x : v) x = u(rng);
  Tensor t(shape, std::move(v));
  t.set_requires_grad(requires_grad);
  return t;
}

struct GradCheck {
  double max_rel_error = 0.0;  // worst over inputs of |g_a - g_n| / max(|g_a|, |g_n|, floor), 2-norms
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

/// Central finite differences on the scalar sum(f(inputs) * R) for a fixed
/// random R, compared with reverse mode. The relative error of each input is
/// measured on the whole gradient vector.
inline GradCheck grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& f, std::vector<Tensor> inputs,
                            double step = 1e-6, std::uint64_t seed = 99, double floor = 1e-8) {
  std::mt19937_64 rng(seed);
  Tensor probe = f(inputs);
  const Tensor weights = random_tensor(probe.shape(), rng, -1.0, 1.0, false);
  auto objective = [&]() { return hiformer::ad::sum(hiformer::ad::mul(f(inputs), weights)); };

  for (auto& x : inputs) x.zero_grad();
  objective().backward();

  GradCheck out;
  for (auto& x : inputs) {
    if (!x.requires_grad()) continue;
    const auto analytic = x.grad();
    std::vector<double> numeric(analytic.size());
    {
      hiformer::ad::NoGradGuard guard;
      auto values = x.mutable_data();
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double keep = values[i];
        values[i] = keep + step;
        const double up = objective().item();
        values[i] = keep - step;
        const double down = objective().item();
        values[i] = keep;
        numeric[i] = (up - down) / (2.0 * step);
      }
    }
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
      na += analytic[i] * analytic[i];
      nn += numeric[i] * numeric[i];
      out.max_abs_error = std::max(out.max_abs_error, std::abs(analytic[i] - numeric[i]));
    }
    const double scale = std::max({std::sqrt(na), std::sqrt(nn), floor});
    out.max_rel_error = std::max(out.max_rel_error, std::sqrt(diff) / scale);
    out.checked += analytic.size();
  }
  return out;
}

/// N=4, P=24, Q=6, M=3, C=2, D=8, K=2, zeta=4, L=1.
inline hiformer::model::ModelConfig micro_model_config() {
  hiformer::model::ModelConfig c;
  c.N = 4;
  c.P = 24;
  c.Q = 6;
  c.M = 3;
  c.C = 2;
  c.D = 8;
  c.K = 2;
  c.zeta = 4;
  c.L = 1;
  c.ffn_hidden = 16;
  c.node_dims = 5;
  c.projection_layers = 1;
  return c;
}

inline hiformer::model::ModelInputs random_model_inputs(const hiformer::model::ModelConfig& c, std::mt19937_64& rng,
                                                        bool requires_grad = false) {
  return {random_tensor({c.P, c.N}, rng, -2, 2, requires_grad), random_tensor({c.P, c.N, c.C}, rng, -2, 2, requires_grad),
          random_tensor({c.P, c.N, c.M}, rng, -1, 1, requires_grad),
          random_tensor({c.N, c.node_dims}, rng, -1, 1, requires_grad)};
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("hiformer_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
