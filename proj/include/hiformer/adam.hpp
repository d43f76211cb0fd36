#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hiformer/tensor.hpp"

namespace hiformer::train {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct AdamState {
  std::vector<double> m;  // first moments
  std::vector<double> v;  // second moments
  std::size_t step = 0;
};

/// One bias-corrected Adam update in place. The state is sized on first use;
/// a later size change or a params/grads mismatch is a ContractError.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& cfg);

/// Adam over a fixed list of leaf tensors, fed with a flat gradient vector
/// laid out in the same order.
class Adam {
 public:
  Adam(std::vector<ad::Tensor> params, AdamConfig cfg);

  std::size_t size() const { return size_; }
  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }
  std::size_t steps() const { return state_.step; }

  void step(std::span<const double> flat_grads);

 private:
  std::vector<ad::Tensor> params_;
  AdamConfig cfg_;
  AdamState state_;
  std::vector<double> flat_;
  std::size_t size_ = 0;
};

}  // namespace hiformer::train
