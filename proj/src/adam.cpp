#include "hiformer/adam.hpp"

#include <cmath>

#include "hiformer/error.hpp"

namespace hiformer::train {

void AdamConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be finite and >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("Adam eps must be > 0");
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& cfg) {
  if (params.size() != grads.size()) {
    throw ContractError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                        std::to_string(grads.size()) + " gradients");
  }
  if (state.step == 0 && state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ContractError("adam_step: optimizer state was built for " + std::to_string(state.m.size()) +
                        " parameters, got " + std::to_string(params.size()));
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

Adam::Adam(std::vector<ad::Tensor> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  cfg_.validate();
  for (const auto& p : params_) {
    if (!p.is_leaf()) throw ContractError("Adam can only update leaf tensors");
    size_ += p.numel();
  }
  flat_.resize(size_);
}

void Adam::step(std::span<const double> flat_grads) {
  if (flat_grads.size() != size_) {
    throw ContractError("Adam::step: expected " + std::to_string(size_) + " gradients, got " +
                        std::to_string(flat_grads.size()));
  }
  std::size_t off = 0;
  for (const auto& p : params_) {
    const auto d = p.data();
    std::copy(d.begin(), d.end(), flat_.begin() + static_cast<std::ptrdiff_t>(off));
    off += d.size();
  }
  adam_step(flat_, flat_grads, state_, cfg_);
  off = 0;
  for (auto& p : params_) {
    auto d = p.mutable_data();
    std::copy(flat_.begin() + static_cast<std::ptrdiff_t>(off),
              flat_.begin() + static_cast<std::ptrdiff_t>(off + d.size()), d.begin());
    off += d.size();
  }
}

}  // namespace hiformer::train
