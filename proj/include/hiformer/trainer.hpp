#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hiformer/model.hpp"
#include "hiformer/vmd.hpp"
#include "hiformer/windows.hpp"

namespace hiformer::train {

enum class LossKind { mse, mae };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  std::optional<double> grad_clip;  // global L2 max-norm
  std::optional<std::size_t> early_stop_patience;
  LossKind loss = LossKind::mse;
  unsigned threads = 1;  // batch workers; results do not depend on this

  void validate() const;
};

/// Model-ready windows of one split: Z-scored history, IMFs of the history
/// and Z-scored targets.
struct PreparedSplit {
  std::vector<model::ModelInputs> inputs;
  std::vector<ad::Tensor> targets;  // [Q x N]
  std::vector<std::size_t> starts;  // first history row of each window

  std::size_t size() const { return inputs.size(); }
};

struct ExperimentData {
  PreparedSplit train, val, test;

  const PreparedSplit& split(data::Split s) const;

  /// Decomposes every history window of every turbine into IMFs with `vmd_cfg`
  /// and attaches the shared node embedding [N x node_dims].
  static ExperimentData prepare(const data::WindowedDataset& ds, const vmd::VmdConfig& vmd_cfg,
                                const ad::Tensor& node_embedding, unsigned threads = 1);
  static PreparedSplit prepare_split(const data::WindowedDataset& ds, data::Split split,
                                     const vmd::VmdConfig& vmd_cfg, const ad::Tensor& node_embedding,
                                     unsigned threads = 1);
};

struct MetricsReport {
  double mae = 0.0;
  double mse = 0.0;
  std::vector<double> mae_per_horizon, mse_per_horizon;  // [horizon]
  std::vector<double> mae_per_turbine, mse_per_turbine;  // [N]
  std::size_t windows = 0;
  std::size_t horizon = 0;
};

/// Accumulates errors of [Q x N] forecasts over the first `horizon` steps.
class MetricsAccumulator {
 public:
  MetricsAccumulator(std::size_t horizon, std::size_t turbines);
  void add(std::span<const double> prediction, std::span<const double> target);
  /// Throws DataError when nothing was added.
  MetricsReport report() const;

 private:
  std::size_t horizon_, turbines_, windows_ = 0;
  std::vector<double> abs_, sq_;  // [horizon x N] sums
};

/// X^ [Q x N] for every window, without gradients.
std::vector<ad::Tensor> predict(const model::HiformerParams& params, const model::ModelConfig& cfg,
                                const PreparedSplit& split, unsigned threads = 1);

/// Metrics over the first `horizon` steps (0 means all Q). Empty split is a DataError.
MetricsReport evaluate(const model::HiformerParams& params, const model::ModelConfig& cfg, const PreparedSplit& split,
                       std::size_t horizon = 0, unsigned threads = 1);

/// Repeats the last observed power value over the horizon.
MetricsReport persistence_baseline(const PreparedSplit& split, std::size_t horizon = 0);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;  // validation MSE, NaN when the split is empty
  double lr = 0.0;
};

struct TrainResult {
  model::HiformerParams params;  // best on validation
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  bool stopped_early = false;
};

/// Adam on minibatches of windows shuffled per epoch from `cfg.seed`. Batch
/// gradients are reduced in sample order, so the result is identical for any
/// thread count. Throws NumericalError on a non-finite loss.
TrainResult train(const model::HiformerParams& initial, const model::ModelConfig& model_cfg, const ExperimentData& data,
                  const TrainConfig& cfg, const std::function<void(const EpochRecord&)>& on_epoch = {});

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

}  // namespace hiformer::train
