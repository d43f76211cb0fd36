#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hiformer::data {
struct RawDataset;
struct SplitPlan;
}  // namespace hiformer::data

namespace hiformer::train {

/// Per-channel Z-score statistics. Channel 0 is power, channel 1 + c is
/// weather feature c.
struct NormStats {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t channels() const { return mean.size(); }
  /// Throws DataError naming any channel whose stddev is not positive.
  void validate() const;

  double apply(std::size_t channel, double x) const { return (x - mean[channel]) / stddev[channel]; }
  double invert(std::size_t channel, double y) const { return y * stddev[channel] + mean[channel]; }

  /// Sample mean and stddev (n - 1) over the training rows of `plan`, pooled
  /// across turbines. Validation and test rows are never read.
  static NormStats fit(const data::RawDataset& raw, const data::SplitPlan& plan);
};

std::vector<double> zscore(std::span<const double> x, const NormStats& stats, std::size_t channel);
std::vector<double> inverse_zscore(std::span<const double> y, const NormStats& stats, std::size_t channel);

}  // namespace hiformer::train
