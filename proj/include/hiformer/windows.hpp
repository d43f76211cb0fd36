#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hiformer/dataset.hpp"
#include "hiformer/normalization.hpp"
#include "hiformer/tensor.hpp"

namespace hiformer::data {

enum class Split { train = 0, val = 1, test = 2 };

std::string to_string(Split split);
Split split_from_string(const std::string& name);

struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  std::size_t size() const { return end - begin; }
};

/// Chronological partition of rows [0, T).
struct SplitPlan {
  RowRange train, val, test;

  /// train = floor(T * r0 / sum), val = floor(T * r1 / sum), test = the rest.
  static SplitPlan chronological(std::size_t T, const std::array<std::size_t, 3>& ratio);
  const RowRange& operator[](Split s) const;
};

struct WindowConfig {
  std::size_t P = 48;
  std::size_t Q = 12;
  std::array<std::size_t, 3> ratio{7, 1, 2};
  std::size_t stride = 1;
  std::size_t max_gap = 3;               // longest gap filled by interpolation
  double max_invalid_fraction = 0.0;     // share of flagged rows a window may contain

  void validate() const;
};

/// Number of stride-spaced windows of length P + Q inside `rows` rows.
std::size_t window_count(std::size_t rows, std::size_t P, std::size_t Q, std::size_t stride = 1);

struct Sample {
  ad::Tensor power;    // [P x N], normalized
  ad::Tensor weather;  // [P x N x C], normalized
  ad::Tensor target;   // [Q x N], normalized
  std::size_t start = 0;  // first history row
};

/// Immutable, normalized sliding windows over a cleaned dataset.
class WindowedDataset {
 public:
  std::size_t P() const { return P_; }
  std::size_t Q() const { return Q_; }
  std::size_t N() const { return turbine_ids_.size(); }
  std::size_t C() const { return feature_names_.size(); }
  std::size_t rows() const { return timestamps_.size(); }

  const SplitPlan& plan() const { return plan_; }
  const train::NormStats& stats() const { return stats_; }
  const std::vector<std::string>& turbine_ids() const { return turbine_ids_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::int64_t>& timestamps() const { return timestamps_; }
  std::size_t windows_dropped() const { return dropped_; }

  std::size_t count(Split s) const { return starts_[static_cast<int>(s)].size(); }
  const std::vector<std::size_t>& starts(Split s) const { return starts_[static_cast<int>(s)]; }
  Sample sample(Split s, std::size_t i) const;

  double power(std::size_t t, std::size_t n) const { return power_[t * N() + n]; }
  double weather(std::size_t t, std::size_t n, std::size_t c) const { return weather_[(t * N() + n) * C() + c]; }

  /// Versioned binary cache of the normalized series and window table.
  void save(const std::filesystem::path& path) const;
  static WindowedDataset load(const std::filesystem::path& path);

  friend WindowedDataset make_windows(const RawDataset& raw, const WindowConfig& cfg,
                                      const train::NormStats* stats_override);

 private:
  std::size_t P_ = 0, Q_ = 0;
  SplitPlan plan_;
  train::NormStats stats_;
  std::vector<std::string> turbine_ids_, feature_names_;
  std::vector<std::int64_t> timestamps_;
  std::vector<double> power_, weather_;
  std::array<std::vector<std::size_t>, 3> starts_;
  std::size_t dropped_ = 0;
};

/// Cleans a copy of `raw`, splits chronologically, fits statistics on the
/// training rows (unless `stats_override` is given, e.g. from a checkpoint)
/// and enumerates windows that stay inside their split. A split with a
/// non-zero ratio that cannot hold one window is a DataError naming it.
WindowedDataset make_windows(const RawDataset& raw, const WindowConfig& cfg,
                             const train::NormStats* stats_override = nullptr);

}  // namespace hiformer::data
