#include "hiformer/normalization.hpp"

#include <cmath>

#include "hiformer/dataset.hpp"
#include "hiformer/error.hpp"
#include "hiformer/windows.hpp"

namespace hiformer::train {

void NormStats::validate() const {
  if (mean.size() != stddev.size() || names.size() != mean.size()) {
    throw DimensionError("normalization statistics have inconsistent channel counts");
  }
  for (std::size_t c = 0; c < channels(); ++c) {
    if (!std::isfinite(mean[c]) || !std::isfinite(stddev[c])) {
      throw DataError("channel '" + names[c] + "' has non-finite statistics");
    }
    if (!(stddev[c] > 0.0)) {
      throw DataError("channel '" + names[c] + "' is constant on the training split (stddev 0)");
    }
  }
}

NormStats NormStats::fit(const data::RawDataset& raw, const data::SplitPlan& plan) {
  const std::size_t N = raw.turbines(), C = raw.features();
  const auto rows = plan.train;
  const std::size_t count = rows.size() * N;
  if (count < 2) throw DataError("training split has fewer than two observations");
  NormStats s;
  s.names.push_back("power");
  for (const auto& f : raw.feature_names) s.names.push_back(f);
  s.mean.assign(C + 1, 0.0);
  s.stddev.assign(C + 1, 0.0);
  auto value = [&](std::size_t t, std::size_t n, std::size_t ch) {
    return ch == 0 ? raw.power_at(t, n) : raw.weather_at(t, n, ch - 1);
  };
  for (std::size_t ch = 0; ch <= C; ++ch) {
    double sum = 0.0;
    for (std::size_t t = rows.begin; t < rows.end; ++t) {
      for (std::size_t n = 0; n < N; ++n) sum += value(t, n, ch);
    }
    const double mu = sum / static_cast<double>(count);
    double ss = 0.0;
    for (std::size_t t = rows.begin; t < rows.end; ++t) {
      for (std::size_t n = 0; n < N; ++n) {
        const double d = value(t, n, ch) - mu;
        ss += d * d;
      }
    }
    s.mean[ch] = mu;
    s.stddev[ch] = std::sqrt(ss / static_cast<double>(count - 1));
  }
  s.validate();
  return s;
}

std::vector<double> zscore(std::span<const double> x, const NormStats& stats, std::size_t channel) {
  if (channel >= stats.channels()) throw DimensionError("normalization channel out of range");
  if (!(stats.stddev[channel] > 0.0)) {
    throw DataError("channel '" + stats.names[channel] + "' has zero stddev");
  }
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = stats.apply(channel, x[i]);
  return y;
}

std::vector<double> inverse_zscore(std::span<const double> y, const NormStats& stats, std::size_t channel) {
  if (channel >= stats.channels()) throw DimensionError("normalization channel out of range");
  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = stats.invert(channel, y[i]);
  return x;
}

}  // namespace hiformer::train
