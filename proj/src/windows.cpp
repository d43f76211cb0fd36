#include "hiformer/windows.hpp"

#include <cmath>

#include "hiformer/container.hpp"
#include "hiformer/error.hpp"

namespace hiformer::data {

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "val" || name == "validation") return Split::val;
  if (name == "test") return Split::test;
  throw ConfigError("unknown split '" + name + "' (expected train, val or test)");
}

SplitPlan SplitPlan::chronological(std::size_t T, const std::array<std::size_t, 3>& ratio) {
  const std::size_t total = ratio[0] + ratio[1] + ratio[2];
  if (total == 0) throw ConfigError("split ratio must have a positive sum");
  const std::size_t n_train = T * ratio[0] / total;
  const std::size_t n_val = T * ratio[1] / total;
  SplitPlan plan;
  plan.train = {0, n_train};
  plan.val = {n_train, n_train + n_val};
  plan.test = {n_train + n_val, T};
  return plan;
}

const RowRange& SplitPlan::operator[](Split s) const {
  switch (s) {
    case Split::train: return train;
    case Split::val: return val;
    case Split::test: return test;
  }
  return train;
}

void WindowConfig::validate() const {
  if (P < 1) throw ConfigError("window history P must be >= 1");
  if (Q < 1) throw ConfigError("window horizon Q must be >= 1");
  if (stride < 1) throw ConfigError("window stride must be >= 1");
  if (ratio[0] + ratio[1] + ratio[2] == 0) throw ConfigError("split ratio must have a positive sum");
  if (!(max_invalid_fraction >= 0.0 && max_invalid_fraction <= 1.0)) {
    throw ConfigError("max_invalid_fraction must lie in [0, 1]");
  }
}

std::size_t window_count(std::size_t rows, std::size_t P, std::size_t Q, std::size_t stride) {
  if (rows < P + Q) return 0;
  return (rows - P - Q) / stride + 1;
}

Sample WindowedDataset::sample(Split s, std::size_t i) const {
  const auto& st = starts(s);
  if (i >= st.size()) {
    throw ContractError("window " + std::to_string(i) + " out of range for split " + to_string(s));
  }
  const std::size_t t0 = st[i], n = N(), c = C();
  Sample out;
  out.start = t0;
  std::vector<double> x(power_.begin() + static_cast<std::ptrdiff_t>(t0 * n),
                        power_.begin() + static_cast<std::ptrdiff_t>((t0 + P_) * n));
  std::vector<double> w(weather_.begin() + static_cast<std::ptrdiff_t>(t0 * n * c),
                        weather_.begin() + static_cast<std::ptrdiff_t>((t0 + P_) * n * c));
  std::vector<double> y(power_.begin() + static_cast<std::ptrdiff_t>((t0 + P_) * n),
                        power_.begin() + static_cast<std::ptrdiff_t>((t0 + P_ + Q_) * n));
  out.power = ad::Tensor({P_, n}, std::move(x));
  out.weather = ad::Tensor({P_, n, c}, std::move(w));
  out.target = ad::Tensor({Q_, n}, std::move(y));
  return out;
}

WindowedDataset make_windows(const RawDataset& raw_in, const WindowConfig& cfg,
                             const train::NormStats* stats_override) {
  cfg.validate();
  raw_in.validate();
  const std::size_t T = raw_in.rows();
  if (T < cfg.P + cfg.Q) {
    throw DataError("dataset has " + std::to_string(T) + " rows, fewer than P + Q = " +
                    std::to_string(cfg.P + cfg.Q));
  }
  RawDataset raw = raw_in;
  clean_missing(raw, cfg.max_gap);

  WindowedDataset ds;
  ds.P_ = cfg.P;
  ds.Q_ = cfg.Q;
  ds.plan_ = SplitPlan::chronological(T, cfg.ratio);
  ds.turbine_ids_ = raw.turbine_ids;
  ds.feature_names_ = raw.feature_names;
  ds.timestamps_ = raw.timestamps;

  for (Split s : {Split::train, Split::val, Split::test}) {
    const auto& r = ds.plan_[s];
    if (cfg.ratio[static_cast<int>(s)] > 0 && window_count(r.size(), cfg.P, cfg.Q, cfg.stride) == 0) {
      throw DataError(to_string(s) + " split has " + std::to_string(r.size()) +
                      " rows, too short for one window of P + Q = " + std::to_string(cfg.P + cfg.Q));
    }
  }

  if (stats_override) {
    ds.stats_ = *stats_override;
    ds.stats_.validate();
    if (ds.stats_.channels() != raw.features() + 1) {
      throw DimensionError("normalization statistics cover " + std::to_string(ds.stats_.channels()) +
                           " channels, dataset has " + std::to_string(raw.features() + 1));
    }
  } else {
    ds.stats_ = train::NormStats::fit(raw, ds.plan_);
  }

  const std::size_t N = raw.turbines(), C = raw.features();
  ds.power_.resize(T * N);
  ds.weather_.resize(T * N * C);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t n = 0; n < N; ++n) {
      ds.power_[t * N + n] = ds.stats_.apply(0, raw.power_at(t, n));
      for (std::size_t c = 0; c < C; ++c) {
        ds.weather_[(t * N + n) * C + c] = ds.stats_.apply(1 + c, raw.weather_at(t, n, c));
      }
    }
  }

  std::vector<std::size_t> bad_prefix(T + 1, 0);
  for (std::size_t t = 0; t < T; ++t) {
    bool bad = false;
    for (std::size_t n = 0; n < N; ++n) bad = bad || raw.invalid[t * N + n];
    bad_prefix[t + 1] = bad_prefix[t] + (bad ? 1 : 0);
  }
  const std::size_t span = cfg.P + cfg.Q;
  for (Split s : {Split::train, Split::val, Split::test}) {
    const auto& r = ds.plan_[s];
    const std::size_t n_windows = window_count(r.size(), cfg.P, cfg.Q, cfg.stride);
    auto& out = ds.starts_[static_cast<int>(s)];
    for (std::size_t k = 0; k < n_windows; ++k) {
      const std::size_t t0 = r.begin + k * cfg.stride;
      const double bad = static_cast<double>(bad_prefix[t0 + span] - bad_prefix[t0]);
      if (bad > cfg.max_invalid_fraction * static_cast<double>(span)) {
        ++ds.dropped_;
        continue;
      }
      out.push_back(t0);
    }
  }
  return ds;
}

namespace {
constexpr std::string_view kMagic = "HFWINDOW";
constexpr std::uint32_t kVersion = 1;
}  // namespace

void WindowedDataset::save(const std::filesystem::path& path) const {
  nlohmann::json h;
  h["P"] = P_;
  h["Q"] = Q_;
  h["turbines"] = turbine_ids_;
  h["features"] = feature_names_;
  h["timestamps"] = timestamps_;
  h["plan"] = {plan_.train.begin, plan_.train.end, plan_.val.begin, plan_.val.end, plan_.test.begin, plan_.test.end};
  h["stats"] = {{"names", stats_.names}, {"mean", stats_.mean}, {"stddev", stats_.stddev}};
  h["starts"] = {starts_[0], starts_[1], starts_[2]};
  h["dropped"] = dropped_;
  std::vector<double> payload(power_);
  payload.insert(payload.end(), weather_.begin(), weather_.end());
  io::write_container(path, kMagic, kVersion, h, payload);
}

WindowedDataset WindowedDataset::load(const std::filesystem::path& path) {
  auto c = io::read_container(path, kMagic, kVersion);
  WindowedDataset ds;
  try {
    const auto& h = c.header;
    ds.P_ = h.at("P").get<std::size_t>();
    ds.Q_ = h.at("Q").get<std::size_t>();
    ds.turbine_ids_ = h.at("turbines").get<std::vector<std::string>>();
    ds.feature_names_ = h.at("features").get<std::vector<std::string>>();
    ds.timestamps_ = h.at("timestamps").get<std::vector<std::int64_t>>();
    const auto plan = h.at("plan").get<std::vector<std::size_t>>();
    if (plan.size() != 6) throw DataError("bad split plan");
    ds.plan_ = {{plan[0], plan[1]}, {plan[2], plan[3]}, {plan[4], plan[5]}};
    ds.stats_.names = h.at("stats").at("names").get<std::vector<std::string>>();
    ds.stats_.mean = h.at("stats").at("mean").get<std::vector<double>>();
    ds.stats_.stddev = h.at("stats").at("stddev").get<std::vector<double>>();
    const auto starts = h.at("starts").get<std::vector<std::vector<std::size_t>>>();
    if (starts.size() != 3) throw DataError("bad window table");
    for (int s = 0; s < 3; ++s) ds.starts_[s] = starts[s];
    ds.dropped_ = h.at("dropped").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": malformed window cache header: " + e.what());
  }
  const std::size_t T = ds.rows(), N = ds.N(), C = ds.C();
  if (c.payload.size() != T * N * (1 + C)) throw DataError(path.string() + ": window cache payload size mismatch");
  ds.power_.assign(c.payload.begin(), c.payload.begin() + static_cast<std::ptrdiff_t>(T * N));
  ds.weather_.assign(c.payload.begin() + static_cast<std::ptrdiff_t>(T * N), c.payload.end());
  for (const auto& st : ds.starts_) {
    for (auto t0 : st) {
      if (t0 + ds.P_ + ds.Q_ > T) throw DataError(path.string() + ": window table exceeds row count");
    }
  }
  return ds;
}

}  // namespace hiformer::data
