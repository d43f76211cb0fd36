#include "hiformer/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <unordered_map>

#include "hiformer/error.hpp"
#include "hiformer/io_util.hpp"

namespace hiformer::data {

std::string to_string(Schema schema) {
  switch (schema) {
    case Schema::sdwpf: return "sdwpf";
    case Schema::gefcom: return "gefcom";
    case Schema::generic: return "generic";
  }
  return "generic";
}

Schema schema_from_string(const std::string& name) {
  if (name == "sdwpf") return Schema::sdwpf;
  if (name == "gefcom") return Schema::gefcom;
  if (name == "generic") return Schema::generic;
  throw ConfigError("unknown CSV schema '" + name + "' (expected sdwpf, gefcom or generic)");
}

std::int64_t RawDataset::step() const { return rows() >= 2 ? timestamps[1] - timestamps[0] : 0; }

void RawDataset::validate() const {
  const std::size_t T = rows(), N = turbines(), C = features();
  if (power.size() != T * N) throw DimensionError("power matrix does not match T x N");
  if (weather.size() != T * N * C) throw DimensionError("weather tensor does not match T x N x C");
  if (missing.size() != T * N) throw DimensionError("missing mask does not match T x N");
  if (!invalid.empty() && invalid.size() != T * N) throw DimensionError("invalid mask does not match T x N");
  if (!coords.empty() && coords.size() != N) throw DimensionError("coordinate count does not match N");
  for (std::size_t t = 1; t < T; ++t) {
    if (timestamps[t] <= timestamps[t - 1]) throw DataError("timestamps are not strictly increasing");
  }
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Record {
  std::int64_t time;
  std::string turbine;
  double power;
  std::vector<double> features;
  std::size_t line;
};

bool is_missing_field(const std::string& s) {
  return s.empty() || s == "NaN" || s == "nan" || s == "NA" || s == "null";
}

double parse_value(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  if (is_missing_field(s)) return kNaN;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(path.string() + ":" + std::to_string(line) + ": cannot parse value '" + s + "'");
  }
}

std::int64_t parse_int(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(path.string() + ":" + std::to_string(line) + ": cannot parse integer '" + s + "'");
  }
}

// "HH:MM" -> minutes
std::int64_t parse_clock(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw DataError(path.string() + ":" + std::to_string(line) + ": bad time '" + s + "'");
  return parse_int(s.substr(0, colon), path, line) * 60 + parse_int(s.substr(colon + 1), path, line);
}

// "YYYYMMDD H:MM" or "YYYYMMDD HH:MM" -> seconds since the Unix epoch (UTC)
std::int64_t parse_gefcom_time(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  if (s.size() < 13 || s[8] != ' ') {
    throw DataError(path.string() + ":" + std::to_string(line) + ": bad GEFcom timestamp '" + s + "'");
  }
  using namespace std::chrono;
  const int y = static_cast<int>(parse_int(s.substr(0, 4), path, line));
  const unsigned m = static_cast<unsigned>(parse_int(s.substr(4, 2), path, line));
  const unsigned d = static_cast<unsigned>(parse_int(s.substr(6, 2), path, line));
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw DataError(path.string() + ":" + std::to_string(line) + ": invalid date '" + s + "'");
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + parse_clock(s.substr(9), path, line) * 60;
}

std::size_t column(const std::vector<std::string>& header, std::initializer_list<const char*> names,
                   const std::filesystem::path& path) {
  for (const char* name : names) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
  }
  throw DataError(path.string() + ": missing required column '" + *names.begin() + "'");
}

RawDataset assemble(std::vector<Record> records, std::vector<std::string> feature_names,
                    const std::filesystem::path& path) {
  if (records.empty()) throw DataError(path.string() + ": no data rows");
  RawDataset raw;
  raw.feature_names = std::move(feature_names);
  const std::size_t C = raw.features();

  std::unordered_map<std::string, std::size_t> turbine_index;
  std::map<std::int64_t, std::size_t> first_line;
  for (const auto& r : records) {
    if (turbine_index.emplace(r.turbine, raw.turbine_ids.size()).second) raw.turbine_ids.push_back(r.turbine);
    first_line.emplace(r.time, r.line);
  }
  for (const auto& [time, line] : first_line) raw.timestamps.push_back(time);

  const std::size_t T = raw.rows();
  if (T >= 2) {
    const std::int64_t step = raw.timestamps[1] - raw.timestamps[0];
    for (std::size_t t = 1; t < T; ++t) {
      if (raw.timestamps[t] - raw.timestamps[t - 1] != step) {
        throw DataError(path.string() + ":" + std::to_string(first_line[raw.timestamps[t]]) +
                        ": non-uniform timestamp spacing at row " + std::to_string(t) + " (expected step " +
                        std::to_string(step) + "s, got " + std::to_string(raw.timestamps[t] - raw.timestamps[t - 1]) +
                        "s)");
      }
    }
  }
  std::unordered_map<std::int64_t, std::size_t> row_of;
  for (std::size_t t = 0; t < T; ++t) row_of[raw.timestamps[t]] = t;

  const std::size_t N = raw.turbines();
  raw.power.assign(T * N, kNaN);
  raw.weather.assign(T * N * C, kNaN);
  raw.missing.assign(T * N, 1);
  std::vector<std::uint8_t> seen(T * N, 0);
  for (auto& r : records) {
    const std::size_t t = row_of[r.time];
    const std::size_t n = turbine_index[r.turbine];
    if (seen[t * N + n]) {
      throw DataError(path.string() + ":" + std::to_string(r.line) + ": duplicate row for turbine " + r.turbine);
    }
    seen[t * N + n] = 1;
    double p = r.power;
    if (std::isfinite(p) && p < 0.0) {
      p = 0.0;
      ++raw.clamped_negative;
    }
    raw.power[t * N + n] = p;
    bool complete = std::isfinite(p);
    for (std::size_t c = 0; c < C; ++c) {
      raw.weather[(t * N + n) * C + c] = r.features[c];
      complete = complete && std::isfinite(r.features[c]);
    }
    raw.missing[t * N + n] = complete ? 0 : 1;
  }
  return raw;
}

template <class RowFn>
void for_each_row(const std::filesystem::path& path, std::vector<std::string>& header, RowFn fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = io::split_csv(line);
    if (header.empty()) {
      header = std::move(fields);
      continue;
    }
    if (fields.size() != header.size()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(fields.size()));
    }
    fn(fields, lineno);
  }
  if (header.empty()) throw DataError(path.string() + ": empty file");
}

RawDataset load_sdwpf(const std::filesystem::path& path) {
  std::vector<std::string> header;
  std::vector<Record> records;
  std::size_t turb = 0, day = 0, clock = 0, patv = 0;
  std::vector<std::size_t> feature_cols;
  const std::vector<std::string> names{"Wspd", "Wdir", "Etmp", "Itmp", "Ndir", "Pab", "Prtv"};
  bool resolved = false;
  for_each_row(path, header, [&](const std::vector<std::string>& f, std::size_t line) {
    if (!resolved) {
      turb = column(header, {"TurbID"}, path);
      day = column(header, {"Day"}, path);
      clock = column(header, {"Tmstamp"}, path);
      patv = column(header, {"Patv"}, path);
      for (const auto& n : names) {
        if (n == "Pab") {
          feature_cols.push_back(column(header, {"Pab", "Pab1"}, path));
        } else {
          feature_cols.push_back(column(header, {n.c_str()}, path));
        }
      }
      resolved = true;
    }
    Record r;
    r.line = line;
    r.turbine = f[turb];
    r.time = ((parse_int(f[day], path, line) - 1) * 1440 + parse_clock(f[clock], path, line)) * 60;
    r.power = parse_value(f[patv], path, line);
    for (auto c : feature_cols) r.features.push_back(parse_value(f[c], path, line));
    records.push_back(std::move(r));
  });
  if (!resolved) {
    // Header only: still report missing columns precisely.
    column(header, {"TurbID"}, path);
    column(header, {"Patv"}, path);
    throw DataError(path.string() + ": no data rows");
  }
  return assemble(std::move(records), names, path);
}

RawDataset load_gefcom(const std::filesystem::path& path) {
  std::vector<std::string> header;
  std::vector<Record> records;
  std::size_t zone = 0, stamp = 0, target = 0, u10 = 0, v10 = 0, u100 = 0, v100 = 0;
  bool resolved = false;
  for_each_row(path, header, [&](const std::vector<std::string>& f, std::size_t line) {
    if (!resolved) {
      zone = column(header, {"ZONEID"}, path);
      stamp = column(header, {"TIMESTAMP"}, path);
      target = column(header, {"TARGETVAR"}, path);
      u10 = column(header, {"U10"}, path);
      v10 = column(header, {"V10"}, path);
      u100 = column(header, {"U100"}, path);
      v100 = column(header, {"V100"}, path);
      resolved = true;
    }
    Record r;
    r.line = line;
    r.turbine = f[zone];
    r.time = parse_gefcom_time(f[stamp], path, line);
    r.power = parse_value(f[target], path, line);
    r.features = {std::hypot(parse_value(f[u10], path, line), parse_value(f[v10], path, line)),
                  std::hypot(parse_value(f[u100], path, line), parse_value(f[v100], path, line))};
    records.push_back(std::move(r));
  });
  if (!resolved) {
    column(header, {"ZONEID"}, path);
    column(header, {"TARGETVAR"}, path);
    throw DataError(path.string() + ": no data rows");
  }
  return assemble(std::move(records), {"ws10", "ws100"}, path);
}

RawDataset load_generic(const std::filesystem::path& path) {
  std::vector<std::string> header;
  std::vector<Record> records;
  std::size_t ts = 0, turb = 0, pw = 0;
  std::vector<std::size_t> feature_cols;
  std::vector<std::string> names;
  bool resolved = false;
  auto resolve = [&] {
    ts = column(header, {"timestamp"}, path);
    turb = column(header, {"turbine"}, path);
    pw = column(header, {"power"}, path);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i != ts && i != turb && i != pw) {
        feature_cols.push_back(i);
        names.push_back(header[i]);
      }
    }
    resolved = true;
  };
  for_each_row(path, header, [&](const std::vector<std::string>& f, std::size_t line) {
    if (!resolved) resolve();
    Record r;
    r.line = line;
    r.turbine = f[turb];
    r.time = parse_int(f[ts], path, line);
    r.power = parse_value(f[pw], path, line);
    for (auto c : feature_cols) r.features.push_back(parse_value(f[c], path, line));
    records.push_back(std::move(r));
  });
  if (!resolved) {
    resolve();
    throw DataError(path.string() + ": no data rows");
  }
  return assemble(std::move(records), std::move(names), path);
}

}  // namespace

RawDataset load_csv(const std::filesystem::path& path, Schema schema) {
  if (!std::filesystem::exists(path)) throw DataError("input file not found: " + path.string());
  switch (schema) {
    case Schema::sdwpf: return load_sdwpf(path);
    case Schema::gefcom: return load_gefcom(path);
    case Schema::generic: return load_generic(path);
  }
  throw ConfigError("unsupported schema");
}

void write_csv(const RawDataset& raw, const std::filesystem::path& path) {
  raw.validate();
  const std::size_t T = raw.rows(), N = raw.turbines(), C = raw.features();
  auto cell = [](double v) { return std::isfinite(v) ? io::format_double(v) : std::string(); };
  io::write_file_atomic(path, [&](std::ostream& os) {
    os << "timestamp,turbine,power";
    for (const auto& f : raw.feature_names) os << ',' << f;
    os << '\n';
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t n = 0; n < N; ++n) {
        os << raw.timestamps[t] << ',' << raw.turbine_ids[n] << ',' << cell(raw.power_at(t, n));
        for (std::size_t c = 0; c < C; ++c) os << ',' << cell(raw.weather_at(t, n, c));
        os << '\n';
      }
    }
  });
}

namespace {

// Interpolates one strided series in place; returns per-index "long gap" flags.
void fill_series(std::vector<double>& values, std::size_t offset, std::size_t stride, std::size_t T,
                 std::size_t max_gap, std::vector<std::uint8_t>& long_gap, CleanReport& report) {
  auto at = [&](std::size_t t) -> double& { return values[offset + t * stride]; };
  std::size_t t = 0;
  while (t < T) {
    if (std::isfinite(at(t))) {
      ++t;
      continue;
    }
    const std::size_t begin = t;
    while (t < T && !std::isfinite(at(t))) ++t;
    const std::size_t end = t;  // exclusive
    const bool has_left = begin > 0;
    const bool has_right = end < T;
    if (!has_left && !has_right) throw DataError("a series contains no observed values");
    const double left = has_left ? at(begin - 1) : at(end);
    const double right = has_right ? at(end) : at(begin - 1);
    const double span = static_cast<double>(end - begin + 1);
    for (std::size_t k = begin; k < end; ++k) {
      const double w = has_left && has_right ? static_cast<double>(k - begin + 1) / span : 0.0;
      at(k) = left + w * (right - left);
    }
    const bool too_long = end - begin > max_gap;
    for (std::size_t k = begin; k < end; ++k) long_gap[k] = long_gap[k] || too_long;
    if (too_long) {
      report.invalidated += end - begin;
    } else {
      report.interpolated += end - begin;
    }
  }
}

}  // namespace

CleanReport clean_missing(RawDataset& raw, std::size_t max_gap) {
  raw.validate();
  const std::size_t T = raw.rows(), N = raw.turbines(), C = raw.features();
  raw.invalid.assign(T * N, 0);
  CleanReport report;
  std::vector<std::uint8_t> long_gap(T);
  for (std::size_t n = 0; n < N; ++n) {
    std::fill(long_gap.begin(), long_gap.end(), 0);
    fill_series(raw.power, n, N, T, max_gap, long_gap, report);
    for (std::size_t c = 0; c < C; ++c) fill_series(raw.weather, n * C + c, N * C, T, max_gap, long_gap, report);
    for (std::size_t t = 0; t < T; ++t) raw.invalid[t * N + n] = long_gap[t];
  }
  return report;
}

}  // namespace hiformer::data
