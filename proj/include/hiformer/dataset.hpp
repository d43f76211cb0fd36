#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hiformer/graph.hpp"

namespace hiformer::data {

/// Column layouts understood by load_csv.
///  - sdwpf:   TurbID,Day,Tmstamp,Wspd,Wdir,Etmp,Itmp,Ndir,Pab (or Pab1),Prtv,Patv
///             10-minute rows; power is Patv, the other seven are weather.
///  - gefcom:  ZONEID,TIMESTAMP,TARGETVAR,U10,V10,U100,V100 with TIMESTAMP as
///             "YYYYMMDD H:MM" (one or two hour digits); weather is wind speed
///             at 10 m and 100 m.
///  - generic: timestamp,turbine,power,<feature>... with integer timestamps
///             in seconds. This is also the layout written by write_csv.
enum class Schema { sdwpf, gefcom, generic };

std::string to_string(Schema schema);
Schema schema_from_string(const std::string& name);

struct RawDataset {
  std::vector<std::int64_t> timestamps;  // seconds, strictly increasing, uniform
  std::vector<std::string> turbine_ids;
  std::vector<std::string> feature_names;
  std::vector<double> power;            // T x N, NaN where missing
  std::vector<double> weather;          // T x N x C, NaN where missing
  std::vector<std::uint8_t> missing;    // T x N, any channel of (t, n) absent in the file
  std::vector<std::uint8_t> invalid;    // T x N, set by clean_missing for long gaps
  std::vector<graph::Coord> coords;     // optional, N entries
  std::size_t clamped_negative = 0;     // power cells raised to 0 on load

  std::size_t rows() const { return timestamps.size(); }
  std::size_t turbines() const { return turbine_ids.size(); }
  std::size_t features() const { return feature_names.size(); }
  std::int64_t step() const;

  double power_at(std::size_t t, std::size_t n) const { return power[t * turbines() + n]; }
  double weather_at(std::size_t t, std::size_t n, std::size_t c) const {
    return weather[(t * turbines() + n) * features() + c];
  }

  void validate() const;
};

RawDataset load_csv(const std::filesystem::path& path, Schema schema);
/// Writes the generic layout; missing cells are written as empty fields.
void write_csv(const RawDataset& raw, const std::filesystem::path& path);

struct CleanReport {
  std::size_t interpolated = 0;  // cells filled inside short gaps
  std::size_t invalidated = 0;   // cells in gaps longer than max_gap
};

/// Fills missing values per (turbine, channel) by linear interpolation (edge
/// gaps repeat the nearest observation). Cells in runs longer than `max_gap`
/// are filled too but flagged in `invalid` so windows can exclude them.
CleanReport clean_missing(RawDataset& raw, std::size_t max_gap = 3);

}  // namespace hiformer::data
