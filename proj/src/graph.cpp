#include "hiformer/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hiformer/error.hpp"
#include "hiformer/io_util.hpp"

namespace hiformer::graph {

std::size_t TurbineGraph::degree(std::size_t i) const {
  std::size_t d = 0;
  for (std::size_t j = 0; j < n; ++j) d += weight(i, j) > 0.0 ? 1 : 0;
  return d;
}

std::size_t TurbineGraph::edge_count() const {
  std::size_t e = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) e += weight(i, j) > 0.0 ? 1 : 0;
  }
  return e;
}

void TurbineGraph::validate() const {
  if (adjacency.size() != n * n) throw DimensionError("adjacency must hold N*N weights");
  if (!coords.empty() && coords.size() != n) throw DimensionError("coordinate count does not match N");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = weight(i, j);
      if (!(w >= 0.0 && w <= 1.0)) {
        throw DataError("adjacency weight (" + std::to_string(i) + "," + std::to_string(j) + ") = " +
                        std::to_string(w) + " outside [0,1]");
      }
      if (std::fabs(w - weight(j, i)) > 1e-12) throw DataError("adjacency is not symmetric");
    }
  }
}

double median_pairwise_distance(std::span<const Coord> coords) {
  std::vector<double> d;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for (std::size_t j = i + 1; j < coords.size(); ++j) {
      d.push_back(std::hypot(coords[i][0] - coords[j][0], coords[i][1] - coords[j][1]));
    }
  }
  if (d.empty()) return 1.0;
  std::sort(d.begin(), d.end());
  const std::size_t mid = d.size() / 2;
  const double med = d.size() % 2 ? d[mid] : 0.5 * (d[mid - 1] + d[mid]);
  return med > 0.0 ? med : 1.0;
}

TurbineGraph build_adjacency(std::span<const Coord> coords, double sigma, double epsilon) {
  const std::size_t n = coords.size();
  if (n < 2) throw DataError("a turbine graph needs at least 2 nodes, got " + std::to_string(n));
  if (!(sigma > 0.0)) throw ConfigError("adjacency sigma must be > 0");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("adjacency epsilon must lie in [0, 1)");
  TurbineGraph g;
  g.n = n;
  g.coords.assign(coords.begin(), coords.end());
  g.adjacency.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = coords[i][0] - coords[j][0];
      const double dy = coords[i][1] - coords[j][1];
      const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      const double kept = w > epsilon ? w : 0.0;
      g.adjacency[i * n + j] = kept;
      g.adjacency[j * n + i] = kept;
    }
  }
  return g;
}

TurbineGraph build_adjacency(std::span<const Coord> coords, double epsilon) {
  return build_adjacency(coords, median_pairwise_distance(coords), epsilon);
}

TurbineGraph uniform_graph(std::size_t n) {
  if (n < 2) throw DataError("a turbine graph needs at least 2 nodes, got " + std::to_string(n));
  TurbineGraph g;
  g.n = n;
  g.adjacency.assign(n * n, 1.0 / static_cast<double>(n - 1));
  for (std::size_t i = 0; i < n; ++i) g.adjacency[i * n + i] = 0.0;
  return g;
}

TurbineGraph from_adjacency(std::size_t n, std::vector<double> adjacency) {
  if (n < 2) throw DataError("a turbine graph needs at least 2 nodes, got " + std::to_string(n));
  TurbineGraph g;
  g.n = n;
  g.adjacency = std::move(adjacency);
  g.validate();
  return g;
}

namespace {

double parse_number(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(path.string() + ":" + std::to_string(line) + ": cannot parse number '" + s + "'");
  }
}

}  // namespace

std::vector<Coord> read_coords_csv(const std::filesystem::path& path, std::vector<std::string>* ids) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open coordinate file " + path.string());
  std::string line;
  std::vector<Coord> coords;
  std::size_t lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = io::split_csv(line);
    if (header) {
      header = false;
      if (f.size() < 3 || f[1] != "x" || f[2] != "y") {
        throw DataError(path.string() + ": expected header turbine_id,x,y");
      }
      continue;
    }
    if (f.size() < 3) throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 3 fields");
    if (ids) ids->push_back(f[0]);
    coords.push_back({parse_number(f[1], path, lineno), parse_number(f[2], path, lineno)});
  }
  return coords;
}

void write_coords_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                      std::span<const Coord> coords) {
  io::write_file_atomic(path, [&](std::ostream& os) {
    os << "turbine_id,x,y\n";
    for (std::size_t i = 0; i < coords.size(); ++i) {
      os << (i < ids.size() ? ids[i] : std::to_string(i)) << ',' << io::format_double(coords[i][0]) << ','
         << io::format_double(coords[i][1]) << '\n';
    }
  });
}

TurbineGraph read_adjacency_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open adjacency file " + path.string());
  std::string line;
  std::vector<double> values;
  std::size_t rows = 0, cols = 0, lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = io::split_csv(line);
    if (rows == 0) cols = f.size();
    if (f.size() != cols) throw DataError(path.string() + ":" + std::to_string(lineno) + ": ragged adjacency row");
    for (const auto& s : f) values.push_back(parse_number(s, path, lineno));
    ++rows;
  }
  if (rows != cols) throw DataError(path.string() + ": adjacency must be square");
  return from_adjacency(rows, std::move(values));
}

void write_embeddings_csv(const std::filesystem::path& path, const ad::Tensor& embeddings,
                          std::span<const std::string> ids) {
  const std::size_t n = embeddings.dim(0);
  const std::size_t d = embeddings.dim(1);
  const auto v = embeddings.data();
  io::write_file_atomic(path, [&](std::ostream& os) {
    os << "turbine";
    for (std::size_t k = 0; k < d; ++k) os << ",e_" << (k + 1);
    os << '\n';
    for (std::size_t i = 0; i < n; ++i) {
      os << (i < ids.size() ? ids[i] : std::to_string(i));
      for (std::size_t k = 0; k < d; ++k) os << ',' << io::format_double(v[i * d + k]);
      os << '\n';
    }
  });
}

}  // namespace hiformer::graph
