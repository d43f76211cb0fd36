#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hiformer/tensor.hpp"

namespace hiformer::graph {

using Coord = std::array<double, 2>;

/// Weighted undirected graph over N turbines. Adjacency is row-major N x N,
/// symmetric, every weight in [0, 1].
struct TurbineGraph {
  std::size_t n = 0;
  std::vector<Coord> coords;  // empty when positions are unknown
  std::vector<double> adjacency;

  double weight(std::size_t i, std::size_t j) const { return adjacency[i * n + j]; }
  std::size_t degree(std::size_t i) const;
  std::size_t edge_count() const;
  void validate() const;
};

/// Gaussian kernel exp(-d^2 / (2 sigma^2)), zeroed at or below `epsilon`,
/// zero diagonal.
TurbineGraph build_adjacency(std::span<const Coord> coords, double sigma, double epsilon);
/// build_adjacency with sigma = median pairwise distance (1 when all
/// positions coincide).
TurbineGraph build_adjacency(std::span<const Coord> coords, double epsilon = 0.05);
double median_pairwise_distance(std::span<const Coord> coords);

/// Fallback without coordinates: every off-diagonal weight 1/(N-1).
TurbineGraph uniform_graph(std::size_t n);
/// Validates and wraps an explicit N x N adjacency.
TurbineGraph from_adjacency(std::size_t n, std::vector<double> adjacency);

/// `turbine_id,x,y` with a header row; ids are returned in file order.
std::vector<Coord> read_coords_csv(const std::filesystem::path& path, std::vector<std::string>* ids = nullptr);
void write_coords_csv(const std::filesystem::path& path, std::span<const std::string> ids, std::span<const Coord> coords);
/// Headerless N x N matrix of weights.
TurbineGraph read_adjacency_csv(const std::filesystem::path& path);
/// One row per turbine: turbine, e_1..e_dims.
void write_embeddings_csv(const std::filesystem::path& path, const ad::Tensor& embeddings,
                          std::span<const std::string> ids = {});

struct Node2vecConfig {
  std::size_t dims = 64;
  std::size_t walk_len = 20;
  std::size_t walks_per_node = 10;
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double lr = 0.025;
  std::uint64_t seed = 7;

  void validate() const;
};

using Walk = std::vector<std::size_t>;

/// Second-order biased walks: after stepping t -> v, the unnormalized weight
/// of moving to x is w(v,x)/p if x == t, w(v,x) if x neighbours t, and
/// w(v,x)/q otherwise. Each (start node, repetition) has its own RNG stream
/// derived from cfg.seed, so output is independent of `threads`.
std::vector<Walk> biased_walks(const TurbineGraph& g, const Node2vecConfig& cfg, unsigned threads = 1);

/// Transition distribution out of `current` given the previous node (or
/// npos for the first step). Sums to 1 unless `current` is isolated.
std::vector<double> transition_probabilities(const TurbineGraph& g, std::size_t previous, std::size_t current,
                                             double p, double q);

struct EmbeddingResult {
  ad::Tensor embeddings;            // [N x dims]
  std::vector<double> epoch_loss;   // mean skip-gram loss per epoch
};

/// Skip-gram with negative sampling trained by plain SGD with linearly
/// decaying learning rate. Deterministic for a fixed seed.
EmbeddingResult train_embeddings(std::span<const Walk> walks, std::size_t n_nodes, const Node2vecConfig& cfg);

/// Convenience: walks + training.
EmbeddingResult node2vec(const TurbineGraph& g, const Node2vecConfig& cfg, unsigned threads = 1);

}  // namespace hiformer::graph
