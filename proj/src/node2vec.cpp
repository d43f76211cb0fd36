#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "hiformer/error.hpp"
#include "hiformer/graph.hpp"
#include "hiformer/parallel.hpp"

namespace hiformer::graph {

void Node2vecConfig::validate() const {
  if (!(p > 0.0)) throw ConfigError("node2vec p must be > 0");
  if (!(q > 0.0)) throw ConfigError("node2vec q must be > 0");
  if (dims < 2) throw ConfigError("node2vec dims must be >= 2");
  if (window < 1) throw ConfigError("node2vec window must be >= 1");
  if (walk_len < window + 1) throw ConfigError("node2vec walk_len must be >= window + 1");
  if (walks_per_node < 1) throw ConfigError("node2vec walks_per_node must be >= 1");
  if (epochs < 1) throw ConfigError("node2vec epochs must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("node2vec lr must be > 0");
}

std::vector<double> transition_probabilities(const TurbineGraph& g, std::size_t previous, std::size_t current,
                                             double p, double q) {
  const std::size_t n = g.n;
  std::vector<double> w(n, 0.0);
  double total = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const double base = g.weight(current, x);
    if (base <= 0.0) continue;
    double bias = 1.0;
    if (previous < n) {
      if (x == previous) {
        bias = 1.0 / p;
      } else if (g.weight(previous, x) <= 0.0) {
        bias = 1.0 / q;
      }
    }
    w[x] = base * bias;
    total += w[x];
  }
  if (total > 0.0) {
    for (auto& v : w) v /= total;
  }
  return w;
}

std::vector<Walk> biased_walks(const TurbineGraph& g, const Node2vecConfig& cfg, unsigned threads) {
  cfg.validate();
  g.validate();
  if (g.edge_count() == 0) throw DataError("node2vec needs a graph with at least one edge");
  const std::size_t n = g.n;
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<Walk> walks(n * cfg.walks_per_node);
  // Walk index r * n + start: repetitions are grouped, starts vary fastest.
  parallel_for(walks.size(), threads, [&](std::size_t idx) {
    const std::size_t rep = idx / n;
    const std::size_t start = idx % n;
    std::seed_seq seq{static_cast<std::uint64_t>(cfg.seed), static_cast<std::uint64_t>(rep),
                      static_cast<std::uint64_t>(start), std::uint64_t{0x6e32766ull}};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Walk walk{start};
    walk.reserve(cfg.walk_len);
    std::size_t prev = none;
    while (walk.size() < cfg.walk_len) {
      const std::size_t cur = walk.back();
      const auto probs = transition_probabilities(g, prev, cur, cfg.p, cfg.q);
      const double r = unit(rng);
      double acc = 0.0;
      std::size_t next = none;
      for (std::size_t x = 0; x < n; ++x) {
        if (probs[x] <= 0.0) continue;
        acc += probs[x];
        next = x;
        if (r < acc) break;
      }
      if (next == none) break;  // isolated node
      walk.push_back(next);
      prev = cur;
    }
    walks[idx] = std::move(walk);
  });
  return walks;
}

namespace {

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

EmbeddingResult train_embeddings(std::span<const Walk> walks, std::size_t n_nodes, const Node2vecConfig& cfg) {
  cfg.validate();
  if (walks.empty()) throw DataError("train_embeddings needs at least one walk");
  const std::size_t d = cfg.dims;
  std::mt19937_64 rng(cfg.seed ^ 0x5eedf00dull);

  std::vector<double> in(n_nodes * d), out(n_nodes * d, 0.0);
  std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(d), 0.5 / static_cast<double>(d));
  for (auto& v : in) v = init(rng);

  // Unigram^0.75 noise distribution over walk occurrences.
  std::vector<double> counts(n_nodes, 0.0);
  std::size_t pairs_per_epoch = 0;
  for (const auto& w : walks) {
    for (auto v : w) {
      if (v >= n_nodes) throw DataError("walk references node " + std::to_string(v) + " beyond N");
      counts[v] += 1.0;
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      const std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
      const std::size_t hi = std::min(w.size() - 1, i + cfg.window);
      pairs_per_epoch += hi - lo;
    }
  }
  for (auto& c : counts) c = std::pow(c, 0.75);
  std::discrete_distribution<std::size_t> noise(counts.begin(), counts.end());

  std::vector<std::size_t> order(walks.size());
  std::iota(order.begin(), order.end(), 0);
  const double total_pairs = static_cast<double>(std::max<std::size_t>(1, pairs_per_epoch * cfg.epochs));
  double processed = 0.0;
  std::vector<double> grad_in(d);

  EmbeddingResult result;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss = 0.0;
    std::size_t pairs = 0;
    for (auto wi : order) {
      const auto& w = walks[wi];
      for (std::size_t i = 0; i < w.size(); ++i) {
        const std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
        const std::size_t hi = std::min(w.size() - 1, i + cfg.window);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const double lr = cfg.lr * std::max(1e-4, 1.0 - processed / total_pairs);
          processed += 1.0;
          double* vin = &in[w[i] * d];
          std::fill(grad_in.begin(), grad_in.end(), 0.0);
          auto update = [&](std::size_t target, double label) {
            double* vout = &out[target * d];
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k) dot += vin[k] * vout[k];
            loss -= label > 0 ? log_sigmoid(dot) : log_sigmoid(-dot);
            const double gcoef = lr * (label - sigmoid(dot));
            for (std::size_t k = 0; k < d; ++k) {
              grad_in[k] += gcoef * vout[k];
              vout[k] += gcoef * vin[k];
            }
          };
          update(w[j], 1.0);
          for (std::size_t s = 0; s < cfg.negatives; ++s) {
            const std::size_t neg = noise(rng);
            if (neg == w[j]) continue;
            update(neg, 0.0);
          }
          for (std::size_t k = 0; k < d; ++k) vin[k] += grad_in[k];
          ++pairs;
        }
      }
    }
    result.epoch_loss.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
  }
  result.embeddings = ad::Tensor(ad::Shape{n_nodes, d}, std::move(in));
  return result;
}

EmbeddingResult node2vec(const TurbineGraph& g, const Node2vecConfig& cfg, unsigned threads) {
  const auto walks = biased_walks(g, cfg, threads);
  return train_embeddings(walks, g.n, cfg);
}

}  // namespace hiformer::graph
