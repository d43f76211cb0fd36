#include "hiformer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "hiformer/adam.hpp"
#include "hiformer/error.hpp"
#include "hiformer/io_util.hpp"
#include "hiformer/parallel.hpp"

namespace hiformer::train {

std::string to_string(LossKind kind) { return kind == LossKind::mae ? "mae" : "mse"; }

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "mse") return LossKind::mse;
  if (name == "mae") return LossKind::mae;
  throw ConfigError("unknown loss '" + name + "' (expected mse or mae)");
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be finite and >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (grad_clip && !(*grad_clip > 0.0)) throw ConfigError("grad_clip must be > 0");
  if (early_stop_patience && *early_stop_patience < 1) throw ConfigError("early_stop_patience must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

const PreparedSplit& ExperimentData::split(data::Split s) const {
  switch (s) {
    case data::Split::train: return train;
    case data::Split::val: return val;
    case data::Split::test: return test;
  }
  return train;
}

PreparedSplit ExperimentData::prepare_split(const data::WindowedDataset& ds, data::Split split,
                                            const vmd::VmdConfig& vmd_cfg, const ad::Tensor& node_embedding,
                                            unsigned threads) {
  vmd_cfg.validate();
  const auto M = static_cast<std::size_t>(vmd_cfg.num_modes);
  if (ds.P() < 8 * M) {
    throw ConfigError("history P=" + std::to_string(ds.P()) + " is too short for " + std::to_string(M) +
                      " IMFs (need P >= " + std::to_string(8 * M) + ")");
  }
  if (node_embedding.rank() != 2 || node_embedding.dim(0) != ds.N()) {
    throw DimensionError("node embedding must be [N x dims] with N=" + std::to_string(ds.N()) + ", got " +
                         ad::shape_string(node_embedding.shape()));
  }
  const std::size_t count = ds.count(split);
  PreparedSplit out;
  out.inputs.resize(count);
  out.targets.resize(count);
  out.starts = ds.starts(split);
  parallel_for(count, threads, [&](std::size_t i) {
    auto s = ds.sample(split, i);
    model::ModelInputs in;
    try {
      in.imfs = vmd::decompose_all(s.power, vmd_cfg, 1);
    } catch (const DataError& e) {
      throw DataError(data::to_string(split) + " window " + std::to_string(i) + ": " + e.what());
    }
    in.power = std::move(s.power);
    in.weather = std::move(s.weather);
    in.node_embedding = node_embedding;
    out.inputs[i] = std::move(in);
    out.targets[i] = std::move(s.target);
  });
  return out;
}

ExperimentData ExperimentData::prepare(const data::WindowedDataset& ds, const vmd::VmdConfig& vmd_cfg,
                                       const ad::Tensor& node_embedding, unsigned threads) {
  ExperimentData d;
  d.train = prepare_split(ds, data::Split::train, vmd_cfg, node_embedding, threads);
  d.val = prepare_split(ds, data::Split::val, vmd_cfg, node_embedding, threads);
  d.test = prepare_split(ds, data::Split::test, vmd_cfg, node_embedding, threads);
  return d;
}

MetricsAccumulator::MetricsAccumulator(std::size_t horizon, std::size_t turbines)
    : horizon_(horizon), turbines_(turbines), abs_(horizon * turbines, 0.0), sq_(horizon * turbines, 0.0) {}

void MetricsAccumulator::add(std::span<const double> prediction, std::span<const double> target) {
  if (prediction.size() != target.size() || prediction.size() < horizon_ * turbines_ ||
      prediction.size() % turbines_ != 0) {
    throw DimensionError("metrics: prediction and target must both be [Q x N] with Q >= horizon");
  }
  for (std::size_t k = 0; k < horizon_ * turbines_; ++k) {
    const double e = prediction[k] - target[k];
    abs_[k] += std::abs(e);
    sq_[k] += e * e;
  }
  ++windows_;
}

MetricsReport MetricsAccumulator::report() const {
  if (windows_ == 0) throw DataError("cannot compute metrics on an empty split");
  MetricsReport r;
  r.windows = windows_;
  r.horizon = horizon_;
  r.mae_per_horizon.assign(horizon_, 0.0);
  r.mse_per_horizon.assign(horizon_, 0.0);
  r.mae_per_turbine.assign(turbines_, 0.0);
  r.mse_per_turbine.assign(turbines_, 0.0);
  double total_abs = 0.0, total_sq = 0.0;
  for (std::size_t q = 0; q < horizon_; ++q) {
    for (std::size_t n = 0; n < turbines_; ++n) {
      const double a = abs_[q * turbines_ + n], s = sq_[q * turbines_ + n];
      r.mae_per_horizon[q] += a;
      r.mse_per_horizon[q] += s;
      r.mae_per_turbine[n] += a;
      r.mse_per_turbine[n] += s;
      total_abs += a;
      total_sq += s;
    }
  }
  const double w = static_cast<double>(windows_);
  for (std::size_t q = 0; q < horizon_; ++q) {
    r.mae_per_horizon[q] /= w * static_cast<double>(turbines_);
    r.mse_per_horizon[q] /= w * static_cast<double>(turbines_);
  }
  for (std::size_t n = 0; n < turbines_; ++n) {
    r.mae_per_turbine[n] /= w * static_cast<double>(horizon_);
    r.mse_per_turbine[n] /= w * static_cast<double>(horizon_);
  }
  const double cells = w * static_cast<double>(horizon_ * turbines_);
  r.mae = total_abs / cells;
  r.mse = total_sq / cells;
  return r;
}

std::vector<ad::Tensor> predict(const model::HiformerParams& params, const model::ModelConfig& cfg,
                                const PreparedSplit& split, unsigned threads) {
  std::vector<ad::Tensor> out(split.size());
  parallel_for(split.size(), threads, [&](std::size_t i) {
    ad::NoGradGuard guard;
    model::ForwardContext ctx;
    out[i] = model::forward(split.inputs[i], params, cfg, ctx);
  });
  return out;
}

namespace {

std::size_t resolve_horizon(std::size_t horizon, std::size_t Q) {
  if (horizon == 0) return Q;
  if (horizon > Q) {
    throw ConfigError("horizon " + std::to_string(horizon) + " exceeds the trained horizon Q=" + std::to_string(Q));
  }
  return horizon;
}

}  // namespace

MetricsReport evaluate(const model::HiformerParams& params, const model::ModelConfig& cfg, const PreparedSplit& split,
                       std::size_t horizon, unsigned threads) {
  if (split.size() == 0) throw DataError("cannot evaluate on an empty split");
  const auto preds = predict(params, cfg, split, threads);
  MetricsAccumulator acc(resolve_horizon(horizon, cfg.Q), cfg.N);
  for (std::size_t i = 0; i < split.size(); ++i) acc.add(preds[i].data(), split.targets[i].data());
  return acc.report();
}

MetricsReport persistence_baseline(const PreparedSplit& split, std::size_t horizon) {
  if (split.size() == 0) throw DataError("cannot evaluate on an empty split");
  const std::size_t Q = split.targets[0].dim(0), N = split.targets[0].dim(1);
  const std::size_t P = split.inputs[0].power.dim(0);
  MetricsAccumulator acc(resolve_horizon(horizon, Q), N);
  std::vector<double> pred(Q * N);
  for (std::size_t i = 0; i < split.size(); ++i) {
    const auto x = split.inputs[i].power.data();
    for (std::size_t q = 0; q < Q; ++q) {
      for (std::size_t n = 0; n < N; ++n) pred[q * N + n] = x[(P - 1) * N + n];
    }
    acc.add(pred, split.targets[i].data());
  }
  return acc.report();
}

namespace {

struct Worker {
  model::HiformerParams params;
  std::vector<ad::Tensor> leaves;
};

std::vector<ad::Tensor> leaves_of(const model::HiformerParams& p) {
  std::vector<ad::Tensor> out;
  for (auto& [name, t] : p.named_parameters()) out.push_back(t);
  return out;
}

std::string parameter_norms(const model::HiformerParams& p) {
  std::map<std::string, double> groups;
  std::vector<std::string> order;
  for (const auto& [name, t] : p.named_parameters()) {
    std::string group = name.substr(0, name.find('.'));
    if (group == "layers") group = name.substr(0, name.find('.', 7));
    if (!groups.count(group)) order.push_back(group);
    double ss = 0.0;
    for (double v : t.data()) ss += v * v;
    groups[group] += ss;
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < order.size(); ++i) {
    os << (i ? ", " : "") << order[i] << "=" << std::sqrt(groups[order[i]]);
  }
  return os.str();
}

}  // namespace

TrainResult train(const model::HiformerParams& initial, const model::ModelConfig& model_cfg, const ExperimentData& data,
                  const TrainConfig& cfg, const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  model_cfg.validate();
  const auto& train_split = data.train;
  if (train_split.size() == 0) throw DataError("training split has no windows");

  TrainResult result;
  result.params = initial.clone();
  auto& master = result.params;
  auto master_leaves = leaves_of(master);
  for (auto& t : master_leaves) t.set_requires_grad(true);
  std::size_t n_params = 0;
  for (const auto& t : master_leaves) n_params += t.numel();

  Adam adam(master_leaves, AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});
  const std::size_t B = std::min(cfg.batch_size, train_split.size());
  const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(cfg.threads, B));
  std::vector<Worker> workers(n_workers);
  for (auto& w : workers) {
    w.params = master.clone();
    w.leaves = leaves_of(w.params);
    for (auto& t : w.leaves) t.set_requires_grad(true);
  }

  std::vector<std::vector<double>> sample_grads(B, std::vector<double>(n_params));
  std::vector<double> sample_loss(B);
  std::vector<double> grad(n_params);
  std::vector<std::size_t> order(train_split.size());
  std::iota(order.begin(), order.end(), 0);

  auto model_for_selection = master.clone();
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::seed_seq shuffle_seq{cfg.seed, static_cast<std::uint64_t>(epoch), std::uint64_t{0x5bu}};
    std::mt19937_64 shuffle_rng(shuffle_seq);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += B, ++batch_index) {
      const std::size_t bsize = std::min(B, order.size() - b0);
      for (auto& w : workers) w.params.copy_values_from(master);
      parallel_for(n_workers, n_workers, [&](std::size_t wi) {
        auto& w = workers[wi];
        for (std::size_t j = wi; j < bsize; j += n_workers) {
          const std::size_t k = order[b0 + j];
          std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(k)};
          std::mt19937_64 rng(seq);
          model::ForwardContext ctx{true, &rng};
          w.params.zero_grad();
          const auto pred = model::forward(train_split.inputs[k], w.params, model_cfg, ctx);
          const auto loss = cfg.loss == LossKind::mse ? ad::mse_loss(pred, train_split.targets[k])
                                                      : ad::mae_loss(pred, train_split.targets[k]);
          sample_loss[j] = loss.item();
          loss.backward();
          auto& g = sample_grads[j];
          std::size_t off = 0;
          for (const auto& t : w.leaves) {
            const auto gv = t.grad_view();
            if (gv.empty()) {
              std::fill(g.begin() + static_cast<std::ptrdiff_t>(off),
                        g.begin() + static_cast<std::ptrdiff_t>(off + t.numel()), 0.0);
            } else {
              std::copy(gv.begin(), gv.end(), g.begin() + static_cast<std::ptrdiff_t>(off));
            }
            off += t.numel();
          }
        }
      });
      double batch_loss = 0.0;
      for (std::size_t j = 0; j < bsize; ++j) batch_loss += sample_loss[j];
      if (!std::isfinite(batch_loss)) {
        throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index) + "; parameter norms: " + parameter_norms(master));
      }
      epoch_loss += batch_loss;
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t j = 0; j < bsize; ++j) {
        const auto& g = sample_grads[j];
        for (std::size_t k = 0; k < n_params; ++k) grad[k] += g[k];
      }
      const double inv = 1.0 / static_cast<double>(bsize);
      double norm_sq = 0.0;
      for (auto& g : grad) {
        g *= inv;
        norm_sq += g * g;
      }
      if (!std::isfinite(norm_sq)) {
        throw NumericalError("non-finite gradient at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index) + "; parameter norms: " + parameter_norms(master));
      }
      if (cfg.grad_clip && std::sqrt(norm_sq) > *cfg.grad_clip) {
        const double scale = *cfg.grad_clip / std::sqrt(norm_sq);
        for (auto& g : grad) g *= scale;
      }
      adam.step(grad);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = cfg.lr;
    rec.train_loss = epoch_loss / static_cast<double>(order.size());
    rec.val_loss = data.val.size() ? evaluate(master, model_cfg, data.val, 0, cfg.threads).mse
                                   : std::numeric_limits<double>::quiet_NaN();
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    const double score = data.val.size() ? rec.val_loss : rec.train_loss;
    if (!std::isfinite(score)) {
      throw NumericalError("non-finite validation loss at epoch " + std::to_string(epoch) +
                           "; parameter norms: " + parameter_norms(master));
    }
    if (score < best) {
      best = score;
      result.best_epoch = epoch;
      model_for_selection.copy_values_from(master);
      since_best = 0;
    } else if (cfg.early_stop_patience && ++since_best >= *cfg.early_stop_patience) {
      result.stopped_early = true;
      break;
    }
  }
  master.copy_values_from(model_for_selection);
  result.best_val_loss = best;
  return result;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  io::write_file_atomic(path, [&](std::ostream& os) {
    os << "epoch,train_loss,val_loss,lr\n";
    for (const auto& r : history) {
      os << r.epoch << ',' << io::format_double(r.train_loss) << ','
         << (std::isfinite(r.val_loss) ? io::format_double(r.val_loss) : std::string("nan")) << ','
         << io::format_double(r.lr) << '\n';
    }
  });
}

}  // namespace hiformer::train
