#include "hiformer/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>

#include "hiformer/checkpoint.hpp"
#include "hiformer/config_json.hpp"
#include "hiformer/dataset.hpp"
#include "hiformer/error.hpp"
#include "hiformer/io_util.hpp"
#include "hiformer/parallel.hpp"
#include "hiformer/synth.hpp"

#ifndef HIFORMER_REVISION
#define HIFORMER_REVISION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace hiformer::cli {

void ExperimentConfig::reconcile(std::size_t turbines, std::size_t features) {
  model.N = turbines;
  model.C = features;
  window.P = model.P;
  window.Q = model.Q;
  vmd.num_modes = static_cast<int>(model.M);
  node2vec.dims = model.node_dims;
  model.validate();
  train.validate();
  vmd.validate();
  node2vec.validate();
  window.validate();
  if (!(graph_epsilon >= 0.0 && graph_epsilon < 1.0)) throw ConfigError("graph.epsilon must lie in [0, 1)");
}

json to_json(const ExperimentConfig& cfg) {
  return json{{"model", cfg.model},       {"train", cfg.train},   {"vmd", cfg.vmd},
              {"node2vec", cfg.node2vec}, {"window", cfg.window}, {"graph", {{"epsilon", cfg.graph_epsilon}}}};
}

namespace {

// A key present in `section` must agree with the value owned by the model section.
template <class T>
void check_shared(const json& j, const char* section, const char* key, T model_value, const char* model_key) {
  if (!j.contains(section) || !j[section].contains(key)) return;
  T v{};
  try {
    v = j[section][key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(section) + "." + key + " has the wrong type");
  }
  if (v != model_value) {
    throw ConfigError(std::string(section) + "." + key + " (" + std::to_string(v) + ") contradicts model." +
                      model_key + " (" + std::to_string(model_value) + ")");
  }
}

}  // namespace

ExperimentConfig experiment_from_json(const json& in) {
  const json& j = in.contains("kind") && in.contains("config") ? in.at("config") : in;
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "model") {
      from_json(value, cfg.model);
    } else if (key == "train") {
      from_json(value, cfg.train);
    } else if (key == "vmd") {
      from_json(value, cfg.vmd);
    } else if (key == "node2vec") {
      from_json(value, cfg.node2vec);
    } else if (key == "window") {
      from_json(value, cfg.window);
    } else if (key == "graph") {
      if (!value.is_object()) throw ConfigError("graph must be a JSON object");
      for (const auto& [gk, gv] : value.items()) {
        if (gk != "epsilon") throw ConfigError("unknown key '" + gk + "' in graph");
        if (!gv.is_number()) throw ConfigError("graph.epsilon has the wrong type");
        cfg.graph_epsilon = gv.get<double>();
      }
    } else {
      throw ConfigError("unknown configuration section '" + key + "'");
    }
  }
  check_shared<std::size_t>(j, "window", "P", cfg.model.P, "P");
  check_shared<std::size_t>(j, "window", "Q", cfg.model.Q, "Q");
  check_shared<long long>(j, "vmd", "num_modes", static_cast<long long>(cfg.model.M), "M");
  check_shared<std::size_t>(j, "node2vec", "dims", cfg.model.node_dims, "node_dims");
  cfg.window.P = cfg.model.P;
  cfg.window.Q = cfg.model.Q;
  cfg.vmd.num_modes = static_cast<int>(cfg.model.M);
  cfg.node2vec.dims = cfg.model.node_dims;
  return cfg;
}

namespace {

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

unsigned threads() { return configured_threads(); }

data::RawDataset load_dataset(const fs::path& path, const std::string& schema) {
  return data::load_csv(path, data::schema_from_string(schema));
}

// Reorders coordinates read from a file to the dataset's turbine order.
std::vector<graph::Coord> coords_for(const data::RawDataset& raw, const fs::path& path) {
  std::vector<std::string> ids;
  const auto coords = graph::read_coords_csv(path, &ids);
  std::map<std::string, graph::Coord> by_id;
  for (std::size_t i = 0; i < ids.size(); ++i) by_id[ids[i]] = coords[i];
  std::vector<graph::Coord> out;
  for (const auto& id : raw.turbine_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError(path.string() + ": no coordinates for turbine " + id);
    out.push_back(it->second);
  }
  return out;
}

ad::Tensor node_embedding(const graph::TurbineGraph& g, const graph::Node2vecConfig& cfg, std::ostream& err) {
  if (g.edge_count() == 0) {
    err << "graph has no edges; using a zero node embedding\n";
    return ad::Tensor::zeros({g.n, cfg.dims});
  }
  return graph::node2vec(g, cfg, threads()).embeddings;
}

void write_json(const fs::path& path, const json& j) {
  io::write_file_atomic(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

json metrics_json(const train::MetricsReport& r) {
  json j;
  train::to_json(j, r);
  return j;
}

// ---------------------------------------------------------------- decompose

struct DecomposeArgs {
  std::string input;
  std::string schema = "generic";
  std::string channel = "power";
  std::string turbine;
  int modes = 7;
  double alpha = 2000.0;
  double tau = 0.0;
  double tol = 1e-7;
  int max_iters = 500;
  std::string out = "imfs";
};

int cmd_decompose(const DecomposeArgs& a, Streams s) {
  vmd::VmdConfig cfg;
  cfg.num_modes = a.modes;
  cfg.alpha = a.alpha;
  cfg.tau = a.tau;
  cfg.tol = a.tol;
  cfg.max_iters = a.max_iters;
  cfg.validate();
  auto raw = load_dataset(a.input, a.schema);
  data::clean_missing(raw);
  const std::size_t T = raw.rows(), N = raw.turbines(), C = raw.features();
  std::optional<std::size_t> feature;
  if (a.channel != "power") {
    auto it = std::find(raw.feature_names.begin(), raw.feature_names.end(), a.channel);
    if (it == raw.feature_names.end()) throw ConfigError("unknown channel '" + a.channel + "'");
    feature = static_cast<std::size_t>(it - raw.feature_names.begin());
  }
  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);
  std::string summary = "turbine,mode,center_freq,iterations,converged\n";
  bool any = false;
  for (std::size_t n = 0; n < N; ++n) {
    const auto& id = raw.turbine_ids[n];
    if (!a.turbine.empty() && id != a.turbine) continue;
    any = true;
    std::vector<double> x(T);
    for (std::size_t t = 0; t < T; ++t) x[t] = feature ? raw.weather[(t * N + n) * C + *feature] : raw.power_at(t, n);
    vmd::ImfSet imfs;
    try {
      imfs = vmd::decompose(x, cfg);
    } catch (const DataError& e) {
      throw DataError("turbine " + id + ": " + e.what());
    }
    vmd::write_imf_csv(out_dir / ("imfs_" + id + ".csv"), x, imfs);
    for (std::size_t m = 0; m < imfs.center_freqs.size(); ++m) {
      summary += id + "," + std::to_string(m + 1) + "," + io::format_double(imfs.center_freqs[m]) + "," +
                 std::to_string(imfs.iterations_used) + "," + (imfs.converged ? "1" : "0") + "\n";
    }
    s.err << "turbine " << id << ": " << imfs.iterations_used << " iterations"
          << (imfs.converged ? "" : " (not converged)") << '\n';
  }
  if (!any) throw DataError("turbine '" + a.turbine + "' not found in " + a.input);
  io::write_file_atomic(out_dir / "summary.csv", [&](std::ostream& os) { os << summary; });
  s.out << summary;
  return ok;
}

// -------------------------------------------------------------- embed-graph

struct EmbedArgs {
  std::string coords, adjacency, config, out = "embeddings.csv";
  std::size_t turbines = 0;
  std::optional<std::size_t> dims, walk_len, walks_per_node, epochs;
  std::optional<double> p, q, epsilon;
  std::optional<std::uint64_t> seed;
};

int cmd_embed(const EmbedArgs& a, Streams s) {
  graph::Node2vecConfig cfg;
  double eps = 0.05;
  if (!a.config.empty()) {
    const auto exp = experiment_from_json(read_json_file(a.config));
    cfg = exp.node2vec;
    eps = exp.graph_epsilon;
  }
  if (a.dims) cfg.dims = *a.dims;
  if (a.walk_len) cfg.walk_len = *a.walk_len;
  if (a.walks_per_node) cfg.walks_per_node = *a.walks_per_node;
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.p) cfg.p = *a.p;
  if (a.q) cfg.q = *a.q;
  if (a.seed) cfg.seed = *a.seed;
  if (a.epsilon) eps = *a.epsilon;
  cfg.validate();

  const int sources = !a.coords.empty() + !a.adjacency.empty() + (a.turbines > 0);
  if (sources != 1) throw ConfigError("give exactly one of --coords, --adjacency or --turbines");
  graph::TurbineGraph g;
  std::vector<std::string> ids;
  if (!a.coords.empty()) {
    const auto coords = graph::read_coords_csv(a.coords, &ids);
    g = graph::build_adjacency(coords, eps);
  } else if (!a.adjacency.empty()) {
    g = graph::read_adjacency_csv(a.adjacency);
  } else {
    g = graph::uniform_graph(a.turbines);
  }
  const auto result = graph::node2vec(g, cfg, threads());
  graph::write_embeddings_csv(a.out, result.embeddings, ids);
  s.out << "nodes " << g.n << ", edges " << g.edge_count() << ", dims " << cfg.dims << ", final loss "
        << io::format_double(result.epoch_loss.back()) << '\n';
  return ok;
}

// -------------------------------------------------------------------- synth

struct SynthArgs {
  std::string recipe, out = "synth.csv";
  std::optional<std::size_t> turbines, rows, features;
  std::optional<std::uint64_t> seed;
  std::optional<double> coupling, noise;
};

int cmd_synth(const SynthArgs& a, Streams s) {
  data::SynthRecipe r;
  if (!a.recipe.empty()) from_json(read_json_file(a.recipe), r);
  if (a.turbines) r.turbines = *a.turbines;
  if (a.rows) r.rows = *a.rows;
  if (a.features) r.features = *a.features;
  if (a.seed) r.seed = *a.seed;
  if (a.coupling) r.coupling = *a.coupling;
  if (a.noise) r.noise_std = *a.noise;
  const auto raw = data::synth_generate(r);
  const fs::path out(a.out);
  data::write_csv(raw, out);
  fs::path stem = out;
  stem.replace_extension();
  json rj;
  data::to_json(rj, r);
  write_json(stem.string() + ".recipe.json", rj);
  graph::write_coords_csv(stem.string() + ".coords.csv", raw.turbine_ids, raw.coords);
  s.out << "wrote " << raw.rows() << " rows x " << raw.turbines() << " turbines x " << raw.features()
        << " features to " << out.string() << "; analytic lagged correlation "
        << io::format_double(data::analytic_lagged_correlation(r)) << '\n';
  return ok;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
  std::string data, schema, coords, config, out = "run";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  bool quiet = false;
};

int cmd_train(TrainArgs a, Streams s) {
  ExperimentConfig cfg;
  json manifest_in;
  if (!a.config.empty()) {
    manifest_in = read_json_file(a.config);
    cfg = experiment_from_json(manifest_in);
  }
  const bool is_manifest = manifest_in.contains("kind") && manifest_in.contains("dataset");
  if (is_manifest) {
    const auto& d = manifest_in.at("dataset");
    if (a.data.empty()) a.data = d.value("path", "");
    if (a.schema.empty()) a.schema = d.value("schema", "generic");
    if (a.coords.empty() && manifest_in.contains("coords") && manifest_in["coords"].is_string()) {
      a.coords = manifest_in["coords"].get<std::string>();
    }
    if (!a.seed && manifest_in.contains("seed")) a.seed = manifest_in["seed"].get<std::uint64_t>();
  }
  if (a.data.empty()) throw ConfigError("train needs --data (or a manifest naming the dataset)");
  if (a.schema.empty()) a.schema = "generic";
  if (a.seed) cfg.train.seed = *a.seed;
  if (a.epochs) cfg.train.epochs = *a.epochs;
  cfg.train.threads = threads();

  const auto t_start = std::chrono::steady_clock::now();
  const std::string fingerprint = io::file_fingerprint(a.data);
  if (is_manifest) {
    const auto recorded = manifest_in["dataset"].value("fingerprint", "");
    if (!recorded.empty() && recorded != fingerprint) {
      s.err << "warning: dataset fingerprint " << fingerprint << " differs from the manifest's " << recorded << '\n';
    }
  }
  auto raw = load_dataset(a.data, a.schema);
  if (raw.clamped_negative) s.err << raw.clamped_negative << " negative power values clamped to 0\n";
  cfg.reconcile(raw.turbines(), raw.features());

  const auto ds = data::make_windows(raw, cfg.window);
  if (!a.quiet) {
    s.err << "windows: train " << ds.count(data::Split::train) << ", val " << ds.count(data::Split::val) << ", test "
          << ds.count(data::Split::test) << " (dropped " << ds.windows_dropped() << ")\n";
  }
  graph::TurbineGraph g = a.coords.empty() ? graph::uniform_graph(raw.turbines())
                                           : graph::build_adjacency(coords_for(raw, a.coords), cfg.graph_epsilon);
  const auto embedding = node_embedding(g, cfg.node2vec, s.err);
  const auto prepared = train::ExperimentData::prepare(ds, cfg.vmd, embedding, threads());

  const auto init = model::HiformerParams::init(cfg.model, cfg.train.seed);
  auto result = train::train(init, cfg.model, prepared, cfg.train, [&](const train::EpochRecord& r) {
    if (!a.quiet) {
      s.err << "epoch " << r.epoch << "/" << cfg.train.epochs << " train " << r.train_loss << " val " << r.val_loss
            << '\n';
    }
  });

  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);
  Checkpoint ck{cfg.model, std::move(result.params), ds.stats(), cfg.vmd, cfg.window, embedding, json::object()};
  ck.metadata = {{"best_epoch", result.best_epoch},
                 {"best_val_loss", result.best_val_loss},
                 {"seed", cfg.train.seed},
                 {"dataset_fingerprint", fingerprint},
                 {"turbines", raw.turbine_ids},
                 {"features", raw.feature_names}};
  save_checkpoint(out_dir / "checkpoint.bin", ck);
  train::write_history_csv(out_dir / "history.csv", result.history);
  graph::write_embeddings_csv(out_dir / "embeddings.csv", embedding, raw.turbine_ids);

  json metrics;
  const auto& test = prepared.test.size() ? prepared.test : prepared.train;
  metrics["split"] = prepared.test.size() ? "test" : "train";
  metrics["model"] = metrics_json(train::evaluate(ck.params, cfg.model, test, 0, threads()));
  metrics["persistence"] = metrics_json(train::persistence_baseline(test));
  metrics["best_epoch"] = result.best_epoch;
  metrics["stopped_early"] = result.stopped_early;
  write_json(out_dir / "metrics.json", metrics);

  json manifest;
  manifest["kind"] = "hiformer-run";
  manifest["config"] = to_json(cfg);
  manifest["dataset"] = {{"path", fs::absolute(a.data).string()}, {"schema", a.schema}, {"fingerprint", fingerprint}};
  manifest["coords"] = a.coords.empty() ? json(nullptr) : json(fs::absolute(a.coords).string());
  manifest["seed"] = cfg.train.seed;
  manifest["threads"] = cfg.train.threads;
  manifest["revision"] = HIFORMER_REVISION;
  manifest["config_fingerprint"] = config_fingerprint(cfg.model);
  manifest["artifacts"] = {{"checkpoint", "checkpoint.bin"},
                           {"history", "history.csv"},
                           {"metrics", "metrics.json"},
                           {"embeddings", "embeddings.csv"}};
  write_json(out_dir / "manifest.json", manifest);

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  s.out << "best epoch " << result.best_epoch << ", " << metrics["split"].get<std::string>() << " MSE "
        << metrics["model"]["mse"].get<double>() << " (persistence " << metrics["persistence"]["mse"].get<double>()
        << "), " << seconds << " s\n";
  return ok;
}

// --------------------------------------------------------- predict/evaluate

struct ApplyArgs {
  std::string checkpoint, data, schema = "generic", config, split = "test", out, forecast;
  std::optional<std::size_t> horizon;
};

struct Applied {
  Checkpoint ck;
  data::WindowedDataset ds;
  train::PreparedSplit split;
  std::size_t horizon;
};

Applied apply_checkpoint(const ApplyArgs& a) {
  Applied r{load_checkpoint(a.checkpoint), {}, {}, 0};
  auto& ck = r.ck;
  const auto raw = load_dataset(a.data, a.schema);
  model::ModelConfig expected = ck.config;
  if (!a.config.empty()) {
    auto cfg = experiment_from_json(read_json_file(a.config));
    cfg.reconcile(raw.turbines(), raw.features());
    expected = cfg.model;
  } else {
    expected.N = raw.turbines();
    expected.C = raw.features();
  }
  const auto have = config_fingerprint(ck.config), want = config_fingerprint(expected);
  if (have != want) {
    throw ConfigError("checkpoint configuration " + have + " does not match the requested configuration " + want +
                      " (checkpoint N=" + std::to_string(ck.config.N) + ", C=" + std::to_string(ck.config.C) +
                      "; data N=" + std::to_string(raw.turbines()) + ", C=" + std::to_string(raw.features()) + ")");
  }
  if (a.horizon && (*a.horizon == 0 || *a.horizon > ck.config.Q)) {
    throw ConfigError("horizon " + std::to_string(*a.horizon) + " is outside the trained range 1.." +
                      std::to_string(ck.config.Q));
  }
  r.horizon = a.horizon.value_or(ck.config.Q);
  r.ds = data::make_windows(raw, ck.window, &ck.stats);
  r.split = train::ExperimentData::prepare_split(r.ds, data::split_from_string(a.split), ck.vmd, ck.node_embedding,
                                                 threads());
  if (r.split.size() == 0) throw DataError("split '" + a.split + "' has no windows");
  return r;
}

void write_forecast(const fs::path& path, const Applied& r, const std::vector<ad::Tensor>& preds) {
  const std::size_t N = r.ck.config.N;
  const auto& ts = r.ds.timestamps();
  const auto& ids = r.ds.turbine_ids();
  const std::size_t P = r.ck.config.P;
  io::write_file_atomic(path, [&](std::ostream& os) {
    os << "timestamp,turbine,y_true,y_pred,window,step\n";
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const auto y = r.split.targets[i].data();
      const auto yh = preds[i].data();
      for (std::size_t q = 0; q < r.horizon; ++q) {
        const std::size_t row = r.split.starts[i] + P + q;
        for (std::size_t n = 0; n < N; ++n) {
          os << ts[row] << ',' << ids[n] << ',' << io::format_double(y[q * N + n]) << ','
             << io::format_double(yh[q * N + n]) << ',' << i << ',' << q + 1 << '\n';
        }
      }
    }
  });
}

int cmd_predict(const ApplyArgs& a, Streams s) {
  const auto r = apply_checkpoint(a);
  const auto preds = train::predict(r.ck.params, r.ck.config, r.split, threads());
  const fs::path out = a.out.empty() ? fs::path("forecast.csv") : fs::path(a.out);
  write_forecast(out, r, preds);
  s.out << "wrote " << preds.size() * r.horizon * r.ck.config.N << " forecast rows to " << out.string() << '\n';
  return ok;
}

int cmd_evaluate(const ApplyArgs& a, Streams s) {
  const auto r = apply_checkpoint(a);
  const auto preds = train::predict(r.ck.params, r.ck.config, r.split, threads());
  train::MetricsAccumulator acc(r.horizon, r.ck.config.N);
  for (std::size_t i = 0; i < preds.size(); ++i) acc.add(preds[i].data(), r.split.targets[i].data());
  json j;
  j["split"] = a.split;
  j["horizon"] = r.horizon;
  j["checkpoint_fingerprint"] = config_fingerprint(r.ck.config);
  j["model"] = metrics_json(acc.report());
  j["persistence"] = metrics_json(train::persistence_baseline(r.split, r.horizon));
  if (!a.forecast.empty()) write_forecast(a.forecast, r, preds);
  if (a.out.empty()) {
    s.out << j.dump(2) << '\n';
  } else {
    write_json(a.out, j);
    s.out << "MSE " << j["model"]["mse"].get<double>() << ", MAE " << j["model"]["mae"].get<double>()
          << " (persistence MSE " << j["persistence"]["mse"].get<double>() << ")\n";
  }
  return ok;
}

int guarded(Streams s, const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    s.err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const DimensionError& e) {
    s.err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const DataError& e) {
    s.err << "data error: " << e.what() << '\n';
    return data_error;
  } catch (const NumericalError& e) {
    s.err << "numerical error: " << e.what() << '\n';
    return numerical_error;
  } catch (const fs::filesystem_error& e) {
    s.err << "data error: " << e.what() << '\n';
    return data_error;
  } catch (const std::exception& e) {
    s.err << "internal error: " << e.what() << '\n';
    return internal;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Streams s{out, err};
  CLI::App app{"Wind power forecasting with frequency and weather attention"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(HIFORMER_REVISION));

  DecomposeArgs dec;
  auto* c_dec = app.add_subcommand("decompose", "Split each turbine's series into IMFs");
  c_dec->add_option("--input,-i", dec.input, "CSV file")->required();
  c_dec->add_option("--schema", dec.schema, "sdwpf, gefcom or generic");
  c_dec->add_option("--channel", dec.channel, "power or a weather column name");
  c_dec->add_option("--turbine", dec.turbine, "only this turbine id");
  c_dec->add_option("--modes,-M", dec.modes, "number of modes");
  c_dec->add_option("--alpha", dec.alpha, "bandwidth penalty");
  c_dec->add_option("--tau", dec.tau, "dual ascent step");
  c_dec->add_option("--tol", dec.tol, "convergence tolerance");
  c_dec->add_option("--max-iters", dec.max_iters, "iteration cap");
  c_dec->add_option("--out,-o", dec.out, "output directory");

  EmbedArgs emb;
  auto* c_emb = app.add_subcommand("embed-graph", "node2vec embedding of the turbine graph");
  c_emb->add_option("--coords", emb.coords, "turbine_id,x,y CSV");
  c_emb->add_option("--adjacency", emb.adjacency, "headerless N x N weight matrix");
  c_emb->add_option("--turbines", emb.turbines, "fully connected graph of this size");
  c_emb->add_option("--config", emb.config, "experiment config (node2vec and graph sections)");
  c_emb->add_option("--dims", emb.dims);
  c_emb->add_option("--walk-len", emb.walk_len);
  c_emb->add_option("--walks-per-node", emb.walks_per_node);
  c_emb->add_option("--epochs", emb.epochs);
  c_emb->add_option("--p", emb.p, "return parameter");
  c_emb->add_option("--q", emb.q, "in-out parameter");
  c_emb->add_option("--epsilon", emb.epsilon, "edge threshold");
  c_emb->add_option("--seed", emb.seed);
  c_emb->add_option("--out,-o", emb.out, "embedding CSV");

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth", "Generate a synthetic weather-coupled wind farm");
  c_syn->add_option("--recipe", syn.recipe, "recipe JSON");
  c_syn->add_option("--turbines", syn.turbines);
  c_syn->add_option("--rows", syn.rows);
  c_syn->add_option("--features", syn.features);
  c_syn->add_option("--seed", syn.seed);
  c_syn->add_option("--coupling", syn.coupling);
  c_syn->add_option("--noise", syn.noise, "power noise stddev");
  c_syn->add_option("--out,-o", syn.out, "CSV path; recipe and coordinates are written alongside");

  TrainArgs trn;
  auto* c_trn = app.add_subcommand("train", "Train a model and write checkpoint, history, metrics and manifest");
  c_trn->add_option("--data,-d", trn.data, "dataset CSV");
  c_trn->add_option("--schema", trn.schema, "sdwpf, gefcom or generic");
  c_trn->add_option("--coords", trn.coords, "turbine coordinates CSV");
  c_trn->add_option("--config,-c", trn.config, "experiment config or run manifest (JSON)");
  c_trn->add_option("--seed", trn.seed);
  c_trn->add_option("--epochs", trn.epochs);
  c_trn->add_option("--out,-o", trn.out, "output directory");
  c_trn->add_flag("--quiet,-q", trn.quiet);

  ApplyArgs prd;
  auto* c_prd = app.add_subcommand("predict", "Write a forecast CSV from a checkpoint");
  ApplyArgs evl;
  auto* c_evl = app.add_subcommand("evaluate", "Metrics of a checkpoint against the persistence baseline");
  for (auto [cmd, args] : {std::pair{c_prd, &prd}, std::pair{c_evl, &evl}}) {
    cmd->add_option("--checkpoint", args->checkpoint)->required();
    cmd->add_option("--data,-d", args->data)->required();
    cmd->add_option("--schema", args->schema);
    cmd->add_option("--config,-c", args->config, "config whose model section must match the checkpoint");
    cmd->add_option("--split", args->split, "train, val or test");
    cmd->add_option("--horizon", args->horizon, "steps 1..Q to score (default Q)");
    cmd->add_option("--out,-o", args->out);
  }
  c_evl->add_option("--forecast", evl.forecast, "also write the forecast CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::CallForVersion& e) {
    out << HIFORMER_REVISION << '\n';
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  }

  if (c_dec->parsed()) return guarded(s, [&] { return cmd_decompose(dec, s); });
  if (c_emb->parsed()) return guarded(s, [&] { return cmd_embed(emb, s); });
  if (c_syn->parsed()) return guarded(s, [&] { return cmd_synth(syn, s); });
  if (c_trn->parsed()) return guarded(s, [&] { return cmd_train(trn, s); });
  if (c_prd->parsed()) return guarded(s, [&] { return cmd_predict(prd, s); });
  if (c_evl->parsed()) return guarded(s, [&] { return cmd_evaluate(evl, s); });
  return internal;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"hiformer"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hiformer::cli
