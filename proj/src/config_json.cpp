#include "hiformer/config_json.hpp"

#include <set>

#include "hiformer/error.hpp"
#include "hiformer/io_util.hpp"

using nlohmann::json;

namespace hiformer {

namespace {

// Reads known keys from an object and rejects anything else.
class Reader {
 public:
  Reader(const json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j.is_object()) throw ConfigError(what_ + " must be a JSON object");
  }
  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + key + "' in " + what_);
    }
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(what_ + "." + key + " has the wrong type");
    }
  }

  template <class T, class Parse>
  void get_enum(const char* key, T& out, Parse parse) {
    std::string name;
    seen_.insert(key);
    if (j_.find(key) == j_.end()) return;
    get(key, name);
    out = parse(name);
  }

  template <class T>
  void get_optional(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    T v{};
    get(key, v);
    out = v;
  }

 private:
  const json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("file not found: " + path.string());
  try {
    return json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

}  // namespace hiformer

namespace hiformer::model {

void to_json(json& j, const ModelConfig& c) {
  j = json{{"P", c.P},
           {"Q", c.Q},
           {"N", c.N},
           {"C", c.C},
           {"M", c.M},
           {"D", c.D},
           {"K", c.K},
           {"zeta", c.zeta},
           {"L", c.L},
           {"dropout", c.dropout},
           {"ffn_hidden", c.ffn_hidden},
           {"node_dims", c.node_dims},
           {"projection_layers", c.projection_layers},
           {"gate", to_string(c.gate)}};
}

void from_json(const json& j, ModelConfig& c) {
  Reader r(j, "model");
  r.get("P", c.P);
  r.get("Q", c.Q);
  r.get("N", c.N);
  r.get("C", c.C);
  r.get("M", c.M);
  r.get("D", c.D);
  r.get("K", c.K);
  r.get("zeta", c.zeta);
  r.get("L", c.L);
  r.get("dropout", c.dropout);
  r.get("ffn_hidden", c.ffn_hidden);
  r.get("node_dims", c.node_dims);
  r.get("projection_layers", c.projection_layers);
  r.get_enum("gate", c.gate, gate_mode_from_string);
  r.done();
}

}  // namespace hiformer::model

namespace hiformer::vmd {

void to_json(json& j, const VmdConfig& c) {
  j = json{{"num_modes", c.num_modes}, {"alpha", c.alpha},         {"tau", c.tau},   {"tol", c.tol},
           {"max_iters", c.max_iters}, {"init", to_string(c.init)}, {"seed", c.seed}};
}

void from_json(const json& j, VmdConfig& c) {
  Reader r(j, "vmd");
  r.get("num_modes", c.num_modes);
  r.get("alpha", c.alpha);
  r.get("tau", c.tau);
  r.get("tol", c.tol);
  r.get("max_iters", c.max_iters);
  r.get_enum("init", c.init, init_mode_from_string);
  r.get("seed", c.seed);
  r.done();
}

}  // namespace hiformer::vmd

namespace hiformer::graph {

void to_json(json& j, const Node2vecConfig& c) {
  j = json{{"dims", c.dims},     {"walk_len", c.walk_len},   {"walks_per_node", c.walks_per_node},
           {"p", c.p},           {"q", c.q},                 {"window", c.window},
           {"negatives", c.negatives}, {"epochs", c.epochs}, {"lr", c.lr},
           {"seed", c.seed}};
}

void from_json(const json& j, Node2vecConfig& c) {
  Reader r(j, "node2vec");
  r.get("dims", c.dims);
  r.get("walk_len", c.walk_len);
  r.get("walks_per_node", c.walks_per_node);
  r.get("p", c.p);
  r.get("q", c.q);
  r.get("window", c.window);
  r.get("negatives", c.negatives);
  r.get("epochs", c.epochs);
  r.get("lr", c.lr);
  r.get("seed", c.seed);
  r.done();
}

}  // namespace hiformer::graph

namespace hiformer::train {

void to_json(json& j, const TrainConfig& c) {
  j = json{{"lr", c.lr},
           {"batch_size", c.batch_size},
           {"epochs", c.epochs},
           {"seed", c.seed},
           {"grad_clip", c.grad_clip ? json(*c.grad_clip) : json(nullptr)},
           {"early_stop_patience", c.early_stop_patience ? json(*c.early_stop_patience) : json(nullptr)},
           {"loss", to_string(c.loss)}};
}

void from_json(const json& j, TrainConfig& c) {
  Reader r(j, "train");
  r.get("lr", c.lr);
  r.get("batch_size", c.batch_size);
  r.get("epochs", c.epochs);
  r.get("seed", c.seed);
  r.get_optional("grad_clip", c.grad_clip);
  r.get_optional("early_stop_patience", c.early_stop_patience);
  r.get_enum("loss", c.loss, loss_kind_from_string);
  r.done();
}

void to_json(json& j, const NormStats& s) { j = json{{"names", s.names}, {"mean", s.mean}, {"stddev", s.stddev}}; }

void from_json(const json& j, NormStats& s) {
  Reader r(j, "stats");
  r.get("names", s.names);
  r.get("mean", s.mean);
  r.get("stddev", s.stddev);
  r.done();
}

void to_json(json& j, const MetricsReport& m) {
  j = json{{"mae", m.mae},
           {"mse", m.mse},
           {"windows", m.windows},
           {"horizon", m.horizon},
           {"mae_per_horizon", m.mae_per_horizon},
           {"mse_per_horizon", m.mse_per_horizon},
           {"mae_per_turbine", m.mae_per_turbine},
           {"mse_per_turbine", m.mse_per_turbine}};
}

}  // namespace hiformer::train

namespace hiformer::data {

void to_json(json& j, const WindowConfig& c) {
  j = json{{"P", c.P},           {"Q", c.Q},           {"ratio", c.ratio},
           {"stride", c.stride}, {"max_gap", c.max_gap}, {"max_invalid_fraction", c.max_invalid_fraction}};
}

void from_json(const json& j, WindowConfig& c) {
  Reader r(j, "window");
  r.get("P", c.P);
  r.get("Q", c.Q);
  r.get("ratio", c.ratio);
  r.get("stride", c.stride);
  r.get("max_gap", c.max_gap);
  r.get("max_invalid_fraction", c.max_invalid_fraction);
  r.done();
}

void to_json(json& j, const SynthRecipe& r) {
  j = json{{"turbines", r.turbines},
           {"rows", r.rows},
           {"features", r.features},
           {"seed", r.seed},
           {"step_seconds", r.step_seconds},
           {"base", r.base},
           {"diurnal_amp", r.diurnal_amp},
           {"diurnal_period", r.diurnal_period},
           {"weekly_amp", r.weekly_amp},
           {"weekly_period", r.weekly_period},
           {"phase_spread", r.phase_spread},
           {"wind_mean", r.wind_mean},
           {"wind_std", r.wind_std},
           {"wind_ar", r.wind_ar},
           {"regional_share", r.regional_share},
           {"coupling", r.coupling},
           {"lag", r.lag},
           {"noise_std", r.noise_std},
           {"noise_ar", r.noise_ar},
           {"spacing", r.spacing},
           {"analytic_lagged_correlation", analytic_lagged_correlation(r)}};
}

void from_json(const json& j, SynthRecipe& r) {
  Reader rd(j, "recipe");
  rd.get("turbines", r.turbines);
  rd.get("rows", r.rows);
  rd.get("features", r.features);
  rd.get("seed", r.seed);
  rd.get("step_seconds", r.step_seconds);
  rd.get("base", r.base);
  rd.get("diurnal_amp", r.diurnal_amp);
  rd.get("diurnal_period", r.diurnal_period);
  rd.get("weekly_amp", r.weekly_amp);
  rd.get("weekly_period", r.weekly_period);
  rd.get("phase_spread", r.phase_spread);
  rd.get("wind_mean", r.wind_mean);
  rd.get("wind_std", r.wind_std);
  rd.get("wind_ar", r.wind_ar);
  rd.get("regional_share", r.regional_share);
  rd.get("coupling", r.coupling);
  rd.get("lag", r.lag);
  rd.get("noise_std", r.noise_std);
  rd.get("noise_ar", r.noise_ar);
  rd.get("spacing", r.spacing);
  double ignored = 0.0;
  rd.get("analytic_lagged_correlation", ignored);  // derived, written for reference
  rd.done();
}

}  // namespace hiformer::data
