#include "hiformer/model.hpp"

#include <cmath>
#include <random>

#include "hiformer/error.hpp"

namespace hiformer::model {

std::string to_string(GateMode mode) {
  switch (mode) {
    case GateMode::learned: return "learned";
    case GateMode::frequency_only: return "frequency_only";
    case GateMode::feature_only: return "feature_only";
  }
  return "learned";
}

GateMode gate_mode_from_string(const std::string& name) {
  if (name == "learned") return GateMode::learned;
  if (name == "frequency_only") return GateMode::frequency_only;
  if (name == "feature_only") return GateMode::feature_only;
  throw ConfigError("unknown gate mode '" + name + "' (expected learned, frequency_only or feature_only)");
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("model ") + name + " must be positive");
  };
  positive(P, "P");
  positive(Q, "Q");
  positive(N, "N");
  positive(C, "C");
  positive(M, "M");
  positive(D, "D");
  positive(K, "K");
  positive(zeta, "zeta");
  positive(L, "L");
  positive(ffn_hidden, "ffn_hidden");
  positive(node_dims, "node_dims");
  if (D != K * zeta) {
    throw ConfigError("model requires D == K * zeta, got D=" + std::to_string(D) + ", K=" + std::to_string(K) +
                      ", zeta=" + std::to_string(zeta) + (D % K ? " (D not divisible by K)" : ""));
  }
  if (D < 2) throw ConfigError("model D must be >= 2 for layer normalization");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("model dropout must lie in [0, 1)");
  if (projection_layers != 1 && projection_layers != 2) throw ConfigError("projection_layers must be 1 or 2");
}

std::size_t ModelConfig::parameter_count() const {
  auto lin = [](std::size_t in, std::size_t out) { return in * out + out; };
  auto mlp2 = [&](std::size_t in, std::size_t hidden, std::size_t out) { return lin(in, hidden) + lin(hidden, out); };
  auto attn = [&](std::size_t slices) { return 2 * lin(2 * D, D) + lin(D, D) + slices; };
  const std::size_t per_layer = attn(M) + attn(C) + 2 * D * D + N * D + 4 * D + mlp2(D, ffn_hidden, D);
  const std::size_t projection = projection_layers == 1 ? lin(D, Q) : mlp2(D, ffn_hidden, Q);
  return lin(P, D) + 2 * mlp2(P, ffn_hidden, D) + lin(node_dims, D) + L * per_layer + projection;
}

ad::Tensor Mlp::operator()(const ad::Tensor& x) const {
  ad::Tensor y = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    y = layers[i](y);
    if (i + 1 < layers.size()) y = ad::gelu(y);
  }
  return y;
}

namespace {

ad::Tensor uniform_leaf(ad::Shape shape, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  std::vector<double> v(ad::shape_numel(shape));
  for (auto& x : v) x = u(rng);
  ad::Tensor t(std::move(shape), std::move(v));
  t.set_requires_grad(true);
  return t;
}

ad::Tensor const_leaf(ad::Shape shape, double value) {
  ad::Tensor t(std::move(shape), value);
  t.set_requires_grad(true);
  return t;
}

Linear make_linear(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  return Linear{uniform_leaf({in, out}, 1.0 / std::sqrt(static_cast<double>(in)), rng), const_leaf({out}, 0.0)};
}

Mlp make_mlp(std::initializer_list<std::size_t> widths, std::mt19937_64& rng) {
  Mlp mlp;
  const std::vector<std::size_t> w(widths);
  for (std::size_t i = 0; i + 1 < w.size(); ++i) mlp.layers.push_back(make_linear(w[i], w[i + 1], rng));
  return mlp;
}

AttentionParams make_attention(std::size_t D, std::size_t slices, std::mt19937_64& rng) {
  AttentionParams a;
  a.query = make_linear(2 * D, D, rng);
  a.key = make_linear(2 * D, D, rng);
  a.value = make_linear(D, D, rng);
  a.context_logits = const_leaf({slices}, 0.0);
  return a;
}

void push_linear(std::vector<NamedTensor>& out, const std::string& prefix, const Linear& l) {
  out.emplace_back(prefix + ".weight", l.weight);
  out.emplace_back(prefix + ".bias", l.bias);
}

void push_mlp(std::vector<NamedTensor>& out, const std::string& prefix, const Mlp& m) {
  for (std::size_t i = 0; i < m.layers.size(); ++i) push_linear(out, prefix + "." + std::to_string(i), m.layers[i]);
}

void push_attention(std::vector<NamedTensor>& out, const std::string& prefix, const AttentionParams& a) {
  push_linear(out, prefix + ".query", a.query);
  push_linear(out, prefix + ".key", a.key);
  push_linear(out, prefix + ".value", a.value);
  out.emplace_back(prefix + ".context_logits", a.context_logits);
}

// Rebuilds `target` so that every tensor is a fresh leaf holding a copy.
void deep_copy(HiformerParams& target, const HiformerParams& source) {
  auto copy = [](ad::Tensor& t) { t = t.clone(); };
  auto copy_linear = [&](Linear& l) {
    copy(l.weight);
    copy(l.bias);
  };
  auto copy_mlp = [&](Mlp& m) {
    for (auto& l : m.layers) copy_linear(l);
  };
  target = source;
  copy_linear(target.input_embed);
  copy_mlp(target.imf_embed);
  copy_mlp(target.weather_embed);
  copy_linear(target.spatial_embed);
  for (auto& layer : target.layers) {
    for (AttentionParams* a : {&layer.frequency, &layer.feature}) {
      copy_linear(a->query);
      copy_linear(a->key);
      copy_linear(a->value);
      copy(a->context_logits);
    }
    copy(layer.gate.w_freq);
    copy(layer.gate.w_feat);
    copy(layer.gate.bias);
    copy(layer.norm1.gain);
    copy(layer.norm1.bias);
    copy(layer.norm2.gain);
    copy(layer.norm2.bias);
    copy_mlp(layer.ffn);
  }
  copy_mlp(target.projection);
}

void require_shape(const ad::Tensor& t, const ad::Shape& expected, const char* what) {
  if (t.shape() != expected) {
    throw DimensionError(std::string(what) + ": expected shape " + ad::shape_string(expected) + ", got " +
                         ad::shape_string(t.shape()));
  }
}

}  // namespace

HiformerParams HiformerParams::init(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  const std::size_t D = cfg.D, F = cfg.ffn_hidden;
  HiformerParams p;
  p.input_embed = make_linear(cfg.P, D, rng);
  p.imf_embed = make_mlp({cfg.P, F, D}, rng);
  p.weather_embed = make_mlp({cfg.P, F, D}, rng);
  p.spatial_embed = make_linear(cfg.node_dims, D, rng);
  for (std::size_t l = 0; l < cfg.L; ++l) {
    EncoderLayerParams layer;
    layer.frequency = make_attention(D, cfg.M, rng);
    layer.feature = make_attention(D, cfg.C, rng);
    const double gate_bound = 1.0 / std::sqrt(static_cast<double>(D));
    layer.gate.w_freq = uniform_leaf({D, D}, gate_bound, rng);
    layer.gate.w_feat = uniform_leaf({D, D}, gate_bound, rng);
    layer.gate.bias = const_leaf({cfg.N, D}, 0.0);
    layer.norm1 = {const_leaf({D}, 1.0), const_leaf({D}, 0.0)};
    layer.norm2 = {const_leaf({D}, 1.0), const_leaf({D}, 0.0)};
    layer.ffn = make_mlp({D, F, D}, rng);
    p.layers.push_back(std::move(layer));
  }
  p.projection = cfg.projection_layers == 1 ? make_mlp({D, cfg.Q}, rng) : make_mlp({D, F, cfg.Q}, rng);
  return p;
}

std::vector<NamedTensor> HiformerParams::named_parameters() const {
  std::vector<NamedTensor> out;
  push_linear(out, "input_embed", input_embed);
  push_mlp(out, "imf_embed", imf_embed);
  push_mlp(out, "weather_embed", weather_embed);
  push_linear(out, "spatial_embed", spatial_embed);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "layers." + std::to_string(l);
    const auto& layer = layers[l];
    push_attention(out, prefix + ".frequency", layer.frequency);
    push_attention(out, prefix + ".feature", layer.feature);
    out.emplace_back(prefix + ".gate.w_freq", layer.gate.w_freq);
    out.emplace_back(prefix + ".gate.w_feat", layer.gate.w_feat);
    out.emplace_back(prefix + ".gate.bias", layer.gate.bias);
    out.emplace_back(prefix + ".norm1.gain", layer.norm1.gain);
    out.emplace_back(prefix + ".norm1.bias", layer.norm1.bias);
    out.emplace_back(prefix + ".norm2.gain", layer.norm2.gain);
    out.emplace_back(prefix + ".norm2.bias", layer.norm2.bias);
    push_mlp(out, prefix + ".ffn", layer.ffn);
  }
  push_mlp(out, "projection", projection);
  return out;
}

std::size_t HiformerParams::count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named_parameters()) n += t.numel();
  return n;
}

HiformerParams HiformerParams::clone() const {
  HiformerParams out;
  deep_copy(out, *this);
  return out;
}

void HiformerParams::copy_values_from(const HiformerParams& other) {
  auto mine = named_parameters();
  auto theirs = other.named_parameters();
  if (mine.size() != theirs.size()) throw ContractError("parameter sets have different structure");
  for (std::size_t i = 0; i < mine.size(); ++i) {
    auto dst = mine[i].second.mutable_data();
    auto src = theirs[i].second.data();
    if (dst.size() != src.size()) throw DimensionError("parameter " + mine[i].first + " has a different size");
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

void HiformerParams::zero_grad() {
  for (auto& [name, t] : named_parameters()) t.zero_grad();
}

ad::Tensor embed_temporal(const ad::Tensor& imfs, const Mlp& mlp) {
  if (imfs.rank() != 3) throw DimensionError("embed_temporal expects [P x N x M], got " + ad::shape_string(imfs.shape()));
  if (mlp.layers.empty() || mlp.layers.front().weight.dim(0) != imfs.dim(0)) {
    throw DimensionError("embed_temporal: history length " + std::to_string(imfs.dim(0)) +
                         " does not match MLP input width");
  }
  return mlp(ad::permute(imfs, {1, 2, 0}));
}

ad::Tensor embed_weather(const ad::Tensor& weather, const Mlp& mlp) {
  if (weather.rank() != 3) {
    throw DimensionError("embed_weather expects [P x N x C], got " + ad::shape_string(weather.shape()));
  }
  if (mlp.layers.empty() || mlp.layers.front().weight.dim(0) != weather.dim(0)) {
    throw DimensionError("embed_weather: history length " + std::to_string(weather.dim(0)) +
                         " does not match MLP input width");
  }
  return mlp(ad::permute(weather, {1, 2, 0}));
}

ad::Tensor embed_spatial(const ad::Tensor& node_embedding, const Linear& map) {
  if (node_embedding.rank() != 2) {
    throw DimensionError("embed_spatial expects [N x dims], got " + ad::shape_string(node_embedding.shape()));
  }
  return map(node_embedding);
}

namespace {

ad::Tensor fuse_spatial(const ad::Tensor& spatial, const ad::Tensor& slices, const char* what) {
  if (spatial.rank() != 2 || slices.rank() != 3 || spatial.dim(0) != slices.dim(0) ||
      spatial.dim(1) != slices.dim(2)) {
    throw DimensionError(std::string(what) + ": spatial " + ad::shape_string(spatial.shape()) +
                         " does not match " + ad::shape_string(slices.shape()));
  }
  return ad::add(slices, ad::reshape(spatial, {spatial.dim(0), 1, spatial.dim(1)}));
}

}  // namespace

ad::Tensor fuse_ste(const ad::Tensor& spatial, const ad::Tensor& temporal) {
  return fuse_spatial(spatial, temporal, "fuse_ste");
}

ad::Tensor fuse_swe(const ad::Tensor& spatial, const ad::Tensor& weather) {
  return fuse_spatial(spatial, weather, "fuse_swe");
}

ad::Tensor context_reduce(const ad::Tensor& embedding, const ad::Tensor& logits) {
  if (embedding.rank() != 3 || logits.numel() != embedding.dim(1)) {
    throw DimensionError("context_reduce: embedding " + ad::shape_string(embedding.shape()) +
                         " does not match logits " + ad::shape_string(logits.shape()));
  }
  const std::size_t S = embedding.dim(1);
  const ad::Tensor weights = ad::reshape(ad::softmax(ad::reshape(logits, {S}), 0), {1, S, 1});
  return ad::sum_axis(ad::mul(embedding, weights), 1);
}

AttentionResult attention(const ad::Tensor& hidden, const ad::Tensor& context, const AttentionParams& params,
                          std::size_t heads) {
  if (hidden.rank() != 2 || hidden.shape() != context.shape()) {
    throw DimensionError("attention: hidden " + ad::shape_string(hidden.shape()) + " and context " +
                         ad::shape_string(context.shape()) + " must both be [N x D]");
  }
  const std::size_t D = hidden.dim(1);
  if (heads == 0 || D % heads != 0) {
    throw ConfigError("attention: D=" + std::to_string(D) + " is not divisible by K=" + std::to_string(heads));
  }
  const std::size_t zeta = D / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(zeta));

  const ad::Tensor joint = ad::concat({hidden, context}, 1);
  const ad::Tensor q = ad::gelu(params.query(joint));
  const ad::Tensor k = ad::gelu(params.key(joint));
  const ad::Tensor v = ad::gelu(params.value(hidden));

  AttentionResult result;
  std::vector<ad::Tensor> outputs;
  outputs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const ad::Tensor qh = heads == 1 ? q : ad::slice(q, 1, h * zeta, zeta);
    const ad::Tensor kh = heads == 1 ? k : ad::slice(k, 1, h * zeta, zeta);
    const ad::Tensor vh = heads == 1 ? v : ad::slice(v, 1, h * zeta, zeta);
    const ad::Tensor scores = ad::affine(ad::matmul(qh, ad::transpose(kh)), scale);
    ad::Tensor alpha = ad::softmax(scores, 1);
    outputs.push_back(ad::matmul(alpha, vh));
    result.weights.push_back(std::move(alpha));
  }
  result.output = heads == 1 ? outputs.front() : ad::concat(outputs, 1);
  return result;
}

ad::Tensor cd_gate(const ad::Tensor& h_st, const ad::Tensor& h_sw, const GateParams& params) {
  if (h_st.shape() != h_sw.shape() || h_st.shape() != params.bias.shape()) {
    throw DimensionError("cd_gate: H_ST " + ad::shape_string(h_st.shape()) + ", H_SW " +
                         ad::shape_string(h_sw.shape()) + " and bias " + ad::shape_string(params.bias.shape()) +
                         " must agree");
  }
  const ad::Tensor logits =
      ad::add(ad::add(ad::matmul(h_st, params.w_freq), ad::matmul(h_sw, params.w_feat)), params.bias);
  return ad::convex_mix(ad::sigmoid(logits), h_st, h_sw);
}

ad::Tensor encoder_layer(const ad::Tensor& hidden, const ad::Tensor& e_st, const ad::Tensor& e_sw,
                         const EncoderLayerParams& params, const ModelConfig& cfg, ForwardContext& ctx) {
  ad::Tensor h_o;
  switch (cfg.gate) {
    case GateMode::learned: {
      const auto h_st = attention(hidden, context_reduce(e_st, params.frequency.context_logits), params.frequency, cfg.K);
      const auto h_sw = attention(hidden, context_reduce(e_sw, params.feature.context_logits), params.feature, cfg.K);
      h_o = cd_gate(h_st.output, h_sw.output, params.gate);
      break;
    }
    case GateMode::frequency_only:
      h_o = attention(hidden, context_reduce(e_st, params.frequency.context_logits), params.frequency, cfg.K).output;
      break;
    case GateMode::feature_only:
      h_o = attention(hidden, context_reduce(e_sw, params.feature.context_logits), params.feature, cfg.K).output;
      break;
  }
  const ad::Tensor a1 = ad::layer_norm(ad::add(hidden, h_o), params.norm1.gain, params.norm1.bias, 1);
  ad::Tensor f = params.ffn(a1);
  if (ctx.training && cfg.dropout > 0.0) {
    if (!ctx.rng) throw ContractError("training with dropout needs an RNG");
    f = ad::dropout(f, cfg.dropout, true, *ctx.rng);
  }
  return ad::layer_norm(ad::add(a1, f), params.norm2.gain, params.norm2.bias, 1);
}

ad::Tensor forward(const ModelInputs& inputs, const HiformerParams& params, const ModelConfig& cfg,
                   ForwardContext& ctx) {
  require_shape(inputs.power, {cfg.P, cfg.N}, "forward: power window");
  require_shape(inputs.weather, {cfg.P, cfg.N, cfg.C}, "forward: weather window");
  require_shape(inputs.imfs, {cfg.P, cfg.N, cfg.M}, "forward: IMF stack");
  require_shape(inputs.node_embedding, {cfg.N, cfg.node_dims}, "forward: node embedding");
  if (params.layers.size() != cfg.L) throw DimensionError("forward: parameter set has a different layer count");

  const ad::Tensor e_s = embed_spatial(inputs.node_embedding, params.spatial_embed);
  const ad::Tensor e_st = fuse_ste(e_s, embed_temporal(inputs.imfs, params.imf_embed));
  const ad::Tensor e_sw = fuse_swe(e_s, embed_weather(inputs.weather, params.weather_embed));

  ad::Tensor h = ad::add(params.input_embed(ad::transpose(inputs.power)), e_s);
  for (std::size_t l = 0; l < cfg.L; ++l) {
    try {
      h = encoder_layer(h, e_st, e_sw, params.layers[l], cfg, ctx);
    } catch (const DimensionError& e) {
      throw DimensionError("encoder layer " + std::to_string(l) + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("encoder layer " + std::to_string(l) + ": " + e.what());
    }
  }
  return ad::transpose(params.projection(h));
}

}  // namespace hiformer::model
