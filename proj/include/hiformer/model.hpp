#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hiformer/ops.hpp"
#include "hiformer/tensor.hpp"

// Layout note: hidden states are token-major. The encoder state H is stored
// as [N x D] (one row per turbine), embeddings as [N x M x D] / [N x C x D].
// Data-side tensors keep their time-major layout: X [P x N], W [P x N x C],
// e^IMF [P x N x M] and the forecast [Q x N].

namespace hiformer::model {

enum class GateMode {
  learned,         // rho = sigmoid(H_ST B1 + H_SW B2 + b)
  frequency_only,  // rho = 1: feature-attention path disabled
  feature_only,    // rho = 0: frequency-attention path disabled
};

std::string to_string(GateMode mode);
GateMode gate_mode_from_string(const std::string& name);

struct ModelConfig {
  std::size_t P = 288;  // history steps (2 days at 10 min)
  std::size_t Q = 144;  // horizon steps
  std::size_t N = 1;    // turbines
  std::size_t C = 1;    // weather features
  std::size_t M = 7;    // IMFs
  std::size_t D = 512;  // correlation dimension
  std::size_t K = 32;   // attention heads
  std::size_t zeta = 16;
  std::size_t L = 5;
  double dropout = 0.1;
  std::size_t ffn_hidden = 2048;
  std::size_t node_dims = 64;  // width of the node2vec embedding
  std::size_t projection_layers = 2;
  GateMode gate = GateMode::learned;

  void validate() const;
  /// Closed-form count of learnable scalars.
  std::size_t parameter_count() const;
};

/// y = x W + b over the last axis.
struct Linear {
  ad::Tensor weight;  // [in x out]
  ad::Tensor bias;    // [out]

  ad::Tensor operator()(const ad::Tensor& x) const { return ad::linear(x, weight, bias); }
};

/// Stack of Linear layers with GELU between consecutive layers.
struct Mlp {
  std::vector<Linear> layers;

  ad::Tensor operator()(const ad::Tensor& x) const;
};

struct AttentionParams {
  Linear query;               // [2D -> D], GELU applied
  Linear key;                 // [2D -> D], GELU applied
  Linear value;               // [D -> D], GELU applied
  ad::Tensor context_logits;  // [M] or [C], softmax-normalized by context_reduce
};

struct GateParams {
  ad::Tensor w_freq;  // [D x D]
  ad::Tensor w_feat;  // [D x D]
  ad::Tensor bias;    // [N x D], one column per turbine
};

struct LayerNormParams {
  ad::Tensor gain;  // [D]
  ad::Tensor bias;  // [D]
};

struct EncoderLayerParams {
  AttentionParams frequency;
  AttentionParams feature;
  GateParams gate;
  LayerNormParams norm1;
  LayerNormParams norm2;
  Mlp ffn;  // D -> ffn_hidden -> D
};

using NamedTensor = std::pair<std::string, ad::Tensor>;

struct HiformerParams {
  Linear input_embed;  // P -> D, builds H^(0)
  Mlp imf_embed;       // P -> ffn_hidden -> D
  Mlp weather_embed;   // P -> ffn_hidden -> D
  Linear spatial_embed;  // node_dims -> D
  std::vector<EncoderLayerParams> layers;
  Mlp projection;  // D -> Q (one layer) or D -> ffn_hidden -> Q

  /// Fan-in scaled uniform weights in +-1/sqrt(fan_in), zero biases, unit
  /// layer-norm gains, uniform context logits, zero gate bias.
  static HiformerParams init(const ModelConfig& cfg, std::uint64_t seed);

  /// Stable, unique names in a fixed order.
  std::vector<NamedTensor> named_parameters() const;
  std::size_t count() const;
  HiformerParams clone() const;
  void copy_values_from(const HiformerParams& other);
  void zero_grad();
};

struct ForwardContext {
  bool training = false;
  ad::Rng* rng = nullptr;  // required when training with dropout > 0
};

struct ModelInputs {
  ad::Tensor power;           // X [P x N], Z-scored
  ad::Tensor weather;         // W [P x N x C], Z-scored
  ad::Tensor imfs;            // e^IMF [P x N x M]
  ad::Tensor node_embedding;  // e^node [N x node_dims]
};

/// e^IMF [P x N x M] -> e^T [N x M x D]; each length-P series goes through the MLP.
ad::Tensor embed_temporal(const ad::Tensor& imfs, const Mlp& mlp);
/// W [P x N x C] -> e^W [N x C x D].
ad::Tensor embed_weather(const ad::Tensor& weather, const Mlp& mlp);
/// e^node [N x node_dims] -> e^S [N x D].
ad::Tensor embed_spatial(const ad::Tensor& node_embedding, const Linear& map);

/// e^S [N x D] broadcast-added over the slice axis of e [N x S x D].
ad::Tensor fuse_ste(const ad::Tensor& spatial, const ad::Tensor& temporal);
ad::Tensor fuse_swe(const ad::Tensor& spatial, const ad::Tensor& weather);

/// [N x S x D] -> [N x D] with weights softmax(logits) over S.
ad::Tensor context_reduce(const ad::Tensor& embedding, const ad::Tensor& logits);

struct AttentionResult {
  ad::Tensor output;                // [N x D]
  std::vector<ad::Tensor> weights;  // per head, [N x N], rows = target turbine
};

/// Unmasked multi-head attention across turbines. Queries and keys come from
/// H concatenated with the context, values from H alone; every projection is
/// GELU(xB + b); scores are scaled by 1/sqrt(zeta).
AttentionResult attention(const ad::Tensor& hidden, const ad::Tensor& context, const AttentionParams& params,
                          std::size_t heads);

/// H_O = rho * H_ST + (1 - rho) * H_SW with rho = sigmoid(H_ST B1 + H_SW B2 + b).
ad::Tensor cd_gate(const ad::Tensor& h_st, const ad::Tensor& h_sw, const GateParams& params);

ad::Tensor encoder_layer(const ad::Tensor& hidden, const ad::Tensor& e_st, const ad::Tensor& e_sw,
                         const EncoderLayerParams& params, const ModelConfig& cfg, ForwardContext& ctx);

/// Full network: X^ [Q x N].
ad::Tensor forward(const ModelInputs& inputs, const HiformerParams& params, const ModelConfig& cfg,
                   ForwardContext& ctx);

}  // namespace hiformer::model
