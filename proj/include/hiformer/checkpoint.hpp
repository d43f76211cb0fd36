#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "hiformer/model.hpp"
#include "hiformer/normalization.hpp"
#include "hiformer/vmd.hpp"
#include "hiformer/windows.hpp"

namespace hiformer {

/// Everything needed to forecast on new data: the network, the statistics it
/// was trained under, how its inputs were built, and the node embedding.
struct Checkpoint {
  model::ModelConfig config;
  model::HiformerParams params;
  train::NormStats stats;
  vmd::VmdConfig vmd;
  data::WindowConfig window;
  ad::Tensor node_embedding;  // [N x node_dims]
  nlohmann::json metadata = nlohmann::json::object();
};

/// 16 hex digits identifying a model configuration.
std::string config_fingerprint(const model::ModelConfig& cfg);

/// Atomic write; values are stored bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// DataError on missing, truncated or corrupted files; ConfigError when the
/// stored fingerprint does not match the stored configuration.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hiformer
