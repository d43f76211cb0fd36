#pragma once

#include <nlohmann/json.hpp>

#include "hiformer/graph.hpp"
#include "hiformer/model.hpp"
#include "hiformer/normalization.hpp"
#include "hiformer/synth.hpp"
#include "hiformer/trainer.hpp"
#include "hiformer/vmd.hpp"
#include "hiformer/windows.hpp"

// JSON conversions. Reading starts from the current field values, so absent
// keys keep their defaults; unknown keys and wrongly typed values raise
// ConfigError naming the key.

namespace hiformer::model {
void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);
}  // namespace hiformer::model

namespace hiformer::vmd {
void to_json(nlohmann::json& j, const VmdConfig& c);
void from_json(const nlohmann::json& j, VmdConfig& c);
}  // namespace hiformer::vmd

namespace hiformer::graph {
void to_json(nlohmann::json& j, const Node2vecConfig& c);
void from_json(const nlohmann::json& j, Node2vecConfig& c);
}  // namespace hiformer::graph

namespace hiformer::train {
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const NormStats& s);
void from_json(const nlohmann::json& j, NormStats& s);
void to_json(nlohmann::json& j, const MetricsReport& r);
}  // namespace hiformer::train

namespace hiformer::data {
void to_json(nlohmann::json& j, const WindowConfig& c);
void from_json(const nlohmann::json& j, WindowConfig& c);
void to_json(nlohmann::json& j, const SynthRecipe& r);
void from_json(const nlohmann::json& j, SynthRecipe& r);
}  // namespace hiformer::data

namespace hiformer {
/// Parses a JSON file, mapping I/O failures to DataError and syntax errors to ConfigError.
nlohmann::json read_json_file(const std::filesystem::path& path);
}  // namespace hiformer
