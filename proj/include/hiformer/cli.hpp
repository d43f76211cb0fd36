#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiformer/graph.hpp"
#include "hiformer/model.hpp"
#include "hiformer/trainer.hpp"
#include "hiformer/vmd.hpp"
#include "hiformer/windows.hpp"

namespace hiformer::cli {

/// Process exit codes.
enum ExitCode : int { ok = 0, internal = 1, data_error = 2, config_error = 3, numerical_error = 4 };

/// Everything a training run is configured by. P and Q are taken from the
/// model section for windowing, M for the VMD mode count and node_dims for
/// the node2vec width; N and C come from the dataset.
struct ExperimentConfig {
  model::ModelConfig model;
  train::TrainConfig train;
  vmd::VmdConfig vmd;
  graph::Node2vecConfig node2vec;
  data::WindowConfig window;
  double graph_epsilon = 0.05;

  /// Propagates the shared extents; throws ConfigError on a contradiction.
  void reconcile(std::size_t turbines, std::size_t features);
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Accepts a plain config file or a run manifest (uses its "config" section).
ExperimentConfig experiment_from_json(const nlohmann::json& j);

/// Entry point behind the `hiformer` executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hiformer::cli
