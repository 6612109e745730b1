#pragma once

#include <cstdint>
#include <string>

#include "deam/core.hpp"
#include "deam/experiment.hpp"
#include "deam/fitting.hpp"
#include "deam/kernels.hpp"

namespace deam {

// Effective settings for a run: scenario-dependent defaults overlaid with the
// config file's explicit assignments. `threads` and `kernel` steer execution
// only and are excluded from the canonical text/hash, so outputs cannot
// depend on them.
struct RunConfig {
  ScenarioKind scenario = ScenarioKind::LaneChange;
  std::uint64_t seed = 0;
  ModelParams params;
  FixationConfig fixation;
  BatchDesign design;
  bool keep_fixations = false;
  AnalysisOptions analysis;
  fitting::GaConfig ga;
  fitting::SearchSpace space;
  fitting::ObjectiveWeights weights;
  std::uint64_t eval_seed = 1;
  int threads = 1;
  kernels::Kind kernel = kernels::Kind::Auto;
};

RunConfig default_config(ScenarioKind scenario);

// INI-style text: [section] headers, key = value lines, '#'/';' comments.
// Sections: run, model, fixation, batch, analysis, ga, space, weights.
// Unknown sections or keys fail fast with the line number.
RunConfig parse_config(const std::string& text);  // throws ConfigError
RunConfig load_config(const std::string& path);   // throws IoError / ConfigError

// Deterministic full echo of the effective config (minus threads/kernel).
std::string canonical_config(const RunConfig& config);

std::uint64_t config_hash(const RunConfig& config);  // FNV-1a of canonical_config

// Shortest round-trip decimal rendering shared by config echo and CSV/JSON
// writers.
std::string format_double(double value);

}  // namespace deam
