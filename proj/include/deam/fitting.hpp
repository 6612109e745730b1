#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "deam/experiment.hpp"

namespace deam::fitting {

struct ParamRange {
  double lower = 0.0;
  double upper = 0.0;  // lower == upper pins the gene to a point
};

// Box bounds for the six model parameters; defaults bracket both scenarios'
// fitted values.
struct SearchSpace {
  ParamRange d{1e-4, 1e-2};
  ParamRange m{0.0, 1.0};
  ParamRange n{1.0, 3.0};
  ParamRange r{0.0, 1.0};
  ParamRange b_start{0.5, 5.0};
  ParamRange sigma{1e-3, 0.1};
};

void validate(const SearchSpace& space);  // throws InvalidSpace

struct GaConfig {
  int population = 64;
  int generations = 100;
  int tournament_k = 3;
  double crossover_rate = 0.7;
  double mutation_sd_fraction = 0.1;  // of each gene's range
  int elitism = 2;
  std::uint64_t seed = 0;
};

void validate(const GaConfig& ga);  // throws InvalidConfig

struct ObjectiveWeights {
  double choice = 1.0;
  double rt = 1.0;
  double switches = 1.0;
};

// Everything a fit needs besides targets/space/GA hyperparameters: the batch
// to simulate per evaluation, fixed integration settings copied into every
// candidate, and the common-random-numbers evaluation seed that makes the
// fitness landscape deterministic.
struct FitSetup {
  ScenarioKind scenario = ScenarioKind::LaneChange;
  BatchDesign design = BatchDesign{8, 20};
  FixationConfig fix_config;
  double dt = 0.001;
  double t_max = 10.0;
  SignConvention convention = SignConvention::AddmStandard;
  std::uint64_t eval_seed = 1;
  ObjectiveWeights weights;
  RunOptions run;
};

FitSetup default_setup(ScenarioKind scenario);

// Weighted sum of per-curve MSEs between simulated and target summaries:
// choice-by-bias as-is; RT and switch curves standardized by the target
// curve's RMS scale. A target cell the simulation left empty (all timeouts)
// contributes a worst-case unit error, steering the search away from
// degenerate parameter regions.
double objective(const ModelParams& params, const SummaryCurves& targets, const TrialBatch& batch,
                 const FixationConfig& fix_config, std::uint64_t eval_seed,
                 const ObjectiveWeights& weights = {}, const RunOptions& run = {});

// 1.25 x the largest of `n_rep` self-comparison objectives under fresh seeds:
// the resolution limit below which objective differences are Monte Carlo
// noise.
double noise_floor(const ModelParams& truth, const SummaryCurves& targets, const TrialBatch& batch,
                   const FixationConfig& fix_config, std::uint64_t seed, int n_rep = 20,
                   const ObjectiveWeights& weights = {}, const RunOptions& run = {});

struct FitResult {
  ModelParams best_params;
  double objective = 0.0;                 // at the common evaluation seed
  std::vector<double> history;            // best-so-far per generation (non-increasing)
  std::vector<double> fresh_objectives;   // best re-evaluated on 5 fresh seeds
  std::array<double, 3> induced_theta{};  // theta(clarity) at 0,1,2 — the identified quantity
};

// Tournament selection, uniform crossover, per-gene Gaussian mutation clamped
// to the box, elitism. Deterministic for a given GaConfig::seed.
FitResult fit_ga(const SummaryCurves& targets, const SearchSpace& space, const GaConfig& ga,
                 const FitSetup& setup);

}  // namespace deam::fitting
