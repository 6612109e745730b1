#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"

#include "deam/fitting.hpp"

using namespace deam;

namespace {

// Small-but-real fit scaffolding: 2 groups x 9 pairs x 3 reps of lane-change
// trials keeps every evaluation around 50k accumulator steps.
struct Scaffold {
  fitting::FitSetup setup;
  TrialBatch batch;
  ModelParams truth;
  SummaryCurves targets;
};

Scaffold make_scaffold(std::uint64_t eval_seed) {
  Scaffold s;
  s.setup = fitting::default_setup(ScenarioKind::LaneChange);
  s.setup.design = {2, 3};
  s.setup.eval_seed = eval_seed;
  s.batch = build_batch(ScenarioKind::LaneChange, s.setup.design);
  s.truth = default_params(ScenarioKind::LaneChange);

  AnalysisOptions opts;
  opts.split_by_choice = false;
  const auto results = run_batch(s.batch, s.truth, s.setup.fix_config, eval_seed);
  s.targets = summarize(results, opts);
  return s;
}

}  // namespace

TEST_CASE("search space validation") {
  fitting::SearchSpace space;
  CHECK_NOTHROW(fitting::validate(space));

  fitting::SearchSpace point = space;
  point.d = {0.003, 0.003};  // pinning a gene to a point is allowed
  CHECK_NOTHROW(fitting::validate(point));

  fitting::SearchSpace bad = space;
  bad.m = {0.5, 0.2};
  CHECK_THROWS_AS(fitting::validate(bad), InvalidSpace);
  bad = space;
  bad.n = {0.5, 3.0};
  CHECK_THROWS_AS(fitting::validate(bad), InvalidSpace);
  bad = space;
  bad.b_start = {0.0, 5.0};
  CHECK_THROWS_AS(fitting::validate(bad), InvalidSpace);
  bad = space;
  bad.d = {-1e-3, 1e-2};
  CHECK_THROWS_AS(fitting::validate(bad), InvalidSpace);
  bad = space;
  bad.r = {0.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(fitting::validate(bad), InvalidSpace);
}

TEST_CASE("ga configuration validation") {
  fitting::GaConfig ga;
  CHECK_NOTHROW(fitting::validate(ga));

  fitting::GaConfig bad = ga;
  bad.population = 3;  // < elitism + 2
  CHECK_THROWS_AS(fitting::validate(bad), InvalidConfig);
  bad = ga;
  bad.tournament_k = 1;
  CHECK_THROWS_AS(fitting::validate(bad), InvalidConfig);
  bad = ga;
  bad.crossover_rate = 1.5;
  CHECK_THROWS_AS(fitting::validate(bad), InvalidConfig);
  bad = ga;
  bad.mutation_sd_fraction = 0.0;
  CHECK_THROWS_AS(fitting::validate(bad), InvalidConfig);
  bad = ga;
  bad.generations = 0;
  CHECK_THROWS_AS(fitting::validate(bad), InvalidConfig);
}

TEST_CASE("objective vanishes under common random numbers and scores known offsets") {
  const Scaffold s = make_scaffold(41);

  // Same parameters, same evaluation seed: the simulation replays the target
  // run exactly, so every curve term is zero.
  const double self = fitting::objective(s.truth, s.targets, s.batch, s.setup.fix_config,
                                         s.setup.eval_seed, s.setup.weights, s.setup.run);
  CHECK(self == 0.0);

  // Shift every choice-probability cell by +0.1 and weight out the other
  // curves: the objective must be exactly the mean squared offset.
  SummaryCurves shifted = s.targets;
  for (auto& group : shifted.choice_by_bias.groups) {
    for (auto& [key, cell] : group.cells) cell.value += 0.1;
  }
  fitting::ObjectiveWeights choice_only{1.0, 0.0, 0.0};
  const double off = fitting::objective(s.truth, shifted, s.batch, s.setup.fix_config,
                                        s.setup.eval_seed, choice_only, s.setup.run);
  CHECK(off == doctest::Approx(0.01).epsilon(1e-9));

  // A different seed leaves Monte Carlo residue, which the noise floor bounds.
  const double fresh = fitting::objective(s.truth, s.targets, s.batch, s.setup.fix_config,
                                          s.setup.eval_seed + 1, s.setup.weights, s.setup.run);
  CHECK(fresh > 0.0);
  const double floor = fitting::noise_floor(s.truth, s.targets, s.batch, s.setup.fix_config,
                                            999, 10, s.setup.weights, s.setup.run);
  CHECK(floor > 0.0);
  CHECK(self < floor);
}

TEST_CASE("a point search space reproduces the pinned parameters") {
  const Scaffold s = make_scaffold(43);
  fitting::SearchSpace space;
  space.d = {s.truth.d, s.truth.d};
  space.m = {s.truth.m, s.truth.m};
  space.n = {s.truth.n, s.truth.n};
  space.r = {s.truth.r, s.truth.r};
  space.b_start = {s.truth.b_start, s.truth.b_start};
  space.sigma = {s.truth.sigma, s.truth.sigma};

  fitting::GaConfig ga;
  ga.population = 4;
  ga.generations = 2;
  ga.elitism = 1;
  ga.seed = 5;

  const auto fit = fitting::fit_ga(s.targets, space, ga, s.setup);
  CHECK(fit.best_params.d == s.truth.d);
  CHECK(fit.best_params.m == s.truth.m);
  CHECK(fit.best_params.n == s.truth.n);
  CHECK(fit.best_params.r == s.truth.r);
  CHECK(fit.best_params.b_start == s.truth.b_start);
  CHECK(fit.best_params.sigma == s.truth.sigma);
  CHECK(fit.best_params.dt == s.setup.dt);
  CHECK(fit.best_params.sign_convention == s.setup.convention);

  // Targets came from the evaluation seed, so the pinned genome scores zero
  // in every generation.
  CHECK(fit.objective == 0.0);
  REQUIRE(fit.history.size() == 3);  // initial population + 2 generations
  for (const double h : fit.history) CHECK(h == 0.0);

  CHECK(fit.fresh_objectives.size() == 5);
  for (const double f : fit.fresh_objectives) CHECK(f > 0.0);

  CHECK(fit.induced_theta[0] == theta(0, s.truth.m, s.truth.n));
  CHECK(fit.induced_theta[1] == theta(1, s.truth.m, s.truth.n));
  CHECK(fit.induced_theta[2] == theta(2, s.truth.m, s.truth.n));
}

TEST_CASE("fit_ga stays inside the box, improves, and is seed-deterministic") {
  const Scaffold s = make_scaffold(47);
  fitting::SearchSpace space;  // full default box
  fitting::GaConfig ga;
  ga.population = 8;
  ga.generations = 3;
  ga.elitism = 2;
  ga.seed = 11;

  const auto fit = fitting::fit_ga(s.targets, space, ga, s.setup);

  CHECK(fit.best_params.d >= space.d.lower);
  CHECK(fit.best_params.d <= space.d.upper);
  CHECK(fit.best_params.m >= space.m.lower);
  CHECK(fit.best_params.m <= space.m.upper);
  CHECK(fit.best_params.n >= space.n.lower);
  CHECK(fit.best_params.n <= space.n.upper);
  CHECK(fit.best_params.r >= space.r.lower);
  CHECK(fit.best_params.r <= space.r.upper);
  CHECK(fit.best_params.b_start >= space.b_start.lower);
  CHECK(fit.best_params.b_start <= space.b_start.upper);
  CHECK(fit.best_params.sigma >= space.sigma.lower);
  CHECK(fit.best_params.sigma <= space.sigma.upper);

  REQUIRE(fit.history.size() == 4);
  for (std::size_t i = 1; i < fit.history.size(); ++i) {
    CHECK(fit.history[i] <= fit.history[i - 1]);  // best-so-far never regresses
  }
  CHECK(fit.objective == fit.history.back());

  const auto replay = fitting::fit_ga(s.targets, space, ga, s.setup);
  CHECK(replay.best_params.d == fit.best_params.d);
  CHECK(replay.best_params.m == fit.best_params.m);
  CHECK(replay.best_params.n == fit.best_params.n);
  CHECK(replay.best_params.r == fit.best_params.r);
  CHECK(replay.best_params.b_start == fit.best_params.b_start);
  CHECK(replay.best_params.sigma == fit.best_params.sigma);
  CHECK(replay.objective == fit.objective);
  CHECK(replay.history == fit.history);
}
