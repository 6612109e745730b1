#include "deam/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "deam/rng.hpp"

namespace deam::fitting {

namespace {

using Genome = std::array<double, 6>;

std::array<ParamRange, 6> gene_ranges(const SearchSpace& s) {
  return {s.d, s.m, s.n, s.r, s.b_start, s.sigma};
}

constexpr const char* gene_names[6] = {"d", "m", "n", "r", "b_start", "sigma"};

ModelParams to_params(const Genome& g, const FitSetup& setup) {
  ModelParams p;
  p.d = g[0];
  p.m = g[1];
  p.n = g[2];
  p.r = g[3];
  p.b_start = g[4];
  p.sigma = g[5];
  p.dt = setup.dt;
  p.t_max = setup.t_max;
  p.sign_convention = setup.convention;
  return p;
}

// Mean squared cell error between a target curve and its simulated
// counterpart. Standardization divides errors by the target curve's RMS value
// so RT (seconds) and switch counts compare on a common scale. Cells missing
// on the simulated side count as unit standardized error.
double curve_mse(const CurveByKey& target, const CurveByKey& sim, bool standardize) {
  double scale = 1.0;
  if (standardize) {
    double ss = 0.0;
    long n = 0;
    for (const auto& group : target.groups) {
      for (const auto& [key, cell] : group.cells) {
        ss += cell.value * cell.value;
        ++n;
      }
    }
    if (n > 0 && ss > 0.0) scale = std::sqrt(ss / static_cast<double>(n));
  }

  double sum = 0.0;
  long n = 0;
  for (std::size_t g = 0; g < target.groups.size(); ++g) {
    for (const auto& [key, cell] : target.groups[g].cells) {
      double err = 1.0;
      if (g < sim.groups.size()) {
        const auto it = sim.groups[g].cells.find(key);
        if (it != sim.groups[g].cells.end()) {
          err = (it->second.value - cell.value) / scale;
        }
      }
      sum += err * err;
      ++n;
    }
  }
  if (n == 0) throw InvalidState("target curve has no cells to compare");
  return sum / static_cast<double>(n);
}

}  // namespace

void validate(const SearchSpace& space) {
  const auto ranges = gene_ranges(space);
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (!std::isfinite(ranges[i].lower) || !std::isfinite(ranges[i].upper) ||
        ranges[i].lower > ranges[i].upper) {
      throw InvalidSpace(std::string("search range for ") + gene_names[i] +
                         " must satisfy lower <= upper");
    }
    if (ranges[i].lower < 0.0) {
      throw InvalidSpace(std::string("search range for ") + gene_names[i] +
                         " must be non-negative");
    }
  }
  if (space.n.lower < 1.0) throw InvalidSpace("search range for n must start at >= 1");
  if (!(space.b_start.lower > 0.0)) throw InvalidSpace("search range for b_start must be > 0");
}

void validate(const GaConfig& ga) {
  if (ga.population < ga.elitism + 2) {
    throw InvalidConfig("population must be at least elitism + 2");
  }
  if (ga.elitism < 0) throw InvalidConfig("elitism must be >= 0");
  if (ga.tournament_k < 2) throw InvalidConfig("tournament_k must be >= 2");
  if (!(ga.crossover_rate >= 0.0 && ga.crossover_rate <= 1.0)) {
    throw InvalidConfig("crossover_rate must lie in [0,1]");
  }
  if (!(ga.mutation_sd_fraction > 0.0)) throw InvalidConfig("mutation_sd_fraction must be > 0");
  if (ga.generations < 1) throw InvalidConfig("generations must be >= 1");
}

FitSetup default_setup(ScenarioKind scenario) {
  FitSetup setup;
  setup.scenario = scenario;
  setup.design = default_design(scenario);
  setup.fix_config = default_fixation_config(scenario);
  return setup;
}

double objective(const ModelParams& params, const SummaryCurves& targets, const TrialBatch& batch,
                 const FixationConfig& fix_config, std::uint64_t eval_seed,
                 const ObjectiveWeights& weights, const RunOptions& run) {
  const auto results = run_batch(batch, params, fix_config, eval_seed, run);
  AnalysisOptions opts;
  opts.split_by_choice = false;  // the objective compares pooled curves
  const SummaryCurves sim = summarize(results, opts);
  return weights.choice * curve_mse(targets.choice_by_bias, sim.choice_by_bias, false) +
         weights.rt * curve_mse(targets.rt_clarity.pooled, sim.rt_clarity.pooled, true) +
         weights.switches *
             curve_mse(targets.switches_clarity.pooled, sim.switches_clarity.pooled, true);
}

double noise_floor(const ModelParams& truth, const SummaryCurves& targets, const TrialBatch& batch,
                   const FixationConfig& fix_config, std::uint64_t seed, int n_rep,
                   const ObjectiveWeights& weights, const RunOptions& run) {
  if (n_rep < 1) throw InvalidParams("noise_floor needs n_rep >= 1");
  double worst = 0.0;
  for (int i = 0; i < n_rep; ++i) {
    const std::uint64_t eval_seed = rng::derive_key(seed, static_cast<std::uint64_t>(i), 3);
    worst = std::max(worst, objective(truth, targets, batch, fix_config, eval_seed, weights, run));
  }
  return 1.25 * worst;
}

FitResult fit_ga(const SummaryCurves& targets, const SearchSpace& space, const GaConfig& ga,
                 const FitSetup& setup) {
  validate(space);
  validate(ga);
  const auto ranges = gene_ranges(space);
  const TrialBatch batch = build_batch(setup.scenario, setup.design);
  const std::size_t pop_size = static_cast<std::size_t>(ga.population);

  // One private stream per (generation, individual); evaluation order and
  // threading cannot perturb the draw sequence.
  const auto stream_for = [&](int gen, std::size_t idx) {
    const std::uint64_t slot =
        static_cast<std::uint64_t>(gen) * static_cast<std::uint64_t>(ga.population) +
        static_cast<std::uint64_t>(idx);
    return rng::Stream(rng::derive_key(ga.seed, slot, 4));
  };
  const auto evaluate = [&](const Genome& g) {
    return objective(to_params(g, setup), targets, batch, setup.fix_config, setup.eval_seed,
                     setup.weights, setup.run);
  };
  const auto pick_index = [&](rng::Stream& s) {
    const auto idx = static_cast<std::size_t>(s.next_unit() * static_cast<double>(pop_size));
    return std::min(idx, pop_size - 1);
  };

  std::vector<Genome> pop(pop_size);
  std::vector<double> fitness(pop_size);
  for (std::size_t i = 0; i < pop_size; ++i) {
    rng::Stream s = stream_for(0, i);
    for (std::size_t j = 0; j < 6; ++j) {
      pop[i][j] = ranges[j].lower + s.next_unit() * (ranges[j].upper - ranges[j].lower);
    }
    fitness[i] = evaluate(pop[i]);
  }

  Genome best_genome = pop[0];
  double best_obj = fitness[0];
  for (std::size_t i = 1; i < pop_size; ++i) {
    if (fitness[i] < best_obj) {
      best_obj = fitness[i];
      best_genome = pop[i];
    }
  }
  FitResult result;
  result.history.reserve(static_cast<std::size_t>(ga.generations) + 1);
  result.history.push_back(best_obj);

  for (int gen = 1; gen <= ga.generations; ++gen) {
    std::vector<std::size_t> order(pop_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });

    std::vector<Genome> next(pop_size);
    std::vector<double> next_fitness(pop_size);
    for (std::size_t e = 0; e < static_cast<std::size_t>(ga.elitism); ++e) {
      next[e] = pop[order[e]];
      next_fitness[e] = fitness[order[e]];  // CRN objective is deterministic per genome
    }

    for (std::size_t i = static_cast<std::size_t>(ga.elitism); i < pop_size; ++i) {
      rng::Stream s = stream_for(gen, i);
      const auto tournament = [&]() -> const Genome& {
        std::size_t winner = pick_index(s);
        for (int k = 1; k < ga.tournament_k; ++k) {
          const std::size_t challenger = pick_index(s);
          if (fitness[challenger] < fitness[winner]) winner = challenger;
        }
        return pop[winner];
      };
      const Genome& pa = tournament();
      const Genome& pb = tournament();
      Genome child = pa;
      if (s.next_unit() < ga.crossover_rate) {
        for (std::size_t j = 0; j < 6; ++j) {
          if (s.next_unit() < 0.5) child[j] = pb[j];
        }
      }
      for (std::size_t j = 0; j < 6; ++j) {
        const double range = ranges[j].upper - ranges[j].lower;
        if (range <= 0.0) continue;
        child[j] += s.next_gaussian() * (ga.mutation_sd_fraction * range);
        child[j] = std::clamp(child[j], ranges[j].lower, ranges[j].upper);
      }
      next[i] = child;
      next_fitness[i] = evaluate(child);
    }

    pop = std::move(next);
    fitness = std::move(next_fitness);
    for (std::size_t i = 0; i < pop_size; ++i) {
      if (fitness[i] < best_obj) {
        best_obj = fitness[i];
        best_genome = pop[i];
      }
    }
    result.history.push_back(best_obj);
  }

  result.best_params = to_params(best_genome, setup);
  result.objective = best_obj;
  for (int i = 0; i < 5; ++i) {
    const std::uint64_t fresh =
        rng::derive_key(setup.eval_seed, static_cast<std::uint64_t>(i), 5);
    result.fresh_objectives.push_back(objective(result.best_params, targets, batch,
                                                setup.fix_config, fresh, setup.weights,
                                                setup.run));
  }
  for (int c = 0; c < 3; ++c) {
    result.induced_theta[static_cast<std::size_t>(c)] =
        theta(c, result.best_params.m, result.best_params.n);
  }
  return result;
}

}  // namespace deam::fitting
