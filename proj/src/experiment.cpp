#include "deam/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <set>
#include <string>
#include <thread>
#include <unordered_set>

#include "deam/rng.hpp"

namespace deam {

BatchDesign default_design(ScenarioKind s) {
  if (s == ScenarioKind::LaneChange) return {8, 20};
  return {6, 2320};
}

TrialBatch build_batch(ScenarioKind s, int n_groups, long count) {
  if (n_groups < 1) throw InvalidDesign("n_groups must be >= 1");
  if (count < 1) throw InvalidDesign("count must be >= 1");

  TrialBatch batch;
  batch.scenario = s;
  batch.groups.resize(static_cast<std::size_t>(n_groups));

  std::uint64_t trial_id = 0;
  if (s == ScenarioKind::LaneChange) {
    // Each group enumerates all 9 (z1, z2) pairs, `count` repetitions apiece.
    for (auto& group : batch.groups) {
      group.reserve(static_cast<std::size_t>(9 * count));
      for (int z1 = 1; z1 <= 3; ++z1) {
        for (int z2 = 1; z2 <= 3; ++z2) {
          for (long rep = 0; rep < count; ++rep) {
            group.push_back({make_condition(s, z1, z2), trial_id++});
          }
        }
      }
    }
  } else {
    // `count` trials dealt round-robin; z1 cycles within each group so that
    // per-group condition counts differ by at most one.
    for (long t = 0; t < count; ++t) {
      auto& group = batch.groups[static_cast<std::size_t>(t % n_groups)];
      const int z1 = 1 + static_cast<int>(group.size() % 3);
      group.push_back({make_condition(s, z1, 2), trial_id++});
    }
  }
  return batch;
}

std::vector<TrialResult> run_batch(const TrialBatch& batch, const ModelParams& params,
                                   const FixationConfig& fix_config, std::uint64_t master_seed,
                                   const RunOptions& options) {
  validate(params);
  validate(batch.scenario, fix_config);

  struct Slot {
    const BatchTrial* trial;
    int group;
  };
  std::vector<Slot> flat;
  flat.reserve(batch.size());
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(batch.size());
  for (std::size_t g = 0; g < batch.groups.size(); ++g) {
    for (const auto& trial : batch.groups[g]) {
      if (!seen.insert(trial.trial_id).second) {
        throw InvalidDesign("duplicate trial_id " + std::to_string(trial.trial_id) +
                            " would reuse a random stream");
      }
      flat.push_back({&trial, static_cast<int>(g)});
    }
  }

  int threads = options.threads;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  const kernels::Kind kind = kernels::resolve(options.kernel);

  std::vector<TrialResult> out(flat.size());
  // Blocks bound the memory held by generated schedules on large batches.
  constexpr std::size_t block_size = 65536;
  std::vector<FixationSchedule> schedules;
  std::vector<kernels::TrialTask> tasks;
  for (std::size_t lo = 0; lo < flat.size(); lo += block_size) {
    const std::size_t nb = std::min(block_size, flat.size() - lo);
    schedules.assign(nb, {});
    tasks.assign(nb, {});
    for (std::size_t i = 0; i < nb; ++i) {
      const Slot& slot = flat[lo + i];
      rng::Stream sched_stream(rng::derive_key(master_seed, slot.trial->trial_id, 0));
      schedules[i] = generate_schedule(batch.scenario, fix_config, params.t_max, sched_stream);
      tasks[i] = {slot.trial->condition, &schedules[i],
                  rng::derive_key(master_seed, slot.trial->trial_id, 1)};
    }

    std::vector<TrialOutcome> outcomes(nb);
    const std::span<const kernels::TrialTask> task_span(tasks.data(), nb);
    if (threads == 1 || nb < 256) {
      auto res = kernels::run_trials(task_span, params, kind);
      std::move(res.begin(), res.end(), outcomes.begin());
    } else {
      const int nt = std::min<int>(threads, static_cast<int>(nb));
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nt));
      pool.reserve(static_cast<std::size_t>(nt));
      for (int w = 0; w < nt; ++w) {
        const std::size_t begin = nb * static_cast<std::size_t>(w) / static_cast<std::size_t>(nt);
        const std::size_t end =
            nb * static_cast<std::size_t>(w + 1) / static_cast<std::size_t>(nt);
        pool.emplace_back([&, w, begin, end] {
          try {
            auto res = kernels::run_trials(task_span.subspan(begin, end - begin), params, kind);
            std::move(res.begin(), res.end(), outcomes.begin() + static_cast<std::ptrdiff_t>(begin));
          } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
      }
    }

    for (std::size_t i = 0; i < nb; ++i) {
      const Slot& slot = flat[lo + i];
      TrialResult& r = out[lo + i];
      r.trial_id = slot.trial->trial_id;
      r.group = slot.group;
      r.condition = slot.trial->condition;
      r.choice = outcomes[i].choice;
      r.rt = outcomes[i].rt;
      r.n_switches = outcomes[i].n_switches;
      r.last_fixation = outcomes[i].last_fixation;
      if (options.keep_fixations) r.fixations = std::move(schedules[i].segments);
    }
  }
  return out;
}

namespace {

bool decided(const TrialResult& r) { return r.choice != Choice::Timeout; }

int group_count(const std::vector<TrialResult>& results) {
  int max_group = -1;
  for (const auto& r : results) {
    if (r.group < 0) throw InvalidState("negative group id in results");
    max_group = std::max(max_group, r.group);
  }
  return max_group + 1;
}

// Sorting before summation makes cell means exactly permutation-invariant.
double sorted_mean(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

template <typename KeyFn, typename ValueFn, typename KeepFn>
CurveByKey mean_curve(const std::vector<TrialResult>& results, KeyFn key_of, ValueFn value_of,
                      KeepFn keep) {
  if (results.empty()) throw InvalidState("no trials to aggregate");
  const int ng = group_count(results);
  std::set<int> keys;
  for (const auto& r : results) keys.insert(key_of(r));

  std::vector<std::map<int, std::vector<double>>> acc(static_cast<std::size_t>(ng));
  for (const auto& r : results) {
    if (!keep(r)) continue;
    acc[static_cast<std::size_t>(r.group)][key_of(r)].push_back(value_of(r));
  }

  CurveByKey curve;
  curve.groups.resize(static_cast<std::size_t>(ng));
  for (int g = 0; g < ng; ++g) {
    for (int key : keys) {
      auto it = acc[static_cast<std::size_t>(g)].find(key);
      if (it == acc[static_cast<std::size_t>(g)].end() || it->second.empty()) {
        curve.empty_cells.emplace_back(g, key);
        continue;
      }
      curve.groups[static_cast<std::size_t>(g)].cells[key] = {
          sorted_mean(it->second), static_cast<long>(it->second.size())};
    }
  }
  return curve;
}

template <typename ValueFn>
ClarityCurves clarity_curves(const std::vector<TrialResult>& results, bool split_by_choice,
                             ValueFn value_of) {
  const auto clarity_of = [](const TrialResult& r) { return evidence_clarity(r.condition); };
  ClarityCurves out;
  out.pooled = mean_curve(results, clarity_of, value_of, decided);
  if (split_by_choice) {
    out.upper = mean_curve(results, clarity_of, value_of,
                           [](const TrialResult& r) { return r.choice == Choice::Upper; });
    out.lower = mean_curve(results, clarity_of, value_of,
                           [](const TrialResult& r) { return r.choice == Choice::Lower; });
  }
  return out;
}

}  // namespace

CurveByKey choice_prob_by_bias(const std::vector<TrialResult>& results) {
  return mean_curve(
      results, [](const TrialResult& r) { return evidence_bias(r.condition); },
      [](const TrialResult& r) { return r.choice == Choice::Upper ? 1.0 : 0.0; }, decided);
}

ClarityCurves rt_by_clarity(const std::vector<TrialResult>& results, bool split_by_choice) {
  return clarity_curves(results, split_by_choice,
                        [](const TrialResult& r) { return r.rt; });
}

ClarityCurves switches_by_clarity(const std::vector<TrialResult>& results, bool split_by_choice) {
  return clarity_curves(results, split_by_choice,
                        [](const TrialResult& r) { return static_cast<double>(r.n_switches); });
}

namespace {

std::vector<TimeseriesBin> switching_curve(const std::vector<const TrialResult*>& trials,
                                           double bin_width, int smooth_window, bool conditional,
                                           long n_bins) {
  std::vector<double> rts;
  rts.reserve(trials.size());
  for (const auto* r : trials) rts.push_back(r->rt);
  std::sort(rts.begin(), rts.end());

  std::vector<long> numer(static_cast<std::size_t>(n_bins), 0);
  for (const auto* r : trials) {
    double boundary = 0.0;
    long prev_bin = -1;
    for (std::size_t i = 0; i + 1 < r->fixations.size(); ++i) {
      boundary += r->fixations[i].duration;
      if (boundary >= r->rt) break;  // switches strictly before the decision
      const long bin = static_cast<long>(std::floor(boundary / bin_width));
      if (bin >= n_bins) break;
      if (bin != prev_bin) {
        ++numer[static_cast<std::size_t>(bin)];
        prev_bin = bin;
      }
    }
  }

  std::vector<double> raw(static_cast<std::size_t>(n_bins), -1.0);  // -1 marks omitted
  std::vector<long> denom(static_cast<std::size_t>(n_bins), 0);
  for (long i = 0; i < n_bins; ++i) {
    const double bin_start = static_cast<double>(i) * bin_width;
    long at_risk;
    if (conditional) {
      const auto it = std::upper_bound(rts.begin(), rts.end(), bin_start);
      at_risk = static_cast<long>(rts.end() - it);  // rt > bin_start
    } else {
      at_risk = static_cast<long>(trials.size());
    }
    denom[static_cast<std::size_t>(i)] = at_risk;
    if (at_risk > 0) {
      raw[static_cast<std::size_t>(i)] =
          static_cast<double>(numer[static_cast<std::size_t>(i)]) / static_cast<double>(at_risk);
    }
  }

  const long half = smooth_window / 2;
  std::vector<TimeseriesBin> bins;
  for (long i = 0; i < n_bins; ++i) {
    if (raw[static_cast<std::size_t>(i)] < 0.0) continue;
    double sum = 0.0;
    long count = 0;
    for (long j = std::max<long>(0, i - half); j <= std::min(n_bins - 1, i + half); ++j) {
      if (raw[static_cast<std::size_t>(j)] < 0.0) continue;
      sum += raw[static_cast<std::size_t>(j)];
      ++count;
    }
    bins.push_back({static_cast<double>(i) * bin_width, sum / static_cast<double>(count),
                    denom[static_cast<std::size_t>(i)]});
  }
  return bins;
}

}  // namespace

SwitchingTimeseries switching_timeseries(const std::vector<TrialResult>& results, double bin_width,
                                         int smooth_window, bool conditional) {
  if (!(bin_width > 0.0)) throw InvalidParams("bin_width must be > 0");
  if (smooth_window < 1 || smooth_window % 2 == 0) {
    throw InvalidParams("smooth_window must be an odd positive bin count");
  }
  if (results.empty()) throw InvalidState("no trials to aggregate");
  for (const auto& r : results) {
    if (r.fixations.empty()) {
      throw InvalidState("switching_timeseries needs fixation data; rerun with keep_fixations");
    }
  }

  double max_rt = 0.0;
  for (const auto& r : results) max_rt = std::max(max_rt, r.rt);
  const long n_bins = static_cast<long>(std::ceil(max_rt / bin_width));

  SwitchingTimeseries out;
  out.bin_width = bin_width;

  std::map<int, std::vector<const TrialResult*>> by_clarity;
  std::vector<const TrialResult*> all;
  all.reserve(results.size());
  for (const auto& r : results) {
    by_clarity[evidence_clarity(r.condition)].push_back(&r);
    all.push_back(&r);
  }
  for (auto& [clarity, trials] : by_clarity) {
    out.by_clarity[clarity] = switching_curve(trials, bin_width, smooth_window, conditional, n_bins);
  }
  out.overall = switching_curve(all, bin_width, smooth_window, conditional, n_bins);
  return out;
}

LastFixationCurves last_fixation_curves(const std::vector<TrialResult>& results) {
  if (results.empty()) throw InvalidState("no trials to aggregate");
  const ScenarioKind scenario = results.front().condition.scenario;
  const FixationTarget item1 = option1_item(scenario);

  std::set<int> keys;
  std::map<int, std::array<std::pair<long, long>, 2>> acc;  // bias -> {(upper, n)} per item
  for (const auto& r : results) {
    keys.insert(evidence_bias(r.condition));
    if (!decided(r)) continue;
    const int which = r.last_fixation == item1 ? 0 : 1;
    auto& cell = acc[evidence_bias(r.condition)][static_cast<std::size_t>(which)];
    cell.second += 1;
    if (r.choice == Choice::Upper) cell.first += 1;
  }

  LastFixationCurves out;
  for (int key : keys) {
    const auto it = acc.find(key);
    for (int which = 0; which < 2; ++which) {
      const auto cell = it == acc.end() ? std::pair<long, long>{0, 0}
                                        : it->second[static_cast<std::size_t>(which)];
      auto& target = which == 0 ? out.last_option1 : out.last_option2;
      if (cell.second == 0) {
        out.empty_cells.emplace_back(key, which + 1);
        continue;
      }
      target[key] = {static_cast<double>(cell.first) / static_cast<double>(cell.second),
                     cell.second};
    }
  }
  return out;
}

double timeout_rate(const std::vector<TrialResult>& results) {
  if (results.empty()) throw InvalidState("no trials to aggregate");
  long timeouts = 0;
  for (const auto& r : results) {
    if (!decided(r)) ++timeouts;
  }
  return static_cast<double>(timeouts) / static_cast<double>(results.size());
}

SummaryCurves summarize(const std::vector<TrialResult>& results, const AnalysisOptions& options) {
  SummaryCurves curves;
  curves.choice_by_bias = choice_prob_by_bias(results);
  curves.rt_clarity = rt_by_clarity(results, options.split_by_choice);
  curves.switches_clarity = switches_by_clarity(results, options.split_by_choice);
  curves.last_fixation = last_fixation_curves(results);
  curves.timeout_rate = timeout_rate(results);
  curves.n_trials = static_cast<long>(results.size());
  curves.switching.bin_width = options.bin_width;

  const bool have_fixations =
      std::all_of(results.begin(), results.end(),
                  [](const TrialResult& r) { return !r.fixations.empty(); });
  if (have_fixations) {
    curves.switching = switching_timeseries(results, options.bin_width, options.smooth_window,
                                            options.conditional_switching);
  }
  return curves;
}

}  // namespace deam
