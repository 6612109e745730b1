#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "deam/accumulator.hpp"
#include "deam/attention.hpp"
#include "deam/core.hpp"
#include "deam/kernels.hpp"

namespace deam {

struct BatchTrial {
  TrialCondition condition;
  std::uint64_t trial_id = 0;  // seed-derivation index, unique across the batch
};

struct TrialBatch {
  ScenarioKind scenario = ScenarioKind::LaneChange;
  std::vector<std::vector<BatchTrial>> groups;

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.size();
    return n;
  }
};

// `count` is repetitions of the 9 (z1,z2) pairs per group for lane-change
// batches, and the round-robin total for car-following batches (whose only
// free condition is z1).
struct BatchDesign {
  int n_groups = 8;
  long count = 20;
};

BatchDesign default_design(ScenarioKind s);  // lane-change 8x(9x20); car-follow 6 groups, 2320

TrialBatch build_batch(ScenarioKind s, int n_groups, long count);  // throws InvalidDesign
inline TrialBatch build_batch(ScenarioKind s, const BatchDesign& design) {
  return build_batch(s, design.n_groups, design.count);
}

// One simulated (or imported human) trial with its condition metadata.
// `fixations` is populated only when requested; aggregations that need switch
// times (switching_timeseries) require it.
struct TrialResult {
  std::uint64_t trial_id = 0;
  int group = 0;
  TrialCondition condition;
  Choice choice = Choice::Timeout;
  double rt = 0.0;
  int n_switches = 0;
  FixationTarget last_fixation = FixationTarget::FV;
  std::vector<FixationSegment> fixations;
};

struct RunOptions {
  int threads = 1;  // <= 0 selects the hardware concurrency
  kernels::Kind kernel = kernels::Kind::Auto;
  bool keep_fixations = false;
};

// Runs every trial of the batch. Each trial draws its schedule and noise from
// streams derived from (master_seed, trial_id), so results are identical for
// any thread count or kernel. Output is ordered group-major like the batch.
std::vector<TrialResult> run_batch(const TrialBatch& batch, const ModelParams& params,
                                   const FixationConfig& fix_config, std::uint64_t master_seed,
                                   const RunOptions& options = {});

// --- summary curves -------------------------------------------------------

struct CellStat {
  double value = 0.0;
  long n = 0;  // decided trials behind the value
};

struct GroupCurve {
  std::map<int, CellStat> cells;  // key (bias or clarity) -> statistic
};

// Cells that had no decided trials are omitted from `groups` and reported in
// `empty_cells` as (group, key).
struct CurveByKey {
  std::vector<GroupCurve> groups;
  std::vector<std::pair<int, int>> empty_cells;
};

struct ClarityCurves {
  CurveByKey pooled;
  std::optional<CurveByKey> upper;  // present when split by choice
  std::optional<CurveByKey> lower;
};

CurveByKey choice_prob_by_bias(const std::vector<TrialResult>& results);
ClarityCurves rt_by_clarity(const std::vector<TrialResult>& results, bool split_by_choice);
ClarityCurves switches_by_clarity(const std::vector<TrialResult>& results, bool split_by_choice);

struct TimeseriesBin {
  double bin_start = 0.0;
  double probability = 0.0;  // smoothed switch probability
  long n_at_risk = 0;        // denominator before smoothing
};

struct SwitchingTimeseries {
  double bin_width = 0.1;
  std::map<int, std::vector<TimeseriesBin>> by_clarity;
  std::vector<TimeseriesBin> overall;
};

// Per bin: P(>=1 switch in the bin | undecided at bin start), then a centered
// moving average over `smooth_window` bins. Bins with an empty denominator are
// omitted. `conditional=false` divides by all trials instead. Requires
// fixation data on every result.
SwitchingTimeseries switching_timeseries(const std::vector<TrialResult>& results, double bin_width,
                                         int smooth_window, bool conditional = true);

struct LastFixCell {
  double p_upper = 0.0;
  long n = 0;
};

// Pooled over groups: P(Upper) conditioned on which item was fixated at rt.
// empty_cells holds (bias, option index 1 or 2).
struct LastFixationCurves {
  std::map<int, LastFixCell> last_option1;
  std::map<int, LastFixCell> last_option2;
  std::vector<std::pair<int, int>> empty_cells;
};

LastFixationCurves last_fixation_curves(const std::vector<TrialResult>& results);

double timeout_rate(const std::vector<TrialResult>& results);

struct AnalysisOptions {
  double bin_width = 0.1;
  int smooth_window = 5;
  bool split_by_choice = true;
  bool conditional_switching = true;
};

struct SummaryCurves {
  CurveByKey choice_by_bias;
  ClarityCurves rt_clarity;
  ClarityCurves switches_clarity;
  SwitchingTimeseries switching;  // empty when fixation data was not retained
  LastFixationCurves last_fixation;
  double timeout_rate = 0.0;
  long n_trials = 0;
};

SummaryCurves summarize(const std::vector<TrialResult>& results,
                        const AnalysisOptions& options = {});

}  // namespace deam
