#include <algorithm>
#include <map>
#include <random>
#include <vector>

#include "doctest.h"

#include "deam/experiment.hpp"

using namespace deam;

namespace {

TrialResult mk(int group, TrialCondition c, Choice choice, double rt, int n_switches,
               FixationTarget last) {
  TrialResult r;
  r.group = group;
  r.condition = c;
  r.choice = choice;
  r.rt = rt;
  r.n_switches = n_switches;
  r.last_fixation = last;
  return r;
}

bool curves_equal(const CurveByKey& a, const CurveByKey& b) {
  if (a.groups.size() != b.groups.size() || a.empty_cells != b.empty_cells) return false;
  for (std::size_t g = 0; g < a.groups.size(); ++g) {
    const auto& ca = a.groups[g].cells;
    const auto& cb = b.groups[g].cells;
    if (ca.size() != cb.size()) return false;
    for (const auto& [key, cell] : ca) {
      const auto it = cb.find(key);
      if (it == cb.end() || it->second.value != cell.value || it->second.n != cell.n)
        return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("lane-change batches enumerate all pairs per group") {
  const TrialBatch batch = build_batch(ScenarioKind::LaneChange, 8, 20);
  CHECK(batch.size() == 1440);
  REQUIRE(batch.groups.size() == 8);
  std::vector<bool> id_seen(batch.size(), false);
  for (const auto& group : batch.groups) {
    CHECK(group.size() == 180);
    std::map<std::pair<int, int>, int> counts;
    for (const auto& trial : group) {
      counts[{trial.condition.z1, trial.condition.z2}] += 1;
      REQUIRE(trial.trial_id < batch.size());
      CHECK(!id_seen[trial.trial_id]);
      id_seen[trial.trial_id] = true;
    }
    CHECK(counts.size() == 9);
    for (const auto& [pair, n] : counts) CHECK(n == 20);
  }
}

TEST_CASE("car-following batches deal trials round-robin with balanced states") {
  const TrialBatch batch = build_batch(ScenarioKind::CarFollow, 6, 2320);
  CHECK(batch.size() == 2320);
  REQUIRE(batch.groups.size() == 6);
  for (std::size_t g = 0; g < 6; ++g) {
    const auto& group = batch.groups[g];
    CHECK(group.size() == (g < 4 ? 387 : 386));
    int counts[4] = {0, 0, 0, 0};
    for (const auto& trial : group) {
      CHECK(trial.condition.z2 == 2);
      counts[trial.condition.z1] += 1;
    }
    const int lo = std::min({counts[1], counts[2], counts[3]});
    const int hi = std::max({counts[1], counts[2], counts[3]});
    CHECK(hi - lo <= 1);
  }

  CHECK_THROWS_AS(build_batch(ScenarioKind::LaneChange, 0, 20), InvalidDesign);
  CHECK_THROWS_AS(build_batch(ScenarioKind::LaneChange, 8, 0), InvalidDesign);
}

TEST_CASE("run_batch is reproducible and thread-count invariant") {
  const TrialBatch batch = build_batch(ScenarioKind::LaneChange, 2, 40);  // 720 trials
  const ModelParams params = default_params(ScenarioKind::LaneChange);
  const FixationConfig fix = default_fixation_config(ScenarioKind::LaneChange);

  RunOptions single;
  single.threads = 1;
  single.keep_fixations = true;
  const auto a = run_batch(batch, params, fix, 7, single);
  const auto b = run_batch(batch, params, fix, 7, single);
  RunOptions pooled;
  pooled.threads = 4;
  pooled.keep_fixations = true;
  const auto c = run_batch(batch, params, fix, 7, pooled);

  REQUIRE(a.size() == batch.size());
  REQUIRE(b.size() == a.size());
  REQUIRE(c.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CAPTURE(i);
    REQUIRE(a[i].trial_id == b[i].trial_id);
    REQUIRE(a[i].rt == b[i].rt);
    REQUIRE(a[i].choice == b[i].choice);
    REQUIRE(a[i].rt == c[i].rt);
    REQUIRE(a[i].choice == c[i].choice);
    REQUIRE(a[i].n_switches == c[i].n_switches);
    REQUIRE(a[i].last_fixation == c[i].last_fixation);
    REQUIRE(a[i].group == c[i].group);
  }

  // Group-major order, fixations retained and covering the trial horizon.
  for (std::size_t i = 1; i < a.size(); ++i) REQUIRE(a[i - 1].group <= a[i].group);
  for (const auto& r : a) {
    REQUIRE(!r.fixations.empty());
    double total = 0.0;
    for (const auto& seg : r.fixations) total += seg.duration;
    REQUIRE(total >= params.t_max);
  }

  RunOptions bare;
  bare.threads = 1;
  const auto d = run_batch(batch, params, fix, 7, bare);
  CHECK(d.front().fixations.empty());

  // A fresh seed must actually change outcomes.
  const auto e = run_batch(batch, params, fix, 8, bare);
  bool any_diff = false;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i].rt != e[i].rt || d[i].choice != e[i].choice) {
      any_diff = true;
      break;
    }
  }
  CHECK(any_diff);
}

TEST_CASE("run_batch rejects duplicate trial ids") {
  TrialBatch batch;
  batch.scenario = ScenarioKind::LaneChange;
  batch.groups.resize(2);
  batch.groups[0].push_back({make_condition(ScenarioKind::LaneChange, 2, 1), 7});
  batch.groups[1].push_back({make_condition(ScenarioKind::LaneChange, 1, 2), 7});
  const ModelParams params = default_params(ScenarioKind::LaneChange);
  const FixationConfig fix = default_fixation_config(ScenarioKind::LaneChange);
  CHECK_THROWS_AS(run_batch(batch, params, fix, 1), InvalidDesign);
}

TEST_CASE("choice probability increases with evidence bias") {
  const TrialBatch batch = build_batch(ScenarioKind::LaneChange, 4, 30);  // 1080 trials
  const ModelParams params = default_params(ScenarioKind::LaneChange);
  const FixationConfig fix = default_fixation_config(ScenarioKind::LaneChange);
  const auto results = run_batch(batch, params, fix, 2024);

  // Pool the per-group cells into one curve per bias level.
  const CurveByKey curve = choice_prob_by_bias(results);
  std::map<int, double> pooled;
  std::map<int, long> pooled_n;
  for (const auto& group : curve.groups) {
    for (const auto& [key, cell] : group.cells) {
      pooled[key] += cell.value * static_cast<double>(cell.n);
      pooled_n[key] += cell.n;
    }
  }
  REQUIRE(pooled.size() == 5);
  double prev = -1.0;
  for (auto& [bias, sum] : pooled) {
    const double p = sum / static_cast<double>(pooled_n[bias]);
    CHECK(p > prev - 0.02);  // monotone up to Monte Carlo slack
    prev = p;
  }
  CHECK(pooled[-2] / pooled_n[-2] < 0.2);
  CHECK(pooled[2] / pooled_n[2] > 0.8);
}

TEST_CASE("cell means ignore timeouts but keep their keys visible") {
  const auto c31 = make_condition(ScenarioKind::LaneChange, 3, 1);  // bias +2
  const auto c13 = make_condition(ScenarioKind::LaneChange, 1, 3);  // bias -2
  std::vector<TrialResult> results{
      mk(0, c31, Choice::Upper, 0.4, 1, FixationTarget::RV),
      mk(0, c31, Choice::Lower, 0.6, 2, FixationTarget::FV),
      mk(0, c31, Choice::Timeout, 10.0, 9, FixationTarget::FV),
      mk(0, c13, Choice::Timeout, 10.0, 8, FixationTarget::RV),
      mk(1, c13, Choice::Lower, 1.0, 3, FixationTarget::FV),
      mk(1, c31, Choice::Upper, 0.2, 0, FixationTarget::RV),
  };

  const CurveByKey choice = choice_prob_by_bias(results);
  REQUIRE(choice.groups.size() == 2);
  CHECK(choice.groups[0].cells.at(2).value == 0.5);
  CHECK(choice.groups[0].cells.at(2).n == 2);
  CHECK(choice.groups[0].cells.count(-2) == 0);
  CHECK(choice.groups[1].cells.at(-2).value == 0.0);
  CHECK(choice.groups[1].cells.at(2).value == 1.0);
  REQUIRE(choice.empty_cells.size() == 1);
  CHECK(choice.empty_cells[0] == std::pair<int, int>{0, -2});

  const ClarityCurves rt = rt_by_clarity(results, true);
  CHECK(rt.pooled.groups[0].cells.at(2).value == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rt.pooled.groups[0].cells.at(2).n == 2);
  REQUIRE(rt.upper.has_value());
  CHECK(rt.upper->groups[0].cells.at(2).value == 0.4);
  CHECK(rt.lower->groups[0].cells.at(2).value == 0.6);

  const ClarityCurves sw = switches_by_clarity(results, false);
  CHECK(!sw.upper.has_value());
  CHECK(sw.pooled.groups[0].cells.at(2).value == 1.5);
  CHECK(sw.pooled.groups[1].cells.at(2).value == 1.5);

  CHECK(timeout_rate(results) == doctest::Approx(2.0 / 6.0).epsilon(1e-15));
  CHECK_THROWS_AS(timeout_rate({}), InvalidState);
}

TEST_CASE("curves are exactly invariant to result ordering") {
  const TrialBatch batch = build_batch(ScenarioKind::LaneChange, 3, 5);
  const ModelParams params = default_params(ScenarioKind::LaneChange);
  const FixationConfig fix = default_fixation_config(ScenarioKind::LaneChange);
  auto results = run_batch(batch, params, fix, 5);

  const CurveByKey before = choice_prob_by_bias(results);
  const ClarityCurves rt_before = rt_by_clarity(results, true);

  std::mt19937 shuffle_rng(321);
  std::shuffle(results.begin(), results.end(), shuffle_rng);

  CHECK(curves_equal(before, choice_prob_by_bias(results)));
  const ClarityCurves rt_after = rt_by_clarity(results, true);
  CHECK(curves_equal(rt_before.pooled, rt_after.pooled));
  CHECK(curves_equal(*rt_before.upper, *rt_after.upper));
  CHECK(curves_equal(*rt_before.lower, *rt_after.lower));
}

TEST_CASE("switching timeseries counts switches among still-undecided trials") {
  const auto c = make_condition(ScenarioKind::LaneChange, 3, 1);
  std::vector<TrialResult> results;
  for (int i = 0; i < 10; ++i) {
    auto r = mk(0, c, Choice::Upper, 2.0, 1, FixationTarget::RV);
    r.fixations = {{FixationTarget::FV, 1.05}, {FixationTarget::RV, 9.0}};
    results.push_back(r);
  }

  const auto series = switching_timeseries(results, 0.1, 1, true);
  CHECK(series.bin_width == 0.1);
  REQUIRE(series.overall.size() == 20);  // rt max 2.0 at 0.1s bins
  for (const auto& bin : series.overall) {
    CHECK(bin.n_at_risk == 10);
    if (bin.bin_start == doctest::Approx(1.0)) {
      CHECK(bin.probability == 1.0);  // every trial switches at 1.05 s
    } else {
      CHECK(bin.probability == 0.0);
    }
  }
  REQUIRE(series.by_clarity.count(2) == 1);
  CHECK(series.by_clarity.at(2).size() == 20);

  // A 5-bin moving average spreads the point mass.
  const auto smooth = switching_timeseries(results, 0.1, 5, true);
  for (const auto& bin : smooth.overall) {
    if (bin.bin_start == doctest::Approx(1.0)) CHECK(bin.probability == doctest::Approx(0.2));
  }

  // Conditional vs unconditional denominators: half the trials decide early.
  std::vector<TrialResult> mixed;
  for (int i = 0; i < 5; ++i) {
    auto r = mk(0, c, Choice::Upper, 0.35, 0, FixationTarget::FV);
    r.fixations = {{FixationTarget::FV, 10.0}};
    mixed.push_back(r);
  }
  for (int i = 0; i < 5; ++i) {
    auto r = mk(0, c, Choice::Upper, 2.0, 1, FixationTarget::RV);
    r.fixations = {{FixationTarget::FV, 0.55}, {FixationTarget::RV, 9.45}};
    mixed.push_back(r);
  }
  const auto conditional = switching_timeseries(mixed, 0.1, 1, true);
  const auto unconditional = switching_timeseries(mixed, 0.1, 1, false);
  for (const auto& bin : conditional.overall) {
    if (bin.bin_start == doctest::Approx(0.5)) {
      CHECK(bin.n_at_risk == 5);  // the five rt=0.35 trials are already decided
      CHECK(bin.probability == 1.0);
    }
  }
  for (const auto& bin : unconditional.overall) {
    if (bin.bin_start == doctest::Approx(0.5)) {
      CHECK(bin.n_at_risk == 10);
      CHECK(bin.probability == 0.5);
    }
  }

  auto no_fix = mk(0, c, Choice::Upper, 1.0, 0, FixationTarget::RV);
  CHECK_THROWS_AS(switching_timeseries({no_fix}, 0.1, 1, true), InvalidState);
  CHECK_THROWS_AS(switching_timeseries(results, 0.0, 1, true), InvalidParams);
  CHECK_THROWS_AS(switching_timeseries(results, 0.1, 2, true), InvalidParams);
}

TEST_CASE("last-fixation curves pool by bias and report empty cells") {
  const auto c31 = make_condition(ScenarioKind::LaneChange, 3, 1);
  const auto c12 = make_condition(ScenarioKind::LaneChange, 1, 2);
  std::vector<TrialResult> results{
      mk(0, c31, Choice::Upper, 0.5, 1, FixationTarget::RV),
      mk(0, c31, Choice::Upper, 0.6, 2, FixationTarget::RV),
      mk(1, c31, Choice::Lower, 0.7, 1, FixationTarget::RV),
      mk(1, c31, Choice::Upper, 0.8, 1, FixationTarget::FV),
      mk(0, c31, Choice::Lower, 0.9, 0, FixationTarget::FV),
      mk(0, c12, Choice::Lower, 1.0, 1, FixationTarget::FV),
      mk(1, c12, Choice::Timeout, 10.0, 5, FixationTarget::RV),
  };
  const LastFixationCurves curves = last_fixation_curves(results);

  // bias +2: last=RV cells pooled over both groups.
  CHECK(curves.last_option1.at(2).p_upper == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(curves.last_option1.at(2).n == 3);
  CHECK(curves.last_option2.at(2).p_upper == 0.5);
  CHECK(curves.last_option2.at(2).n == 2);

  // bias -1: only a last=FV decided trial; the last=RV cell is reported empty.
  CHECK(curves.last_option2.at(-1).p_upper == 0.0);
  CHECK(curves.last_option1.count(-1) == 0);
  REQUIRE(curves.empty_cells.size() == 1);
  CHECK(curves.empty_cells[0] == std::pair<int, int>{-1, 1});
}

TEST_CASE("summarize bundles every curve and respects missing fixations") {
  const TrialBatch batch = build_batch(ScenarioKind::LaneChange, 2, 4);
  const ModelParams params = default_params(ScenarioKind::LaneChange);
  const FixationConfig fix = default_fixation_config(ScenarioKind::LaneChange);

  RunOptions with_fix;
  with_fix.keep_fixations = true;
  const auto kept = run_batch(batch, params, fix, 10, with_fix);
  const SummaryCurves full = summarize(kept);
  CHECK(full.n_trials == 72);
  CHECK(!full.choice_by_bias.groups.empty());
  CHECK(full.rt_clarity.upper.has_value());
  CHECK(!full.switching.overall.empty());
  CHECK(!full.last_fixation.last_option1.empty());

  const auto bare = run_batch(batch, params, fix, 10);
  AnalysisOptions no_split;
  no_split.split_by_choice = false;
  const SummaryCurves partial = summarize(bare, no_split);
  CHECK(partial.switching.overall.empty());  // no fixation data retained
  CHECK(!partial.rt_clarity.upper.has_value());
  CHECK(partial.switching.bin_width == 0.1);
}
