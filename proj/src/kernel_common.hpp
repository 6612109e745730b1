#pragma once

// Internals shared by simulate_trial, the scalar batch kernel, and the AVX2
// batch kernel. The step semantics live in one place so every execution path
// produces bit-identical outcomes.

#include <cstdint>
#include <span>
#include <vector>

#include "deam/accumulator.hpp"
#include "deam/kernels.hpp"

namespace deam::detail {

// Per-trial quantities hoisted out of the step loop.
struct TrialPlan {
  double drift1 = 0.0;  // step drift while the option-1 item is attended
  double drift2 = 0.0;  // step drift while the option-2 item is attended
  bool first_is1 = false;
  FixationTarget target1 = FixationTarget::RV;
  FixationTarget target2 = FixationTarget::FV;
  const double* cum = nullptr;  // cumulative segment end times
  int nseg = 0;
  std::uint64_t noise_key = 0;
};

struct SchedulePos {
  int seg = 0;
  int n_switches = 0;  // boundaries strictly before t
};

// Segment containing time t; a boundary exactly at t belongs to the later
// segment but does not count as a switch before t. Clamps past the last
// segment (only reachable when total == t_max exactly).
inline SchedulePos resolve_position(const double* cum, int nseg, double t) {
  int seg = 0;
  while (seg + 1 < nseg && t >= cum[seg]) ++seg;
  int n = seg;
  if (seg > 0 && cum[seg - 1] == t) n = seg - 1;
  return {seg, n};
}

inline void fill_cum(const FixationSchedule& schedule, std::vector<double>& cum) {
  cum.clear();
  cum.reserve(schedule.segments.size());
  double end = 0.0;
  for (const auto& seg : schedule.segments) {
    end += seg.duration;
    cum.push_back(end);
  }
}

inline TrialOutcome finish_outcome(const TrialPlan& plan, double t, Choice choice) {
  const SchedulePos pos = resolve_position(plan.cum, plan.nseg, t);
  const bool is1 = plan.first_is1 == ((pos.seg & 1) == 0);
  TrialOutcome out;
  out.choice = choice;
  out.rt = t;
  out.n_switches = pos.n_switches;
  out.last_fixation = is1 ? plan.target1 : plan.target2;
  return out;
}

void validate_for_trial(const TrialCondition& c, const ModelParams& params,
                        const FixationSchedule& schedule);

TrialPlan build_plan(const TrialCondition& c, const ModelParams& params,
                     const FixationSchedule& schedule, std::uint64_t noise_key);

// Scalar reference engine; `bounds[k-1]` must equal bound_upper(k*dt, r, b_start).
TrialOutcome run_planned_trial(const TrialPlan& plan, const ModelParams& params,
                               const double* bounds, long k_max, rng::Stream& noise_rng,
                               std::vector<TracePoint>* trace);

// Plans plus owned storage for one run_trials call.
struct BatchPlans {
  std::vector<TrialPlan> plans;
  std::vector<std::vector<double>> cums;  // stable backing for plan.cum
  std::vector<double> bounds;             // bounds[k-1] = bound_upper(k*dt)
  long k_max = 0;
};

BatchPlans build_plans(std::span<const kernels::TrialTask> tasks, const ModelParams& params);

std::vector<TrialOutcome> run_tasks_scalar(std::span<const kernels::TrialTask> tasks,
                                           const ModelParams& params);

#ifdef DEAM_HAVE_AVX2
std::vector<TrialOutcome> run_tasks_avx2(std::span<const kernels::TrialTask> tasks,
                                         const ModelParams& params);
#endif

}  // namespace deam::detail
