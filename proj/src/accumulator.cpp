#include "deam/accumulator.hpp"

#include <cmath>
#include <string>

#include "kernel_common.hpp"

namespace deam {

double bound_upper(double t, double r, double b_start) {
  if (!(t >= 0.0)) throw InvalidParams("bound time must be >= 0");
  if (!(r >= 0.0)) throw InvalidParams("collapse rate r must be >= 0");
  if (!(b_start > 0.0)) throw InvalidParams("b_start must be > 0");
  return b_start * std::exp(-r * t);
}

double drift_term(const TrialCondition& c, FixationTarget attended, double theta_value, double d,
                  SignConvention convention) {
  if (!target_in_scenario(c.scenario, attended)) {
    throw InvalidState("attended target " + std::string(to_string(attended)) +
                       " not valid for scenario " + std::string(to_string(c.scenario)));
  }
  if (!(theta_value > 0.0 && theta_value <= 1.0)) {
    throw InvalidParams("theta_value must be in (0,1]");
  }
  const double z1 = static_cast<double>(c.z1);
  const double z2 = static_cast<double>(c.z2);
  if (attended == option1_item(c.scenario)) return d * (z1 - theta_value * z2);
  if (convention == SignConvention::AddmStandard) return d * (theta_value * z1 - z2);
  return d * (z2 - theta_value * z1);
}

double rdv_step(double v, const TrialCondition& c, FixationTarget attended, double theta_value,
                double d, double noise, SignConvention convention) {
  return (v + drift_term(c, attended, theta_value, d, convention)) + noise;
}

long num_steps(double t_max, double dt) {
  if (!(dt > 0.0)) throw InvalidParams("dt must be > 0");
  if (!(t_max > 0.0)) throw InvalidParams("t_max must be > 0");
  const double q = t_max / dt;
  const long k = std::llround(q);
  // t_max/dt is usually an integer in spirit (10/0.001) but not in doubles;
  // snap when within rounding slack, otherwise truncate the partial step.
  if (std::fabs(q - static_cast<double>(k)) <= 1e-6 * (1.0 + std::fabs(q))) return k;
  return static_cast<long>(std::floor(q));
}

namespace detail {

void validate_for_trial(const TrialCondition& c, const ModelParams& params,
                        const FixationSchedule& schedule) {
  validate(params);
  if (schedule.segments.empty()) throw InvalidSchedule("schedule needs at least one segment");
  for (std::size_t i = 0; i < schedule.segments.size(); ++i) {
    const auto& seg = schedule.segments[i];
    if (!(seg.duration > 0.0)) {
      throw InvalidSchedule("segment " + std::to_string(i) + " has non-positive duration");
    }
    if (!target_in_scenario(c.scenario, seg.target)) {
      throw InvalidSchedule("segment " + std::to_string(i) + " target " +
                            std::string(to_string(seg.target)) + " not valid for scenario " +
                            std::string(to_string(c.scenario)));
    }
    if (i > 0 && schedule.segments[i - 1].target == seg.target) {
      throw InvalidSchedule("segments " + std::to_string(i - 1) + "/" + std::to_string(i) +
                            " repeat the same target");
    }
  }
  if (schedule.total + 1e-9 < params.t_max) {
    throw InvalidSchedule("schedule covers " + std::to_string(schedule.total) +
                          " s but the trial can run to " + std::to_string(params.t_max) + " s");
  }
}

TrialPlan build_plan(const TrialCondition& c, const ModelParams& params,
                     const FixationSchedule& schedule, std::uint64_t noise_key) {
  const double th = theta(evidence_clarity(c), params.m, params.n);
  TrialPlan plan;
  plan.target1 = option1_item(c.scenario);
  plan.target2 = option2_item(c.scenario);
  plan.drift1 = drift_term(c, plan.target1, th, params.d, params.sign_convention);
  plan.drift2 = drift_term(c, plan.target2, th, params.d, params.sign_convention);
  plan.first_is1 = schedule.segments.front().target == plan.target1;
  plan.noise_key = noise_key;
  return plan;  // caller wires cum/nseg to its own storage
}

TrialOutcome run_planned_trial(const TrialPlan& plan, const ModelParams& params,
                               const double* bounds, long k_max, rng::Stream& noise_rng,
                               std::vector<TracePoint>* trace) {
  double v = 0.0;
  int seg = 0;
  for (long k = 1; k <= k_max; ++k) {
    const double t = static_cast<double>(k) * params.dt;
    while (seg + 1 < plan.nseg && t >= plan.cum[seg]) ++seg;
    const bool is1 = plan.first_is1 == ((seg & 1) == 0);
    const double noise = params.sigma * noise_rng.next_gaussian();
    v = (v + (is1 ? plan.drift1 : plan.drift2)) + noise;
    if (trace) trace->push_back({t, v});
    const double b = bounds[k - 1];
    if (v >= b) return finish_outcome(plan, t, Choice::Upper);
    if (v <= -b) return finish_outcome(plan, t, Choice::Lower);
  }
  return finish_outcome(plan, params.t_max, Choice::Timeout);
}

}  // namespace detail

TrialOutcome simulate_trial(const TrialCondition& c, const ModelParams& params,
                            const FixationSchedule& schedule, rng::Stream& noise_rng,
                            bool record_trace) {
  detail::validate_for_trial(c, params, schedule);

  const long k_max = num_steps(params.t_max, params.dt);
  std::vector<double> bounds(static_cast<std::size_t>(k_max));
  for (long k = 1; k <= k_max; ++k) {
    bounds[static_cast<std::size_t>(k - 1)] =
        bound_upper(static_cast<double>(k) * params.dt, params.r, params.b_start);
  }

  std::vector<double> cum;
  detail::fill_cum(schedule, cum);
  detail::TrialPlan plan = detail::build_plan(c, params, schedule, noise_rng.key);
  plan.cum = cum.data();
  plan.nseg = static_cast<int>(cum.size());

  std::vector<TracePoint> trace;
  if (record_trace) trace.reserve(static_cast<std::size_t>(k_max));
  TrialOutcome out = detail::run_planned_trial(plan, params, bounds.data(), k_max, noise_rng,
                                               record_trace ? &trace : nullptr);
  out.trace = std::move(trace);
  return out;
}

MomentarySample sample_momentary_evidence(double theta_value, double sigma_z, double z_bar,
                                          double dt, double t, rng::Stream& rng) {
  if (!(theta_value > 0.0 && theta_value <= 1.0)) {
    throw InvalidParams("theta_value must be in (0,1]");
  }
  if (!(sigma_z >= 0.0)) throw InvalidParams("sigma_z must be >= 0");
  if (!(dt > 0.0)) throw InvalidParams("dt must be > 0");
  const double za = z_bar + sigma_z * rng.next_gaussian();
  const double zu = z_bar + sigma_z * rng.next_gaussian();
  return {za * dt, (theta_value * zu) * dt, t};
}

}  // namespace deam
