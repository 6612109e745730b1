#pragma once

#include <vector>

#include "deam/attention.hpp"
#include "deam/core.hpp"
#include "deam/rng.hpp"

namespace deam {

struct TracePoint {
  double t = 0.0;
  double v = 0.0;
};

struct TrialOutcome {
  Choice choice = Choice::Timeout;
  double rt = 0.0;                 // seconds; == t_max for timeouts
  int n_switches = 0;              // segment boundaries strictly before rt
  FixationTarget last_fixation = FixationTarget::FV;  // target at rt
  std::vector<TracePoint> trace;   // (t, V) per step when requested
};

double bound_upper(double t, double r, double b_start);
inline double bound_lower(double t, double r, double b_start) {
  return -bound_upper(t, r, b_start);
}

// Deterministic part of one accumulation step while `attended` is fixated.
// AddmStandard discounts the unattended item and drives V toward the attended
// option's bound; AttendedPositive instead always adds the attended item with
// positive sign, so option-2 fixations use d*(z2 - theta*z1).
double drift_term(const TrialCondition& c, FixationTarget attended, double theta_value, double d,
                  SignConvention convention);

double rdv_step(double v, const TrialCondition& c, FixationTarget attended, double theta_value,
                double d, double noise, SignConvention convention);

// Number of integration steps: k = 1..num_steps, time of step k is k*dt.
long num_steps(double t_max, double dt);

// One decision trial: V starts at 0 and accumulates drift+noise per step until
// it reaches the collapsing bounds; open-loop fixations come from `schedule`.
TrialOutcome simulate_trial(const TrialCondition& c, const ModelParams& params,
                            const FixationSchedule& schedule, rng::Stream& noise_rng,
                            bool record_trace = false);

// Diagnostic sampler for the momentary-evidence distributions: both channels
// draw z ~ N(z_bar, sigma_z^2); the unattended channel is scaled by theta.
struct MomentarySample {
  double attended_evidence = 0.0;
  double unattended_evidence = 0.0;
  double t = 0.0;
};

MomentarySample sample_momentary_evidence(double theta_value, double sigma_z, double z_bar,
                                          double dt, double t, rng::Stream& rng);

}  // namespace deam
