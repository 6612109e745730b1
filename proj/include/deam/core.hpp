#pragma once

#include <cstdlib>
#include <string_view>

#include "deam/error.hpp"

namespace deam {

enum class ScenarioKind { LaneChange, CarFollow };

// Sign given to the attended item during option-2 fixations; see rdv_step.
enum class SignConvention { AddmStandard, AttendedPositive };

enum class Choice { Upper, Lower, Timeout };

// z1/z2 are integer perceptual states on the 1..3 scale. z1 belongs to the
// option-1 item (RV in lane-change, FV in car-following) and z2 to the
// option-2 item (FV, resp. the fixed non-FV surround with z2 = 2).
struct TrialCondition {
  ScenarioKind scenario = ScenarioKind::LaneChange;
  int z1 = 1;
  int z2 = 1;
};

TrialCondition make_condition(ScenarioKind scenario, int z1, int z2);

inline int evidence_bias(const TrialCondition& c) { return c.z1 - c.z2; }
inline int evidence_clarity(const TrialCondition& c) { return std::abs(c.z1 - c.z2); }

struct EvidenceAffordance {
  int bias = 0;
  int clarity = 0;
};

inline EvidenceAffordance affordance(const TrialCondition& c) {
  return {evidence_bias(c), evidence_clarity(c)};
}

struct ModelParams {
  double d = 0.003;      // integration speed per step
  double m = 0.18;       // theta slope vs clarity; theta(c) = 1/(m*c + n)
  double n = 1.25;       // theta offset, >= 1
  double r = 0.35;       // bound collapse rate (1/s); 0 keeps bounds fixed
  double b_start = 2.8;  // initial bound height
  double sigma = 0.03;   // per-step noise sd (not scaled by dt)
  double dt = 0.001;     // step size in seconds
  double t_max = 10.0;   // trial timeout in seconds
  SignConvention sign_convention = SignConvention::AddmStandard;
};

void validate(const ModelParams& p);  // throws InvalidParams naming the bad field

// Fitted parameter sets used as scenario defaults.
ModelParams default_params(ScenarioKind scenario);

std::string_view to_string(ScenarioKind s);
std::string_view to_string(SignConvention c);
std::string_view to_string(Choice c);

// What an Upper/Lower crossing means in each scenario (for reports/metadata).
std::string_view upper_decision_label(ScenarioKind s);
std::string_view lower_decision_label(ScenarioKind s);

}  // namespace deam
