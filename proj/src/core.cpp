#include "deam/core.hpp"

#include <string>

namespace deam {

TrialCondition make_condition(ScenarioKind scenario, int z1, int z2) {
  auto in_range = [](int z) { return z >= 1 && z <= 3; };
  if (!in_range(z1) || !in_range(z2)) {
    throw InvalidState("perceptual states must lie in {1,2,3}: z1=" + std::to_string(z1) +
                       " z2=" + std::to_string(z2));
  }
  if (scenario == ScenarioKind::CarFollow && z2 != 2) {
    throw InvalidState("car-following fixes the non-FV state at z2=2, got z2=" +
                       std::to_string(z2));
  }
  return TrialCondition{scenario, z1, z2};
}

void validate(const ModelParams& p) {
  auto bad = [](const char* field, double value) {
    throw InvalidParams(std::string("invalid model parameter ") + field + "=" +
                        std::to_string(value));
  };
  if (!(p.m >= 0.0)) bad("m", p.m);
  if (!(p.n >= 1.0)) bad("n", p.n);
  if (!(p.r >= 0.0)) bad("r", p.r);
  if (!(p.b_start > 0.0)) bad("b_start", p.b_start);
  if (!(p.sigma >= 0.0)) bad("sigma", p.sigma);
  if (!(p.dt > 0.0)) bad("dt", p.dt);
  if (!(p.t_max > 0.0)) bad("t_max", p.t_max);
}

ModelParams default_params(ScenarioKind scenario) {
  ModelParams p;
  if (scenario == ScenarioKind::CarFollow) {
    p.d = 0.0008;
    p.m = 0.1;
    p.n = 1.5;
    p.r = 0.15;
    p.b_start = 1.5;
    p.sigma = 0.01;
  }
  return p;
}

std::string_view to_string(ScenarioKind s) {
  return s == ScenarioKind::LaneChange ? "lane_change" : "car_follow";
}

std::string_view to_string(SignConvention c) {
  return c == SignConvention::AddmStandard ? "addm" : "attended_positive";
}

std::string_view to_string(Choice c) {
  switch (c) {
    case Choice::Upper: return "upper";
    case Choice::Lower: return "lower";
    default: return "timeout";
  }
}

std::string_view upper_decision_label(ScenarioKind s) {
  return s == ScenarioKind::LaneChange ? "lane_changing" : "decelerating";
}

std::string_view lower_decision_label(ScenarioKind s) {
  return s == ScenarioKind::LaneChange ? "lane_keeping" : "keep_driving";
}

}  // namespace deam
