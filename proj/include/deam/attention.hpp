#pragma once

#include <string_view>
#include <vector>

#include "deam/core.hpp"
#include "deam/rng.hpp"

namespace deam {

enum class FixationTarget { RV, FV, NonFV };

std::string_view to_string(FixationTarget t);

// Each scenario uses exactly two gaze targets; the option-1 item carries z1.
FixationTarget option1_item(ScenarioKind s);  // LaneChange -> RV, CarFollow -> FV
FixationTarget option2_item(ScenarioKind s);  // LaneChange -> FV, CarFollow -> NonFV
bool target_in_scenario(ScenarioKind s, FixationTarget t);

// Attention discount for the unattended item: 1/(m*clarity + n), in (0,1].
double theta(int clarity, double m, double n);

struct FixationSegment {
  FixationTarget target = FixationTarget::FV;
  double duration = 0.0;  // seconds
};

struct FixationSchedule {
  std::vector<FixationSegment> segments;
  double total = 0.0;  // sum of durations
};

// Validating constructor: positive durations, targets from the scenario's
// set, consecutive targets distinct (a schedule encodes switches).
FixationSchedule make_schedule(ScenarioKind s, std::vector<FixationSegment> segments);

struct FixationConfig {
  FixationTarget first_target = FixationTarget::FV;
  double first_duration_mean = 1.0;       // s, truncated normal
  double first_duration_sd = 0.1;         // s
  double later_duration_log_median = 0.5; // s, log-normal median
  double later_duration_log_sd = 0.4;     // sd in log space
  double min_duration = 0.1;              // s, floor for every draw
};

FixationConfig default_fixation_config(ScenarioKind s);
void validate(ScenarioKind s, const FixationConfig& c);  // throws InvalidConfig

// Open-loop schedule: first segment from the truncated normal, then strictly
// alternating targets with log-normal durations, until total >= t_max.
FixationSchedule generate_schedule(ScenarioKind s, const FixationConfig& c, double t_max,
                                   rng::Stream& rng);

// Target of the segment containing t; boundaries belong to the later segment.
FixationTarget fixation_at(const FixationSchedule& schedule, double t);  // throws OutOfRange

}  // namespace deam
