#include "deam/attention.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace deam {

std::string_view to_string(FixationTarget t) {
  switch (t) {
    case FixationTarget::RV: return "rv";
    case FixationTarget::FV: return "fv";
    default: return "non_fv";
  }
}

FixationTarget option1_item(ScenarioKind s) {
  return s == ScenarioKind::LaneChange ? FixationTarget::RV : FixationTarget::FV;
}

FixationTarget option2_item(ScenarioKind s) {
  return s == ScenarioKind::LaneChange ? FixationTarget::FV : FixationTarget::NonFV;
}

bool target_in_scenario(ScenarioKind s, FixationTarget t) {
  return t == option1_item(s) || t == option2_item(s);
}

double theta(int clarity, double m, double n) {
  if (clarity < 0) throw InvalidParams("clarity must be >= 0");
  if (!(m >= 0.0)) throw InvalidParams("theta slope m must be >= 0");
  if (!(n >= 1.0)) throw InvalidParams("theta offset n must be >= 1");
  return 1.0 / (m * static_cast<double>(clarity) + n);
}

FixationSchedule make_schedule(ScenarioKind s, std::vector<FixationSegment> segments) {
  if (segments.empty()) throw InvalidSchedule("schedule needs at least one segment");
  double total = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& seg = segments[i];
    if (!(seg.duration > 0.0)) {
      throw InvalidSchedule("segment " + std::to_string(i) + " has non-positive duration");
    }
    if (!target_in_scenario(s, seg.target)) {
      throw InvalidSchedule("segment " + std::to_string(i) + " target " +
                            std::string(to_string(seg.target)) + " not valid for scenario " +
                            std::string(to_string(s)));
    }
    if (i > 0 && segments[i - 1].target == seg.target) {
      throw InvalidSchedule("segments " + std::to_string(i - 1) + "/" + std::to_string(i) +
                            " repeat the same target");
    }
    total += seg.duration;
  }
  return FixationSchedule{std::move(segments), total};
}

FixationConfig default_fixation_config(ScenarioKind s) {
  FixationConfig c;
  if (s == ScenarioKind::CarFollow) {
    c.first_target = FixationTarget::NonFV;
    c.later_duration_log_median = 0.7;
  }
  return c;
}

void validate(ScenarioKind s, const FixationConfig& c) {
  if (!target_in_scenario(s, c.first_target)) {
    throw InvalidConfig("first_target " + std::string(to_string(c.first_target)) +
                        " not valid for scenario " + std::string(to_string(s)));
  }
  if (!(c.first_duration_mean > 0.0)) throw InvalidConfig("first_duration_mean must be > 0");
  if (!(c.first_duration_sd >= 0.0)) throw InvalidConfig("first_duration_sd must be >= 0");
  if (!(c.later_duration_log_median > 0.0))
    throw InvalidConfig("later_duration_log_median must be > 0");
  if (!(c.later_duration_log_sd >= 0.0)) throw InvalidConfig("later_duration_log_sd must be >= 0");
  if (!(c.min_duration > 0.0)) throw InvalidConfig("min_duration must be > 0");
}

FixationSchedule generate_schedule(ScenarioKind s, const FixationConfig& c, double t_max,
                                   rng::Stream& rng) {
  validate(s, c);
  if (!(t_max > 0.0)) throw InvalidConfig("t_max must be > 0");

  const FixationTarget other =
      c.first_target == option1_item(s) ? option2_item(s) : option1_item(s);

  std::vector<FixationSegment> segments;
  double first = c.first_duration_mean + c.first_duration_sd * rng.next_gaussian();
  if (first < c.min_duration) first = c.min_duration;
  segments.push_back({c.first_target, first});

  double total = first;
  FixationTarget target = other;
  while (total < t_max) {
    double dur = c.later_duration_log_median * std::exp(c.later_duration_log_sd * rng.next_gaussian());
    if (dur < c.min_duration) dur = c.min_duration;
    segments.push_back({target, dur});
    total += dur;
    target = target == option1_item(s) ? option2_item(s) : option1_item(s);
  }
  return FixationSchedule{std::move(segments), total};
}

FixationTarget fixation_at(const FixationSchedule& schedule, double t) {
  if (t < 0.0 || t >= schedule.total) {
    throw OutOfRange("t=" + std::to_string(t) + " outside schedule [0," +
                     std::to_string(schedule.total) + ")");
  }
  double end = 0.0;
  for (const auto& seg : schedule.segments) {
    end += seg.duration;
    if (t < end) return seg.target;
  }
  return schedule.segments.back().target;  // fp slack in the cumulative sum
}

}  // namespace deam
