#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "deam/config.hpp"
#include "deam/experiment.hpp"
#include "deam/fitting.hpp"

namespace deam {

inline constexpr std::string_view deam_version = "1.0.0";

// Run identity stamped into every output file; two runs with equal hash and
// seed must be byte-identical.
struct TrialsMeta {
  ScenarioKind scenario = ScenarioKind::LaneChange;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

struct TrialsFile {
  TrialsMeta meta;
  std::vector<TrialResult> results;
};

// CSV layout: a "# deam-trials-v1 ..." meta line, a header, then one row per
// trial with rt and fixation durations quantized to integer milliseconds
// (exact round-trips; pick dt accordingly). Human datasets use the same
// schema and flow through the same readers.
void write_trials_csv(std::ostream& out, const TrialsMeta& meta,
                      const std::vector<TrialResult>& results);
TrialsFile read_trials_csv(std::istream& in);  // throws SchemaError with line numbers

void save_trials(const std::string& path, const TrialsMeta& meta,
                 const std::vector<TrialResult>& results);  // throws IoError
TrialsFile load_trials(const std::string& path);

struct CurvesFile {
  TrialsMeta meta;
  long n_trials = 0;
  SummaryCurves curves;
};

std::string curves_to_json(const SummaryCurves& curves, const TrialsMeta& meta);
CurvesFile parse_curves_json(const std::string& text);  // throws SchemaError

std::string fit_to_json(const fitting::FitResult& fit, const RunConfig& config);

std::string load_text(const std::string& path);                          // throws IoError
void save_text(const std::string& path, const std::string& content);     // throws IoError

}  // namespace deam
