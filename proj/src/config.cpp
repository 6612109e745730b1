#include "deam/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

namespace deam {

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

struct Assignment {
  std::string section;
  std::string key;
  std::string value;
  long line = 0;
};

[[noreturn]] void fail(const Assignment& a, const std::string& why) {
  throw ConfigError("config line " + std::to_string(a.line) + ": " + why + " [" + a.section +
                    "] " + a.key + " = " + a.value);
}

std::vector<Assignment> tokenize(const std::string& text) {
  std::vector<Assignment> out;
  std::string section;
  std::istringstream lines(text);
  std::string raw;
  long line_no = 0;
  while (std::getline(lines, raw)) {
    ++line_no;
    const auto comment = raw.find_first_of("#;");
    if (comment != std::string::npos) raw.erase(comment);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section '" +
                          line + "'");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value, got '" +
                        line + "'");
    }
    Assignment a;
    a.section = section;
    a.key = trim(std::string_view(line).substr(0, eq));
    a.value = trim(std::string_view(line).substr(eq + 1));
    a.line = line_no;
    if (a.section.empty()) fail(a, "assignment before any [section]");
    if (a.key.empty() || a.value.empty()) fail(a, "empty key or value");
    out.push_back(std::move(a));
  }
  return out;
}

double parse_double(const Assignment& a, std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last) fail(a, "expected a number");
  return value;
}

double parse_double(const Assignment& a) { return parse_double(a, a.value); }

long parse_long(const Assignment& a) {
  long value = 0;
  const auto res = std::from_chars(a.value.data(), a.value.data() + a.value.size(), value);
  if (res.ec != std::errc{} || res.ptr != a.value.data() + a.value.size()) {
    fail(a, "expected an integer");
  }
  return value;
}

std::uint64_t parse_u64(const Assignment& a) {
  std::uint64_t value = 0;
  const auto res = std::from_chars(a.value.data(), a.value.data() + a.value.size(), value);
  if (res.ec != std::errc{} || res.ptr != a.value.data() + a.value.size()) {
    fail(a, "expected a non-negative integer");
  }
  return value;
}

bool parse_bool(const Assignment& a) {
  if (a.value == "true" || a.value == "1") return true;
  if (a.value == "false" || a.value == "0") return false;
  fail(a, "expected true/false");
}

ScenarioKind parse_scenario(const Assignment& a) {
  if (a.value == "lane_change") return ScenarioKind::LaneChange;
  if (a.value == "car_follow") return ScenarioKind::CarFollow;
  fail(a, "expected lane_change or car_follow");
}

SignConvention parse_convention(const Assignment& a) {
  if (a.value == "addm") return SignConvention::AddmStandard;
  if (a.value == "attended_positive") return SignConvention::AttendedPositive;
  fail(a, "expected addm or attended_positive");
}

FixationTarget parse_target(const Assignment& a) {
  if (a.value == "rv") return FixationTarget::RV;
  if (a.value == "fv") return FixationTarget::FV;
  if (a.value == "non_fv") return FixationTarget::NonFV;
  fail(a, "expected rv, fv, or non_fv");
}

fitting::ParamRange parse_range(const Assignment& a) {
  const auto space = a.value.find_first_of(" \t");
  if (space == std::string::npos) fail(a, "expected 'lower upper'");
  fitting::ParamRange range;
  range.lower = parse_double(a, trim(std::string_view(a.value).substr(0, space)));
  range.upper = parse_double(a, trim(std::string_view(a.value).substr(space + 1)));
  return range;
}

void apply(RunConfig& c, const Assignment& a) {
  const std::string& s = a.section;
  const std::string& k = a.key;
  if (s == "run") {
    if (k == "scenario") c.scenario = parse_scenario(a);  // already consumed in pass 1
    else if (k == "seed") c.seed = parse_u64(a);
    else if (k == "convention") c.params.sign_convention = parse_convention(a);
    else if (k == "threads") c.threads = static_cast<int>(parse_long(a));
    else if (k == "kernel") {
      try {
        c.kernel = kernels::parse_kind(a.value);
      } catch (const Error&) {
        fail(a, "expected auto, scalar, or avx2");
      }
    } else fail(a, "unknown key");
  } else if (s == "model") {
    if (k == "d") c.params.d = parse_double(a);
    else if (k == "m") c.params.m = parse_double(a);
    else if (k == "n") c.params.n = parse_double(a);
    else if (k == "r") c.params.r = parse_double(a);
    else if (k == "b_start") c.params.b_start = parse_double(a);
    else if (k == "sigma") c.params.sigma = parse_double(a);
    else if (k == "dt") c.params.dt = parse_double(a);
    else if (k == "t_max") c.params.t_max = parse_double(a);
    else fail(a, "unknown key");
  } else if (s == "fixation") {
    if (k == "first_target") c.fixation.first_target = parse_target(a);
    else if (k == "first_duration_mean") c.fixation.first_duration_mean = parse_double(a);
    else if (k == "first_duration_sd") c.fixation.first_duration_sd = parse_double(a);
    else if (k == "later_duration_log_median")
      c.fixation.later_duration_log_median = parse_double(a);
    else if (k == "later_duration_log_sd") c.fixation.later_duration_log_sd = parse_double(a);
    else if (k == "min_duration") c.fixation.min_duration = parse_double(a);
    else fail(a, "unknown key");
  } else if (s == "batch") {
    if (k == "n_groups") c.design.n_groups = static_cast<int>(parse_long(a));
    else if (k == "count") c.design.count = parse_long(a);
    else if (k == "keep_fixations") c.keep_fixations = parse_bool(a);
    else fail(a, "unknown key");
  } else if (s == "analysis") {
    if (k == "bin_width") c.analysis.bin_width = parse_double(a);
    else if (k == "smooth_window") c.analysis.smooth_window = static_cast<int>(parse_long(a));
    else if (k == "split_by_choice") c.analysis.split_by_choice = parse_bool(a);
    else if (k == "conditional_switching") c.analysis.conditional_switching = parse_bool(a);
    else fail(a, "unknown key");
  } else if (s == "ga") {
    if (k == "population") c.ga.population = static_cast<int>(parse_long(a));
    else if (k == "generations") c.ga.generations = static_cast<int>(parse_long(a));
    else if (k == "tournament_k") c.ga.tournament_k = static_cast<int>(parse_long(a));
    else if (k == "crossover_rate") c.ga.crossover_rate = parse_double(a);
    else if (k == "mutation_sd_fraction") c.ga.mutation_sd_fraction = parse_double(a);
    else if (k == "elitism") c.ga.elitism = static_cast<int>(parse_long(a));
    else if (k == "seed") c.ga.seed = parse_u64(a);
    else if (k == "eval_seed") c.eval_seed = parse_u64(a);
    else fail(a, "unknown key");
  } else if (s == "space") {
    if (k == "d") c.space.d = parse_range(a);
    else if (k == "m") c.space.m = parse_range(a);
    else if (k == "n") c.space.n = parse_range(a);
    else if (k == "r") c.space.r = parse_range(a);
    else if (k == "b_start") c.space.b_start = parse_range(a);
    else if (k == "sigma") c.space.sigma = parse_range(a);
    else fail(a, "unknown key");
  } else if (s == "weights") {
    if (k == "choice") c.weights.choice = parse_double(a);
    else if (k == "rt") c.weights.rt = parse_double(a);
    else if (k == "switches") c.weights.switches = parse_double(a);
    else fail(a, "unknown key");
  } else {
    fail(a, "unknown section");
  }
}

}  // namespace

RunConfig default_config(ScenarioKind scenario) {
  RunConfig c;
  c.scenario = scenario;
  c.params = default_params(scenario);
  c.fixation = default_fixation_config(scenario);
  c.design = default_design(scenario);
  return c;
}

RunConfig parse_config(const std::string& text) {
  const auto assignments = tokenize(text);

  // Defaults depend on the scenario, which may be declared anywhere in the
  // file; resolve it first, then overlay every assignment in order.
  ScenarioKind scenario = ScenarioKind::LaneChange;
  for (const auto& a : assignments) {
    if (a.section == "run" && a.key == "scenario") scenario = parse_scenario(a);
  }
  RunConfig config = default_config(scenario);
  for (const auto& a : assignments) apply(config, a);

  try {
    validate(config.params);
    validate(config.scenario, config.fixation);
    if (config.design.n_groups < 1 || config.design.count < 1) {
      throw InvalidDesign("batch n_groups and count must be >= 1");
    }
    if (!(config.analysis.bin_width > 0.0)) throw InvalidConfig("bin_width must be > 0");
    if (config.analysis.smooth_window < 1 || config.analysis.smooth_window % 2 == 0) {
      throw InvalidConfig("smooth_window must be an odd positive bin count");
    }
    if (config.weights.choice < 0.0 || config.weights.rt < 0.0 || config.weights.switches < 0.0) {
      throw InvalidConfig("objective weights must be >= 0");
    }
    fitting::validate(config.space);
    fitting::validate(config.ga);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading config file '" + path + "'");
  return parse_config(buffer.str());
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string canonical_config(const RunConfig& c) {
  std::ostringstream out;
  const auto d = [](double v) { return format_double(v); };
  out << "[run]\n";
  out << "scenario = " << to_string(c.scenario) << "\n";
  out << "seed = " << c.seed << "\n";
  out << "convention = " << to_string(c.params.sign_convention) << "\n";
  out << "\n[model]\n";
  out << "d = " << d(c.params.d) << "\n";
  out << "m = " << d(c.params.m) << "\n";
  out << "n = " << d(c.params.n) << "\n";
  out << "r = " << d(c.params.r) << "\n";
  out << "b_start = " << d(c.params.b_start) << "\n";
  out << "sigma = " << d(c.params.sigma) << "\n";
  out << "dt = " << d(c.params.dt) << "\n";
  out << "t_max = " << d(c.params.t_max) << "\n";
  out << "\n[fixation]\n";
  out << "first_target = " << to_string(c.fixation.first_target) << "\n";
  out << "first_duration_mean = " << d(c.fixation.first_duration_mean) << "\n";
  out << "first_duration_sd = " << d(c.fixation.first_duration_sd) << "\n";
  out << "later_duration_log_median = " << d(c.fixation.later_duration_log_median) << "\n";
  out << "later_duration_log_sd = " << d(c.fixation.later_duration_log_sd) << "\n";
  out << "min_duration = " << d(c.fixation.min_duration) << "\n";
  out << "\n[batch]\n";
  out << "n_groups = " << c.design.n_groups << "\n";
  out << "count = " << c.design.count << "\n";
  out << "keep_fixations = " << (c.keep_fixations ? "true" : "false") << "\n";
  out << "\n[analysis]\n";
  out << "bin_width = " << d(c.analysis.bin_width) << "\n";
  out << "smooth_window = " << c.analysis.smooth_window << "\n";
  out << "split_by_choice = " << (c.analysis.split_by_choice ? "true" : "false") << "\n";
  out << "conditional_switching = " << (c.analysis.conditional_switching ? "true" : "false")
      << "\n";
  out << "\n[ga]\n";
  out << "population = " << c.ga.population << "\n";
  out << "generations = " << c.ga.generations << "\n";
  out << "tournament_k = " << c.ga.tournament_k << "\n";
  out << "crossover_rate = " << d(c.ga.crossover_rate) << "\n";
  out << "mutation_sd_fraction = " << d(c.ga.mutation_sd_fraction) << "\n";
  out << "elitism = " << c.ga.elitism << "\n";
  out << "seed = " << c.ga.seed << "\n";
  out << "eval_seed = " << c.eval_seed << "\n";
  out << "\n[space]\n";
  out << "d = " << d(c.space.d.lower) << " " << d(c.space.d.upper) << "\n";
  out << "m = " << d(c.space.m.lower) << " " << d(c.space.m.upper) << "\n";
  out << "n = " << d(c.space.n.lower) << " " << d(c.space.n.upper) << "\n";
  out << "r = " << d(c.space.r.lower) << " " << d(c.space.r.upper) << "\n";
  out << "b_start = " << d(c.space.b_start.lower) << " " << d(c.space.b_start.upper) << "\n";
  out << "sigma = " << d(c.space.sigma.lower) << " " << d(c.space.sigma.upper) << "\n";
  out << "\n[weights]\n";
  out << "choice = " << d(c.weights.choice) << "\n";
  out << "rt = " << d(c.weights.rt) << "\n";
  out << "switches = " << d(c.weights.switches) << "\n";
  return out.str();
}

std::uint64_t config_hash(const RunConfig& config) {
  const std::string text = canonical_config(config);
  std::uint64_t hash = 14695981039346656037ull;
  for (const unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace deam
