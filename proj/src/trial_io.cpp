#include "deam/trial_io.hpp"

#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace deam {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::string_view trials_magic = "# deam-trials-v1";
constexpr std::string_view trials_header =
    "trial_id,group,scenario,z1,z2,bias,clarity,choice,rt_ms,n_switches,last_fixation,fixations";

std::string hex16(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, value);
  return buf;
}

[[noreturn]] void bad_row(long line, const std::string& why) {
  throw SchemaError(why, line);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
T parse_number(std::string_view text, long line, const char* field) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    bad_row(line, std::string("field ") + field + " is not a valid number: '" +
                      std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_hex(std::string_view text, long line, const char* field) {
  std::uint64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value, 16);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    bad_row(line, std::string("field ") + field + " is not a valid hex value");
  }
  return value;
}

ScenarioKind parse_scenario_token(std::string_view text, long line) {
  if (text == "lane_change") return ScenarioKind::LaneChange;
  if (text == "car_follow") return ScenarioKind::CarFollow;
  bad_row(line, "unknown scenario '" + std::string(text) + "'");
}

Choice parse_choice_token(std::string_view text, long line) {
  if (text == "upper") return Choice::Upper;
  if (text == "lower") return Choice::Lower;
  if (text == "timeout") return Choice::Timeout;
  bad_row(line, "unknown choice '" + std::string(text) + "'");
}

FixationTarget parse_target_token(std::string_view text, long line) {
  if (text == "rv") return FixationTarget::RV;
  if (text == "fv") return FixationTarget::FV;
  if (text == "non_fv") return FixationTarget::NonFV;
  bad_row(line, "unknown fixation target '" + std::string(text) + "'");
}

long long ms_of(double seconds) { return std::llround(seconds * 1000.0); }

}  // namespace

void write_trials_csv(std::ostream& out, const TrialsMeta& meta,
                      const std::vector<TrialResult>& results) {
  out << trials_magic << " scenario=" << to_string(meta.scenario)
      << " config_hash=" << hex16(meta.config_hash) << " seed=" << meta.seed << "\n";
  out << trials_header << "\n";
  for (const auto& r : results) {
    out << r.trial_id << ',' << r.group << ',' << to_string(r.condition.scenario) << ','
        << r.condition.z1 << ',' << r.condition.z2 << ',' << evidence_bias(r.condition) << ','
        << evidence_clarity(r.condition) << ',' << to_string(r.choice) << ',' << ms_of(r.rt)
        << ',' << r.n_switches << ',' << to_string(r.last_fixation) << ',';
    for (std::size_t i = 0; i < r.fixations.size(); ++i) {
      if (i > 0) out << ';';
      out << to_string(r.fixations[i].target) << ':' << ms_of(r.fixations[i].duration);
    }
    out << "\n";
  }
}

TrialsFile read_trials_csv(std::istream& in) {
  TrialsFile file;
  std::string line;
  long line_no = 0;

  if (!std::getline(in, line)) throw SchemaError("empty input, expected meta line", 1);
  ++line_no;
  if (line.rfind(trials_magic, 0) != 0) {
    throw SchemaError("missing '" + std::string(trials_magic) + "' meta line", line_no);
  }
  bool have_scenario = false;
  for (const auto token : split(std::string_view(line).substr(trials_magic.size()), ' ')) {
    if (token.empty()) continue;
    const auto eq = token.find('=');
    if (eq == std::string_view::npos) bad_row(line_no, "malformed meta token");
    const auto key = token.substr(0, eq);
    const auto value = token.substr(eq + 1);
    if (key == "scenario") {
      file.meta.scenario = parse_scenario_token(value, line_no);
      have_scenario = true;
    } else if (key == "config_hash") {
      file.meta.config_hash = parse_hex(value, line_no, "config_hash");
    } else if (key == "seed") {
      file.meta.seed = parse_number<std::uint64_t>(value, line_no, "seed");
    } else {
      bad_row(line_no, "unknown meta key '" + std::string(key) + "'");
    }
  }
  if (!have_scenario) bad_row(line_no, "meta line lacks scenario");

  if (!std::getline(in, line)) throw SchemaError("missing header line", 2);
  ++line_no;
  if (line != trials_header) {
    throw SchemaError("unexpected header, want '" + std::string(trials_header) + "'", line_no);
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 12) {
      bad_row(line_no, "expected 12 fields, got " + std::to_string(fields.size()));
    }

    TrialResult r;
    r.trial_id = parse_number<std::uint64_t>(fields[0], line_no, "trial_id");
    r.group = parse_number<int>(fields[1], line_no, "group");
    if (r.group < 0) bad_row(line_no, "group must be >= 0");
    const ScenarioKind scenario = parse_scenario_token(fields[2], line_no);
    if (scenario != file.meta.scenario) {
      bad_row(line_no, "row scenario disagrees with the meta line");
    }
    const int z1 = parse_number<int>(fields[3], line_no, "z1");
    const int z2 = parse_number<int>(fields[4], line_no, "z2");
    try {
      r.condition = make_condition(scenario, z1, z2);
    } catch (const Error& e) {
      bad_row(line_no, e.what());
    }
    if (parse_number<int>(fields[5], line_no, "bias") != evidence_bias(r.condition)) {
      bad_row(line_no, "bias is inconsistent with z1 - z2");
    }
    if (parse_number<int>(fields[6], line_no, "clarity") != evidence_clarity(r.condition)) {
      bad_row(line_no, "clarity is inconsistent with |z1 - z2|");
    }
    r.choice = parse_choice_token(fields[7], line_no);
    const long long rt_ms = parse_number<long long>(fields[8], line_no, "rt_ms");
    if (rt_ms <= 0) bad_row(line_no, "rt_ms must be > 0");
    r.rt = static_cast<double>(rt_ms) / 1000.0;
    r.n_switches = parse_number<int>(fields[9], line_no, "n_switches");
    if (r.n_switches < 0) bad_row(line_no, "n_switches must be >= 0");
    r.last_fixation = parse_target_token(fields[10], line_no);
    if (!target_in_scenario(scenario, r.last_fixation)) {
      bad_row(line_no, "last_fixation target is not part of this scenario");
    }
    if (!fields[11].empty()) {
      for (const auto part : split(fields[11], ';')) {
        const auto colon = part.find(':');
        if (colon == std::string_view::npos) {
          bad_row(line_no, "fixations must be encoded target:duration_ms;...");
        }
        FixationSegment seg;
        seg.target = parse_target_token(part.substr(0, colon), line_no);
        if (!target_in_scenario(scenario, seg.target)) {
          bad_row(line_no, "fixation target is not part of this scenario");
        }
        const long long dur_ms =
            parse_number<long long>(part.substr(colon + 1), line_no, "fixation duration");
        if (dur_ms <= 0) bad_row(line_no, "fixation durations must be > 0");
        seg.duration = static_cast<double>(dur_ms) / 1000.0;
        r.fixations.push_back(seg);
      }
    }
    file.results.push_back(std::move(r));
  }
  if (file.results.empty()) throw SchemaError("no trial rows in input");
  return file;
}

void save_trials(const std::string& path, const TrialsMeta& meta,
                 const std::vector<TrialResult>& results) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_trials_csv(out, meta, results);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

TrialsFile load_trials(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trials file '" + path + "'");
  return read_trials_csv(in);
}

namespace {

ojson cell_to_json(const CellStat& cell) {
  ojson j;
  j["value"] = cell.value;
  j["n"] = cell.n;
  return j;
}

ojson curve_to_json(const CurveByKey& curve) {
  ojson groups = ojson::array();
  for (const auto& group : curve.groups) {
    ojson cells = ojson::object();
    for (const auto& [key, cell] : group.cells) cells[std::to_string(key)] = cell_to_json(cell);
    groups.push_back(std::move(cells));
  }
  ojson empty = ojson::array();
  for (const auto& [g, key] : curve.empty_cells) empty.push_back(ojson::array({g, key}));
  ojson j;
  j["groups"] = std::move(groups);
  j["empty_cells"] = std::move(empty);
  return j;
}

int parse_int_key(const std::string& key) {
  int value = 0;
  const auto res = std::from_chars(key.data(), key.data() + key.size(), value);
  if (res.ec != std::errc{} || res.ptr != key.data() + key.size()) {
    throw SchemaError("non-integer curve key '" + key + "'");
  }
  return value;
}

CurveByKey curve_from_json(const ojson& j) {
  CurveByKey curve;
  for (const auto& group : j.at("groups")) {
    GroupCurve gc;
    for (const auto& [key, cell] : group.items()) {
      gc.cells[parse_int_key(key)] = {cell.at("value").get<double>(), cell.at("n").get<long>()};
    }
    curve.groups.push_back(std::move(gc));
  }
  for (const auto& pair : j.at("empty_cells")) {
    curve.empty_cells.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
  }
  return curve;
}

ojson clarity_to_json(const ClarityCurves& curves) {
  ojson j;
  j["pooled"] = curve_to_json(curves.pooled);
  j["upper"] = curves.upper ? curve_to_json(*curves.upper) : ojson(nullptr);
  j["lower"] = curves.lower ? curve_to_json(*curves.lower) : ojson(nullptr);
  return j;
}

ClarityCurves clarity_from_json(const ojson& j) {
  ClarityCurves curves;
  curves.pooled = curve_from_json(j.at("pooled"));
  if (!j.at("upper").is_null()) curves.upper = curve_from_json(j.at("upper"));
  if (!j.at("lower").is_null()) curves.lower = curve_from_json(j.at("lower"));
  return curves;
}

ojson bins_to_json(const std::vector<TimeseriesBin>& bins) {
  ojson j = ojson::array();
  for (const auto& bin : bins) {
    ojson b;
    b["t"] = bin.bin_start;
    b["p"] = bin.probability;
    b["n"] = bin.n_at_risk;
    j.push_back(std::move(b));
  }
  return j;
}

std::vector<TimeseriesBin> bins_from_json(const ojson& j) {
  std::vector<TimeseriesBin> bins;
  for (const auto& b : j) {
    bins.push_back({b.at("t").get<double>(), b.at("p").get<double>(), b.at("n").get<long>()});
  }
  return bins;
}

}  // namespace

std::string curves_to_json(const SummaryCurves& curves, const TrialsMeta& meta) {
  ojson j;
  j["schema"] = "deam-curves-v1";
  j["scenario"] = std::string(to_string(meta.scenario));
  j["config_hash"] = hex16(meta.config_hash);
  j["seed"] = meta.seed;
  j["n_trials"] = curves.n_trials;
  j["timeout_rate"] = curves.timeout_rate;
  j["choice_prob_by_bias"] = curve_to_json(curves.choice_by_bias);
  j["rt_by_clarity"] = clarity_to_json(curves.rt_clarity);
  j["switches_by_clarity"] = clarity_to_json(curves.switches_clarity);

  ojson ts;
  ts["bin_width"] = curves.switching.bin_width;
  ts["overall"] = bins_to_json(curves.switching.overall);
  ojson by_clarity = ojson::object();
  for (const auto& [clarity, bins] : curves.switching.by_clarity) {
    by_clarity[std::to_string(clarity)] = bins_to_json(bins);
  }
  ts["by_clarity"] = std::move(by_clarity);
  j["switching_timeseries"] = std::move(ts);

  ojson last;
  ojson option1 = ojson::object();
  for (const auto& [bias, cell] : curves.last_fixation.last_option1) {
    option1[std::to_string(bias)] = ojson{{"p_upper", cell.p_upper}, {"n", cell.n}};
  }
  ojson option2 = ojson::object();
  for (const auto& [bias, cell] : curves.last_fixation.last_option2) {
    option2[std::to_string(bias)] = ojson{{"p_upper", cell.p_upper}, {"n", cell.n}};
  }
  last["option1"] = std::move(option1);
  last["option2"] = std::move(option2);
  ojson last_empty = ojson::array();
  for (const auto& [bias, which] : curves.last_fixation.empty_cells) {
    last_empty.push_back(ojson::array({bias, which}));
  }
  last["empty_cells"] = std::move(last_empty);
  j["last_fixation"] = std::move(last);

  return j.dump(2) + "\n";
}

CurvesFile parse_curves_json(const std::string& text) {
  try {
    const ojson j = ojson::parse(text);
    if (j.at("schema").get<std::string>() != "deam-curves-v1") {
      throw SchemaError("unexpected schema tag in curves file");
    }
    CurvesFile file;
    const std::string scenario = j.at("scenario").get<std::string>();
    file.meta.scenario =
        scenario == "car_follow" ? ScenarioKind::CarFollow : ScenarioKind::LaneChange;
    if (scenario != "lane_change" && scenario != "car_follow") {
      throw SchemaError("unknown scenario '" + scenario + "'");
    }
    file.meta.config_hash = parse_hex(j.at("config_hash").get<std::string>(), -1, "config_hash");
    file.meta.seed = j.at("seed").get<std::uint64_t>();
    file.n_trials = j.at("n_trials").get<long>();
    file.curves.n_trials = file.n_trials;
    file.curves.timeout_rate = j.at("timeout_rate").get<double>();
    file.curves.choice_by_bias = curve_from_json(j.at("choice_prob_by_bias"));
    file.curves.rt_clarity = clarity_from_json(j.at("rt_by_clarity"));
    file.curves.switches_clarity = clarity_from_json(j.at("switches_by_clarity"));

    const auto& ts = j.at("switching_timeseries");
    file.curves.switching.bin_width = ts.at("bin_width").get<double>();
    file.curves.switching.overall = bins_from_json(ts.at("overall"));
    for (const auto& [key, bins] : ts.at("by_clarity").items()) {
      file.curves.switching.by_clarity[parse_int_key(key)] = bins_from_json(bins);
    }

    const auto& last = j.at("last_fixation");
    for (const auto& [key, cell] : last.at("option1").items()) {
      file.curves.last_fixation.last_option1[parse_int_key(key)] = {
          cell.at("p_upper").get<double>(), cell.at("n").get<long>()};
    }
    for (const auto& [key, cell] : last.at("option2").items()) {
      file.curves.last_fixation.last_option2[parse_int_key(key)] = {
          cell.at("p_upper").get<double>(), cell.at("n").get<long>()};
    }
    for (const auto& pair : last.at("empty_cells")) {
      file.curves.last_fixation.empty_cells.emplace_back(pair.at(0).get<int>(),
                                                         pair.at(1).get<int>());
    }
    return file;
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("malformed curves JSON: ") + e.what());
  }
}

std::string fit_to_json(const fitting::FitResult& fit, const RunConfig& config) {
  ojson j;
  j["schema"] = "deam-fit-v1";
  j["scenario"] = std::string(to_string(config.scenario));
  j["config_hash"] = hex16(config_hash(config));
  j["ga_seed"] = config.ga.seed;
  j["eval_seed"] = config.eval_seed;
  ojson best;
  best["d"] = fit.best_params.d;
  best["m"] = fit.best_params.m;
  best["n"] = fit.best_params.n;
  best["r"] = fit.best_params.r;
  best["b_start"] = fit.best_params.b_start;
  best["sigma"] = fit.best_params.sigma;
  best["dt"] = fit.best_params.dt;
  best["t_max"] = fit.best_params.t_max;
  best["convention"] = std::string(to_string(fit.best_params.sign_convention));
  j["best_params"] = std::move(best);
  j["objective"] = fit.objective;
  j["fresh_objectives"] = fit.fresh_objectives;
  j["induced_theta"] = fit.induced_theta;
  j["history"] = fit.history;
  return j.dump(2) + "\n";
}

std::string load_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return buffer.str();
}

void save_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace deam
