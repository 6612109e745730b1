// Command-line front end: simulate trial batches, summarize trials into
// plot-ready curves, run the statistical tests, fit parameters, and dump the
// diagnostic momentary-evidence and trace CSVs.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "deam/config.hpp"
#include "deam/stats.hpp"
#include "deam/trial_io.hpp"

namespace {

using namespace deam;
using ojson = nlohmann::ordered_json;

struct CommonFlags {
  std::string config_path;
  std::string scenario;
  std::string convention;
  std::string kernel;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "run configuration file");
  cmd->add_option("--scenario", flags.scenario, "lane_change or car_follow");
  cmd->add_option("--convention", flags.convention, "sign convention: addm or attended_positive");
  cmd->add_option("--seed", flags.seed, "master seed override");
  cmd->add_option("--threads", flags.threads, "worker threads (0 = hardware)");
  cmd->add_option("--kernel", flags.kernel, "simulation kernel: auto, scalar, avx2");
}

// Flags become synthetic config lines appended after the file so they win and
// go through the same validation as everything else.
RunConfig effective_config(const CommonFlags& flags) {
  std::string text;
  if (!flags.config_path.empty()) text = load_text(flags.config_path);
  text += "\n[run]\n";
  if (!flags.scenario.empty()) text += "scenario = " + flags.scenario + "\n";
  if (flags.seed) text += "seed = " + std::to_string(*flags.seed) + "\n";
  if (!flags.convention.empty()) text += "convention = " + flags.convention + "\n";
  if (flags.threads) text += "threads = " + std::to_string(*flags.threads) + "\n";
  if (!flags.kernel.empty()) text += "kernel = " + flags.kernel + "\n";
  return parse_config(text);
}

std::string hex16(std::uint64_t value) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << value;
  return out.str();
}

void cmd_simulate(const CommonFlags& flags, const std::string& out_path) {
  const RunConfig config = effective_config(flags);
  const TrialBatch batch = build_batch(config.scenario, config.design);
  RunOptions run;
  run.threads = config.threads;
  run.kernel = config.kernel;
  run.keep_fixations = config.keep_fixations;
  const auto results = run_batch(batch, config.params, config.fixation, config.seed, run);

  TrialsMeta meta;
  meta.scenario = config.scenario;
  meta.config_hash = config_hash(config);
  meta.seed = config.seed;
  save_trials(out_path, meta, results);

  ojson side;
  side["schema"] = "deam-run-v1";
  side["version"] = std::string(deam_version);
  side["scenario"] = std::string(to_string(config.scenario));
  side["config_hash"] = hex16(meta.config_hash);
  side["seed"] = config.seed;
  side["n_trials"] = results.size();
  side["timeout_rate"] = timeout_rate(results);
  side["canonical_config"] = canonical_config(config);
  save_text(out_path + ".meta.json", side.dump(2) + "\n");

  std::cout << "wrote " << results.size() << " trials to " << out_path << "\n";
}

void cmd_summarize(const CommonFlags& flags, const std::string& in_path,
                   const std::string& out_path) {
  AnalysisOptions analysis;
  if (!flags.config_path.empty()) analysis = effective_config(flags).analysis;
  const TrialsFile trials = load_trials(in_path);
  const SummaryCurves curves = summarize(trials.results, analysis);
  save_text(out_path, curves_to_json(curves, trials.meta));
  std::cout << "wrote curves for " << trials.results.size() << " trials to " << out_path << "\n";
}

// Per-group (x, y) pairs from a per-group curve, for the slope tests.
std::vector<std::pair<std::vector<double>, std::vector<double>>> group_xy(
    const CurveByKey& curve) {
  std::vector<std::pair<std::vector<double>, std::vector<double>>> out;
  for (const auto& group : curve.groups) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [key, cell] : group.cells) {
      xs.push_back(static_cast<double>(key));
      ys.push_back(cell.value);
    }
    out.emplace_back(std::move(xs), std::move(ys));
  }
  return out;
}

ojson slope_test_json(const CurveByKey& curve, const char* name,
                      std::vector<std::string>& warnings) {
  try {
    const auto test = stats::slope_ttest(group_xy(curve));
    ojson j;
    j["t"] = test.t;
    j["df"] = test.df;
    j["p"] = test.p_two_tailed;
    return j;
  } catch (const Error& e) {
    warnings.push_back(std::string(name) + ": " + e.what());
    return ojson(nullptr);
  }
}

ojson kw_json(const CurveByKey& curve, const char* name, std::vector<std::string>& warnings) {
  // One Kruskal-Wallis sample per key level, containing that level's
  // per-group values.
  std::map<int, std::vector<double>> levels;
  for (const auto& group : curve.groups) {
    for (const auto& [key, cell] : group.cells) levels[key].push_back(cell.value);
  }
  std::vector<std::vector<double>> groups;
  for (auto& [key, values] : levels) groups.push_back(std::move(values));
  try {
    const auto test = stats::kruskal_wallis(groups);
    ojson j;
    j["h"] = test.h;
    j["df"] = test.df;
    j["p"] = test.p;
    return j;
  } catch (const Error& e) {
    warnings.push_back(std::string(name) + ": " + e.what());
    return ojson(nullptr);
  }
}

// MSE over cells present in both curves (cell-count mismatches are the
// caller's concern; intersection keeps human/model comparisons usable).
ojson curve_mse_json(const CurveByKey& a, const CurveByKey& b) {
  std::vector<double> va;
  std::vector<double> vb;
  const std::size_t ng = std::min(a.groups.size(), b.groups.size());
  for (std::size_t g = 0; g < ng; ++g) {
    for (const auto& [key, cell] : a.groups[g].cells) {
      const auto it = b.groups[g].cells.find(key);
      if (it == b.groups[g].cells.end()) continue;
      va.push_back(cell.value);
      vb.push_back(it->second.value);
    }
  }
  if (va.empty()) return ojson(nullptr);
  return ojson(stats::mse(va, vb));
}

void cmd_stats(const std::string& in_path, const std::string& out_path,
               const std::string& ref_path) {
  const CurvesFile input = parse_curves_json(load_text(in_path));
  std::vector<std::string> warnings;

  ojson report;
  report["schema"] = "deam-stats-v1";
  report["scenario"] = std::string(to_string(input.meta.scenario));
  report["config_hash"] = hex16(input.meta.config_hash);
  ojson tests;
  tests["choice_vs_bias"] = slope_test_json(input.curves.choice_by_bias, "choice_vs_bias",
                                            warnings);
  tests["rt_vs_clarity"] = slope_test_json(input.curves.rt_clarity.pooled, "rt_vs_clarity",
                                           warnings);
  tests["switches_vs_clarity"] =
      slope_test_json(input.curves.switches_clarity.pooled, "switches_vs_clarity", warnings);
  tests["kw_switches_across_clarity"] =
      kw_json(input.curves.switches_clarity.pooled, "kw_switches_across_clarity", warnings);
  report["tests"] = std::move(tests);

  if (!ref_path.empty()) {
    const CurvesFile ref = parse_curves_json(load_text(ref_path));
    ojson mse;
    mse["choice_prob_by_bias"] = curve_mse_json(input.curves.choice_by_bias,
                                                ref.curves.choice_by_bias);
    mse["rt_by_clarity"] = curve_mse_json(input.curves.rt_clarity.pooled,
                                          ref.curves.rt_clarity.pooled);
    mse["switches_by_clarity"] = curve_mse_json(input.curves.switches_clarity.pooled,
                                                ref.curves.switches_clarity.pooled);
    report["mse_vs_reference"] = std::move(mse);
  }
  report["warnings"] = warnings;

  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    save_text(out_path, text);
    std::cout << "wrote stats report to " << out_path << "\n";
  }
}

void cmd_fit(const CommonFlags& flags, const std::string& targets_path,
             const std::string& out_path) {
  const RunConfig config = effective_config(flags);
  const CurvesFile targets = parse_curves_json(load_text(targets_path));

  fitting::FitSetup setup;
  setup.scenario = config.scenario;
  setup.design = config.design;
  setup.fix_config = config.fixation;
  setup.dt = config.params.dt;
  setup.t_max = config.params.t_max;
  setup.convention = config.params.sign_convention;
  setup.eval_seed = config.eval_seed;
  setup.weights = config.weights;
  setup.run.threads = config.threads;
  setup.run.kernel = config.kernel;

  const auto fit = fitting::fit_ga(targets.curves, config.space, config.ga, setup);
  save_text(out_path, fit_to_json(fit, config));
  std::cout << "best objective " << format_double(fit.objective) << " after "
            << (fit.history.size() - 1) << " generations; wrote " << out_path << "\n";
}

void cmd_momentary(double z_bar, double sigma_z, double theta_value, double dt, long n,
                   std::uint64_t seed, const std::string& out_path) {
  std::ostringstream out;
  out << "t,attended,unattended\n";
  rng::Stream stream(rng::derive_key(seed, 0, 2));
  for (long i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const MomentarySample s = sample_momentary_evidence(theta_value, sigma_z, z_bar, dt, t,
                                                        stream);
    out << format_double(s.t) << ',' << format_double(s.attended_evidence) << ','
        << format_double(s.unattended_evidence) << "\n";
  }
  save_text(out_path, out.str());
  std::cout << "wrote " << n << " momentary-evidence samples to " << out_path << "\n";
}

void cmd_trace(const CommonFlags& flags, int z1, int z2, const std::string& out_path) {
  const RunConfig config = effective_config(flags);
  const TrialCondition condition = make_condition(config.scenario, z1, z2);

  // Streams match trial 0 of a simulated batch under the same seed.
  rng::Stream sched_stream(rng::derive_key(config.seed, 0, 0));
  const FixationSchedule schedule =
      generate_schedule(config.scenario, config.fixation, config.params.t_max, sched_stream);
  rng::Stream noise_stream(rng::derive_key(config.seed, 0, 1));
  const TrialOutcome outcome =
      simulate_trial(condition, config.params, schedule, noise_stream, true);

  std::ostringstream out;
  out << "t,v,target,bound_upper,bound_lower\n";
  for (const auto& point : outcome.trace) {
    const double b = bound_upper(point.t, config.params.r, config.params.b_start);
    const FixationTarget target = point.t < schedule.total
                                      ? fixation_at(schedule, point.t)
                                      : schedule.segments.back().target;
    out << format_double(point.t) << ',' << format_double(point.v) << ',' << to_string(target)
        << ',' << format_double(b) << ',' << format_double(-b) << "\n";
  }
  save_text(out_path, out.str());
  std::cout << to_string(outcome.choice) << " at rt " << format_double(outcome.rt) << " s after "
            << outcome.n_switches << " switches; wrote " << out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulation and analysis toolkit for attention-modulated driving decisions"};
  app.require_subcommand(1);

  CommonFlags sim_flags;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "run a trial batch and write a trials CSV");
  add_common(sim, sim_flags);
  sim->add_option("--out", sim_out, "output trials CSV path")->required();
  sim->callback([&] { cmd_simulate(sim_flags, sim_out); });

  CommonFlags sum_flags;
  std::string sum_in;
  std::string sum_out;
  auto* sum = app.add_subcommand("summarize", "aggregate a trials CSV into curves JSON");
  add_common(sum, sum_flags);
  sum->add_option("--in", sum_in, "trials CSV (simulated or human)")->required();
  sum->add_option("--out", sum_out, "output curves JSON path")->required();
  sum->callback([&] { cmd_summarize(sum_flags, sum_in, sum_out); });

  std::string stats_in;
  std::string stats_out;
  std::string stats_ref;
  auto* sta = app.add_subcommand("stats", "run the statistical tests on a curves JSON");
  sta->add_option("--in", stats_in, "curves JSON")->required();
  sta->add_option("--out", stats_out, "report path (default: stdout)");
  sta->add_option("--ref", stats_ref, "reference curves JSON for MSE comparison");
  sta->callback([&] { cmd_stats(stats_in, stats_out, stats_ref); });

  CommonFlags fit_flags;
  std::string fit_targets;
  std::string fit_out;
  auto* fit = app.add_subcommand("fit", "fit model parameters to target curves");
  add_common(fit, fit_flags);
  fit->add_option("--targets", fit_targets, "target curves JSON")->required();
  fit->add_option("--out", fit_out, "output fit JSON path")->required();
  fit->callback([&] { cmd_fit(fit_flags, fit_targets, fit_out); });

  double mom_z_bar = 1.0;
  double mom_sigma_z = 1.0;
  double mom_theta = 0.3;
  double mom_dt = 0.01;
  long mom_n = 100000;
  std::uint64_t mom_seed = 0;
  std::string mom_out;
  auto* mom = app.add_subcommand("momentary", "sample the momentary-evidence distributions");
  mom->add_option("--z-bar", mom_z_bar, "mean perceptual state");
  mom->add_option("--sigma-z", mom_sigma_z, "perceptual noise sd");
  mom->add_option("--theta", mom_theta, "attention discount in (0,1]");
  mom->add_option("--dt", mom_dt, "step size in seconds");
  mom->add_option("--n", mom_n, "number of samples");
  mom->add_option("--seed", mom_seed, "sample stream seed");
  mom->add_option("--out", mom_out, "output CSV path")->required();
  mom->callback([&] {
    if (mom_n < 0) throw ConfigError("--n must be >= 0");
    cmd_momentary(mom_z_bar, mom_sigma_z, mom_theta, mom_dt, mom_n, mom_seed, mom_out);
  });

  CommonFlags trace_flags;
  int trace_z1 = 3;
  int trace_z2 = 1;
  std::string trace_out;
  auto* tra = app.add_subcommand("trace", "record one trial's accumulator trajectory");
  add_common(tra, trace_flags);
  tra->add_option("--z1", trace_z1, "option-1 item state (1..3)");
  tra->add_option("--z2", trace_z2, "option-2 item state (1..3)");
  tra->add_option("--out", trace_out, "output CSV path")->required();
  tra->callback([&] { cmd_trace(trace_flags, trace_z1, trace_z2, trace_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
