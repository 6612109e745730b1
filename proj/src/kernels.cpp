#include "deam/kernels.hpp"

#include "kernel_common.hpp"

namespace deam::kernels {

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::Auto: return "auto";
    case Kind::Scalar: return "scalar";
    default: return "avx2";
  }
}

Kind parse_kind(const std::string& text) {
  if (text == "auto") return Kind::Auto;
  if (text == "scalar") return Kind::Scalar;
  if (text == "avx2") return Kind::Avx2;
  throw InvalidConfig("unknown kernel '" + text + "' (expected auto, scalar, or avx2)");
}

bool avx2_supported() {
#ifdef DEAM_HAVE_AVX2
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Kind resolve(Kind kind) {
  if (kind == Kind::Auto) return avx2_supported() ? Kind::Avx2 : Kind::Scalar;
  if (kind == Kind::Avx2 && !avx2_supported()) {
    throw InvalidConfig("avx2 kernel requested but unavailable on this host");
  }
  return kind;
}

std::vector<TrialOutcome> run_trials(std::span<const TrialTask> tasks, const ModelParams& params,
                                     Kind kind) {
  const Kind chosen = resolve(kind);
#ifdef DEAM_HAVE_AVX2
  if (chosen == Kind::Avx2) return detail::run_tasks_avx2(tasks, params);
#else
  (void)chosen;
#endif
  return detail::run_tasks_scalar(tasks, params);
}

}  // namespace deam::kernels

namespace deam::detail {

BatchPlans build_plans(std::span<const kernels::TrialTask> tasks, const ModelParams& params) {
  BatchPlans batch;
  batch.k_max = num_steps(params.t_max, params.dt);
  batch.bounds.resize(static_cast<std::size_t>(batch.k_max));
  for (long k = 1; k <= batch.k_max; ++k) {
    batch.bounds[static_cast<std::size_t>(k - 1)] =
        bound_upper(static_cast<double>(k) * params.dt, params.r, params.b_start);
  }

  batch.plans.reserve(tasks.size());
  batch.cums.resize(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& task = tasks[i];
    if (task.schedule == nullptr) throw InvalidState("trial task has no schedule");
    validate_for_trial(task.condition, params, *task.schedule);
    fill_cum(*task.schedule, batch.cums[i]);
    TrialPlan plan = build_plan(task.condition, params, *task.schedule, task.noise_key);
    plan.cum = batch.cums[i].data();
    plan.nseg = static_cast<int>(batch.cums[i].size());
    batch.plans.push_back(plan);
  }
  return batch;
}

std::vector<TrialOutcome> run_tasks_scalar(std::span<const kernels::TrialTask> tasks,
                                           const ModelParams& params) {
  const BatchPlans batch = build_plans(tasks, params);
  std::vector<TrialOutcome> out(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    rng::Stream noise(batch.plans[i].noise_key);
    out[i] = run_planned_trial(batch.plans[i], params, batch.bounds.data(), batch.k_max, noise,
                               nullptr);
  }
  return out;
}

}  // namespace deam::detail
