#pragma once

// Batch simulation kernels. The scalar kernel is the reference; the AVX2
// kernel runs four trials per vector lane and must produce bit-identical
// outcomes (equivalence is enforced by tests). Selection happens at runtime
// so one binary serves both old and new x86 hosts.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "deam/accumulator.hpp"

namespace deam::kernels {

enum class Kind {
  Auto,    // AVX2 when compiled in and supported by the CPU, else scalar
  Scalar,
  Avx2,
};

std::string to_string(Kind kind);

// Accepts "auto", "scalar", "avx2"; throws InvalidConfig otherwise.
Kind parse_kind(const std::string& text);

bool avx2_supported();

// Resolves Auto against compile-time and CPU support; throws InvalidConfig
// when Avx2 is requested but unavailable.
Kind resolve(Kind kind);

// One trial of work: condition, fixation schedule, and the key of the
// counter-based noise stream that drives it. The schedule must outlive the
// run_trials call.
struct TrialTask {
  TrialCondition condition;
  const FixationSchedule* schedule = nullptr;
  std::uint64_t noise_key = 0;
};

// Runs every task under one parameter set. Outcomes are indexed like tasks
// and never include traces (use simulate_trial for traces).
std::vector<TrialOutcome> run_trials(std::span<const TrialTask> tasks,
                                     const ModelParams& params, Kind kind = Kind::Auto);

}  // namespace deam::kernels
