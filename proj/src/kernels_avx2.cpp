// AVX2 batch kernel: four trials per vector register, lanes refilled from the
// task list as trials finish. Every floating-point operation mirrors the
// scalar engine in run_planned_trial / rng.cpp — same literals, same order,
// no FMA contraction — so outcomes are bit-identical to the scalar kernel.
// Rare events (fixation-segment changes, inverse-CDF tail draws, crossings)
// drop to scalar code that shares the exact same helpers.

#ifdef DEAM_HAVE_AVX2

#include <immintrin.h>

#include <cstdint>
#include <limits>

#include "deam/detail/normal_constants.hpp"
#include "kernel_common.hpp"

namespace deam::detail {
namespace {

// 64x64 -> low 64 bits via three 32x32 multiplies.
inline __m256i mul64_lo(__m256i a, __m256i b) {
  const __m256i a_hi = _mm256_srli_epi64(a, 32);
  const __m256i b_hi = _mm256_srli_epi64(b, 32);
  const __m256i lolo = _mm256_mul_epu32(a, b);
  const __m256i cross =
      _mm256_add_epi64(_mm256_mul_epu32(a, b_hi), _mm256_mul_epu32(a_hi, b));
  return _mm256_add_epi64(lolo, _mm256_slli_epi64(cross, 32));
}

inline __m256i vmix64(__m256i z) {
  z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 30));
  z = mul64_lo(z, _mm256_set1_epi64x(static_cast<long long>(0xbf58476d1ce4e5b9ull)));
  z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 27));
  z = mul64_lo(z, _mm256_set1_epi64x(static_cast<long long>(0x94d049bb133111ebull)));
  return _mm256_xor_si256(z, _mm256_srli_epi64(z, 31));
}

// Exact uint64 -> double for values below 2^52 (exponent-bias trick).
inline __m256d u52_to_double(__m256i x) {
  const __m256i bias = _mm256_set1_epi64x(0x4330000000000000ll);
  return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(x, bias)),
                       _mm256_set1_pd(4503599627370496.0));
}

// Mirrors rng::to_unit: ((x >> 12) + 0.5) * 2^-52, every operation exact.
inline __m256d to_unit_vec(__m256i x) {
  const __m256d d = u52_to_double(_mm256_srli_epi64(x, 12));
  return _mm256_mul_pd(_mm256_add_pd(d, _mm256_set1_pd(0.5)), _mm256_set1_pd(0x1p-52));
}

// Central branch of rng::inv_normal_cdf with identical operation order.
// Tail lanes (p outside [p_low, p_high]) are patched by the scalar function.
inline __m256d central_inv_cdf(__m256d p) {
  const __m256d q = _mm256_sub_pd(p, _mm256_set1_pd(0.5));
  const __m256d r = _mm256_mul_pd(q, q);
  __m256d num = _mm256_set1_pd(acklam_a[0]);
  num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(acklam_a[1]));
  num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(acklam_a[2]));
  num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(acklam_a[3]));
  num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(acklam_a[4]));
  num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(acklam_a[5]));
  __m256d den = _mm256_set1_pd(acklam_b[0]);
  den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(acklam_b[1]));
  den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(acklam_b[2]));
  den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(acklam_b[3]));
  den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(acklam_b[4]));
  den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(1.0));
  return _mm256_div_pd(_mm256_mul_pd(num, q), den);
}

inline int movemask_epi64(__m256i m) {
  return _mm256_movemask_pd(_mm256_castsi256_pd(m));
}

}  // namespace

std::vector<TrialOutcome> run_tasks_avx2(std::span<const kernels::TrialTask> tasks,
                                         const ModelParams& params) {
  const BatchPlans batch = build_plans(tasks, params);
  const long k_max = batch.k_max;
  std::vector<TrialOutcome> out(tasks.size());
  if (tasks.empty()) return out;
  if (k_max == 0) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      out[i] = finish_outcome(batch.plans[i], params.t_max, Choice::Timeout);
    }
    return out;
  }

  const double inf = std::numeric_limits<double>::infinity();
  const double* bounds = batch.bounds.data();

  // Lane bookkeeping lives in plain arrays; the hot state is loaded into
  // vector registers and spilled back only around rare per-lane events.
  alignas(32) std::uint64_t acc_a[4] = {};
  alignas(32) std::int64_t k_a[4] = {};
  alignas(32) double v_a[4] = {};
  alignas(32) double drift_a[4] = {};
  alignas(32) double end_a[4] = {inf, inf, inf, inf};
  int task_of[4] = {-1, -1, -1, -1};
  int seg_of[4] = {};
  const TrialPlan* plan_of[4] = {};

  std::size_t next_task = 0;
  int active_bits = 0;

  auto fill_lane = [&](int lane) {
    if (next_task >= tasks.size()) {
      task_of[lane] = -1;
      plan_of[lane] = nullptr;
      seg_of[lane] = 0;
      acc_a[lane] = 0;
      v_a[lane] = 0.0;
      drift_a[lane] = 0.0;
      end_a[lane] = inf;
      active_bits &= ~(1 << lane);
      return;
    }
    const std::size_t ti = next_task++;
    const TrialPlan& plan = batch.plans[ti];
    task_of[lane] = static_cast<int>(ti);
    plan_of[lane] = &plan;
    seg_of[lane] = 0;
    acc_a[lane] = plan.noise_key;  // Stream output i is mix64(key + i*golden)
    k_a[lane] = 0;
    v_a[lane] = 0.0;
    drift_a[lane] = plan.first_is1 ? plan.drift1 : plan.drift2;
    end_a[lane] = plan.nseg > 1 ? plan.cum[0] : inf;
    active_bits |= 1 << lane;
  };
  for (int lane = 0; lane < 4; ++lane) fill_lane(lane);

  const __m256i golden_v = _mm256_set1_epi64x(static_cast<long long>(rng::golden));
  const __m256i one_v = _mm256_set1_epi64x(1);
  const __m256i kmax_v = _mm256_set1_epi64x(k_max);
  const __m256i kmax_idx_v = _mm256_set1_epi64x(k_max - 1);
  const __m256d dt_v = _mm256_set1_pd(params.dt);
  const __m256d sigma_v = _mm256_set1_pd(params.sigma);
  const __m256d p_low_v = _mm256_set1_pd(acklam_p_low);
  const __m256d p_high_v = _mm256_set1_pd(acklam_p_high);
  const __m256d sign_bit = _mm256_set1_pd(-0.0);

  __m256i acc = _mm256_load_si256(reinterpret_cast<const __m256i*>(acc_a));
  __m256i kcur = _mm256_load_si256(reinterpret_cast<const __m256i*>(k_a));
  __m256d v = _mm256_load_pd(v_a);
  __m256d drift = _mm256_load_pd(drift_a);
  __m256d next_end = _mm256_load_pd(end_a);

  while (active_bits != 0) {
    kcur = _mm256_add_epi64(kcur, one_v);
    const __m256d t = _mm256_mul_pd(u52_to_double(kcur), dt_v);

    // Fixation-segment advance: the scalar loop runs whenever t >= cum[seg]
    // and a later segment exists; next_end is +inf on the last segment.
    const int adv_mask =
        _mm256_movemask_pd(_mm256_cmp_pd(t, next_end, _CMP_GE_OQ)) & active_bits;
    if (adv_mask != 0) {
      _mm256_store_si256(reinterpret_cast<__m256i*>(k_a), kcur);
      _mm256_store_pd(drift_a, drift);
      _mm256_store_pd(end_a, next_end);
      for (int lane = 0; lane < 4; ++lane) {
        if ((adv_mask & (1 << lane)) == 0) continue;
        const TrialPlan& plan = *plan_of[lane];
        const double tl = static_cast<double>(k_a[lane]) * params.dt;
        int seg = seg_of[lane];
        while (seg + 1 < plan.nseg && tl >= plan.cum[seg]) ++seg;
        seg_of[lane] = seg;
        const bool is1 = plan.first_is1 == ((seg & 1) == 0);
        drift_a[lane] = is1 ? plan.drift1 : plan.drift2;
        end_a[lane] = seg + 1 < plan.nseg ? plan.cum[seg] : inf;
      }
      drift = _mm256_load_pd(drift_a);
      next_end = _mm256_load_pd(end_a);
    }

    // Noise draw for this step in every lane.
    acc = _mm256_add_epi64(acc, golden_v);
    const __m256d u = to_unit_vec(vmix64(acc));
    __m256d g = central_inv_cdf(u);
    const __m256d in_tail = _mm256_or_pd(_mm256_cmp_pd(u, p_low_v, _CMP_LT_OQ),
                                         _mm256_cmp_pd(u, p_high_v, _CMP_GT_OQ));
    const int tail_mask = _mm256_movemask_pd(in_tail);
    if (tail_mask != 0) {
      alignas(32) double u_a[4];
      alignas(32) double g_a[4];
      _mm256_store_pd(u_a, u);
      _mm256_store_pd(g_a, g);
      for (int lane = 0; lane < 4; ++lane) {
        if (tail_mask & (1 << lane)) g_a[lane] = rng::inv_normal_cdf(u_a[lane]);
      }
      g = _mm256_load_pd(g_a);
    }
    const __m256d noise = _mm256_mul_pd(sigma_v, g);

    v = _mm256_add_pd(_mm256_add_pd(v, drift), noise);

    // Collapsing bound for this step; parked lanes overrun k_max, so clamp
    // their gather index to stay inside the array.
    __m256i idx = _mm256_sub_epi64(kcur, one_v);
    idx = _mm256_blendv_epi8(idx, kmax_idx_v, _mm256_cmpgt_epi64(idx, kmax_idx_v));
    const __m256d b = _mm256_i64gather_pd(bounds, idx, 8);

    const int up_mask = _mm256_movemask_pd(_mm256_cmp_pd(v, b, _CMP_GE_OQ));
    const int lo_mask =
        _mm256_movemask_pd(_mm256_cmp_pd(v, _mm256_xor_pd(b, sign_bit), _CMP_LE_OQ));
    const int end_mask = movemask_epi64(_mm256_cmpeq_epi64(kcur, kmax_v));
    const int done_mask = (up_mask | lo_mask | end_mask) & active_bits;
    if (done_mask != 0) {
      _mm256_store_si256(reinterpret_cast<__m256i*>(acc_a), acc);
      _mm256_store_si256(reinterpret_cast<__m256i*>(k_a), kcur);
      _mm256_store_pd(v_a, v);
      _mm256_store_pd(drift_a, drift);
      _mm256_store_pd(end_a, next_end);
      for (int lane = 0; lane < 4; ++lane) {
        if ((done_mask & (1 << lane)) == 0) continue;
        const TrialPlan& plan = *plan_of[lane];
        const double tl = static_cast<double>(k_a[lane]) * params.dt;
        const double bl = bounds[k_a[lane] - 1];
        TrialOutcome result;
        if (v_a[lane] >= bl) {
          result = finish_outcome(plan, tl, Choice::Upper);
        } else if (v_a[lane] <= -bl) {
          result = finish_outcome(plan, tl, Choice::Lower);
        } else {
          result = finish_outcome(plan, params.t_max, Choice::Timeout);
        }
        out[static_cast<std::size_t>(task_of[lane])] = std::move(result);
        fill_lane(lane);
      }
      acc = _mm256_load_si256(reinterpret_cast<const __m256i*>(acc_a));
      kcur = _mm256_load_si256(reinterpret_cast<const __m256i*>(k_a));
      v = _mm256_load_pd(v_a);
      drift = _mm256_load_pd(drift_a);
      next_end = _mm256_load_pd(end_a);
    }
  }
  return out;
}

}  // namespace deam::detail

#endif  // DEAM_HAVE_AVX2
