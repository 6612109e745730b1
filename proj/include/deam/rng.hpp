#pragma once

#include <cstdint>

namespace deam::rng {

inline constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ull;

// splitmix64 finalizer; counter-based usage gives O(1) stream positioning
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

// Deterministic stream key for (master seed, index, purpose). Every trial gets
// its own streams, so execution order and thread count never change results.
constexpr std::uint64_t derive_key(std::uint64_t master, std::uint64_t index,
                                   std::uint64_t purpose = 0) {
  return mix64(mix64(master + golden * (index + 1)) + golden * (purpose + 1));
}

// Map 52 random bits to the open interval (0,1); exactly representable and
// bounded away from both ends so the inverse CDF stays finite.
constexpr double to_unit(std::uint64_t x) {
  return (static_cast<double>(x >> 12) + 0.5) * 0x1p-52;
}

// log with an explicit operation sequence mirrored by the AVX2 kernel
// (abs error < 2e-14 on (0,1), which the inverse CDF below cannot resolve).
double portable_log(double x);

// Acklam's inverse normal CDF over (0,1); same operation order as the AVX2 kernel.
double inv_normal_cdf(double p);

// Counter-mode generator: output i is mix64(key + i*golden).
struct Stream {
  std::uint64_t key = 0;
  std::uint64_t ctr = 0;

  constexpr Stream() = default;
  explicit constexpr Stream(std::uint64_t k) : key(k) {}

  constexpr std::uint64_t next_u64() {
    ctr += 1;
    return mix64(key + golden * ctr);
  }
  double next_unit() { return to_unit(next_u64()); }
  double next_gaussian() { return inv_normal_cdf(next_unit()); }
};

}  // namespace deam::rng
