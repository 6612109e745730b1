#include "deam/rng.hpp"

#include <bit>
#include <cmath>

#include "deam/detail/normal_constants.hpp"

namespace deam::rng {

namespace {
using namespace deam::detail;

double tail_value(double q) {
  const double num = ((((acklam_c[0] * q + acklam_c[1]) * q + acklam_c[2]) * q + acklam_c[3]) * q +
                      acklam_c[4]) * q + acklam_c[5];
  const double den =
      (((acklam_d[0] * q + acklam_d[1]) * q + acklam_d[2]) * q + acklam_d[3]) * q + 1.0;
  return num / den;
}
}  // namespace

double portable_log(double x) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  double e = static_cast<double>(bits >> 52) - 1023.0;
  double m = std::bit_cast<double>((bits & 0x000fffffffffffffull) | 0x3ff0000000000000ull);
  if (m > log_sqrt2) {
    m = m * 0.5;
    e = e + 1.0;
  }
  const double t = (m - 1.0) / (m + 1.0);
  const double s = t * t;
  double p = log_poly[0];
  p = p * s + log_poly[1];
  p = p * s + log_poly[2];
  p = p * s + log_poly[3];
  p = p * s + log_poly[4];
  p = p * s + log_poly[5];
  p = p * s + log_poly[6];
  p = p * s + 1.0;
  return e * log_ln2 + 2.0 * (t * p);
}

double inv_normal_cdf(double p) {
  using namespace deam::detail;
  if (p < acklam_p_low) {
    const double q = std::sqrt(-2.0 * portable_log(p));
    return tail_value(q);
  }
  if (p > acklam_p_high) {
    const double q = std::sqrt(-2.0 * portable_log(1.0 - p));
    return -tail_value(q);
  }
  const double q = p - 0.5;
  const double r = q * q;
  const double num = ((((acklam_a[0] * r + acklam_a[1]) * r + acklam_a[2]) * r + acklam_a[3]) * r +
                      acklam_a[4]) * r + acklam_a[5];
  const double den = ((((acklam_b[0] * r + acklam_b[1]) * r + acklam_b[2]) * r + acklam_b[3]) * r +
                      acklam_b[4]) * r + 1.0;
  return (num * q) / den;
}

}  // namespace deam::rng
