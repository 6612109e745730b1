#pragma once

// Shared constants for the inverse normal CDF and the portable log used by the
// noise generator. The scalar code in rng.cpp and the AVX2 code in
// kernels_avx2.cpp must evaluate the same polynomials with the same literals
// in the same operation order so that both produce bit-identical doubles.

namespace deam::detail {

// Acklam's rational approximation of the inverse normal CDF (|error| < 1.2e-9).
inline constexpr double acklam_a[6] = {
    -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
    1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
inline constexpr double acklam_b[5] = {
    -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
    6.680131188771972e+01,  -1.328068155288572e+01};
inline constexpr double acklam_c[6] = {
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
    -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
inline constexpr double acklam_d[4] = {
    7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
    3.754408661907416e+00};
inline constexpr double acklam_p_low = 0.02425;
inline constexpr double acklam_p_high = 1.0 - acklam_p_low;

// log(x) = e*ln2 + 2*t*P(t^2) with t = (m-1)/(m+1); odd artanh series terms.
inline constexpr double log_sqrt2 = 1.4142135623730951;
inline constexpr double log_ln2 = 0.6931471805599453;
inline constexpr double log_poly[7] = {
    1.0 / 15.0, 1.0 / 13.0, 1.0 / 11.0, 1.0 / 9.0, 1.0 / 7.0, 1.0 / 5.0, 1.0 / 3.0};

}  // namespace deam::detail
