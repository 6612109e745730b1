#include "deam/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace deam::stats {

namespace {

constexpr double cf_eps = 3e-16;
constexpr double cf_floor = 1e-300;
constexpr int cf_max_iter = 500;

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < cf_floor) d = cf_floor;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= cf_max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < cf_floor) d = cf_floor;
    c = 1.0 + aa / c;
    if (std::fabs(c) < cf_floor) c = cf_floor;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < cf_floor) d = cf_floor;
    c = 1.0 + aa / c;
    if (std::fabs(c) < cf_floor) c = cf_floor;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < cf_eps) return h;
  }
  throw InvalidState("incomplete beta continued fraction did not converge");
}

// Lower regularized gamma P(a,x) by series (valid for x < a+1).
double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < cf_max_iter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * cf_eps) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw InvalidState("incomplete gamma series did not converge");
}

// Upper regularized gamma Q(a,x) by continued fraction (valid for x >= a+1).
double gamma_q_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / cf_floor;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= cf_max_iter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < cf_floor) d = cf_floor;
    c = b + an / c;
    if (std::fabs(c) < cf_floor) c = cf_floor;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < cf_eps) {
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw InvalidState("incomplete gamma continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidParams("beta parameters must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
               b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double regularized_gamma_upper(double a, double x) {
  if (!(a > 0.0)) throw InvalidParams("gamma shape must be > 0");
  if (!(x >= 0.0)) throw InvalidParams("gamma argument must be >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double student_t_two_tailed_p(double t, long df) {
  if (df < 1) throw InvalidParams("t-test degrees of freedom must be >= 1");
  const double v = static_cast<double>(df);
  const double x = v / (v + t * t);
  return regularized_incomplete_beta(v / 2.0, 0.5, x);
}

double chi_square_upper_p(double x, long df) {
  if (df < 1) throw InvalidParams("chi-square degrees of freedom must be >= 1");
  return regularized_gamma_upper(static_cast<double>(df) / 2.0, x / 2.0);
}

RegressionResult linear_regression(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) {
    throw LengthMismatch("regression needs equally long x and y (" + std::to_string(xs.size()) +
                         " vs " + std::to_string(ys.size()) + ")");
  }
  const std::size_t n = xs.size();
  if (n < 2) throw InvalidState("regression needs at least 2 points");

  const double x_mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  const double y_mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - x_mean;
    sxx += dx * dx;
    sxy += dx * (ys[i] - y_mean);
  }
  if (sxx == 0.0) throw DegenerateX("x values have zero variance");

  RegressionResult res;
  res.slope = sxy / sxx;
  res.intercept = y_mean - res.slope * x_mean;
  res.n = static_cast<long>(n);
  return res;
}

TTestResult one_sample_ttest(const std::vector<double>& values, double mu0) {
  const std::size_t n = values.size();
  if (n < 2) throw InvalidState("t-test needs at least 2 values");
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) throw ZeroVariance("sample standard deviation is zero");

  TTestResult res;
  res.t = (mean - mu0) / (sd / std::sqrt(static_cast<double>(n)));
  res.df = static_cast<long>(n - 1);
  res.p_two_tailed = student_t_two_tailed_p(res.t, res.df);
  return res;
}

KWResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw InvalidState("Kruskal-Wallis needs at least 2 groups");
  std::size_t total = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) {
      throw InvalidState("Kruskal-Wallis group " + std::to_string(g) + " is empty");
    }
    total += groups[g].size();
  }

  struct Tagged {
    double value;
    std::size_t group;
  };
  std::vector<Tagged> pooled;
  pooled.reserve(total);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (double v : groups[g]) pooled.push_back({v, g});
  }
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const Tagged& a, const Tagged& b) { return a.value < b.value; });

  // Average ranks over ties; accumulate the tie-correction term.
  std::vector<double> rank_sum(groups.size(), 0.0);
  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].value == pooled[i].value) ++j;
    const double run = static_cast<double>(j - i);
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) rank_sum[pooled[k].group] += avg_rank;
    tie_term += run * run * run - run;
    i = j;
  }

  const double n = static_cast<double>(total);
  KWResult res;
  res.df = static_cast<long>(groups.size()) - 1;

  const double correction = 1.0 - tie_term / (n * n * n - n);
  if (correction == 0.0) {
    // Every pooled value identical: no rank information at all.
    res.h = 0.0;
    res.p = 1.0;
    return res;
  }

  double h = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    h += rank_sum[g] * rank_sum[g] / static_cast<double>(groups[g].size());
  }
  h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
  res.h = h / correction;
  res.p = chi_square_upper_p(res.h, res.df);
  return res;
}

double mse(const std::vector<double>& model_means, const std::vector<double>& target_means) {
  if (model_means.size() != target_means.size()) {
    throw LengthMismatch("mse needs equally long vectors (" +
                         std::to_string(model_means.size()) + " vs " +
                         std::to_string(target_means.size()) + ")");
  }
  if (model_means.empty()) throw LengthMismatch("mse needs at least one element");
  double sum = 0.0;
  for (std::size_t i = 0; i < model_means.size(); ++i) {
    const double d = model_means[i] - target_means[i];
    sum += d * d;
  }
  return sum / static_cast<double>(model_means.size());
}

TTestResult slope_ttest(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& per_group_xy,
    double mu0) {
  if (per_group_xy.size() < 2) throw InvalidState("slope test needs at least 2 groups");
  std::vector<double> slopes;
  slopes.reserve(per_group_xy.size());
  for (const auto& [xs, ys] : per_group_xy) {
    slopes.push_back(linear_regression(xs, ys).slope);
  }
  return one_sample_ttest(slopes, mu0);
}

}  // namespace deam::stats
