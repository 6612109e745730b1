#pragma once

#include <utility>
#include <vector>

#include "deam/error.hpp"

namespace deam::stats {

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  long n = 0;
};

struct TTestResult {
  double t = 0.0;
  long df = 0;
  double p_two_tailed = 1.0;
};

struct KWResult {
  double h = 0.0;
  long df = 0;
  double p = 1.0;
};

// Ordinary least squares; throws LengthMismatch or DegenerateX.
RegressionResult linear_regression(const std::vector<double>& xs, const std::vector<double>& ys);

// Two-tailed one-sample t-test; throws ZeroVariance when the sample sd is 0.
TTestResult one_sample_ttest(const std::vector<double>& values, double mu0);

// Kruskal-Wallis with average ranks and tie correction. When every pooled
// value is identical the correction denominator vanishes; that case is
// defined as h = 0, p = 1.
KWResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

double mse(const std::vector<double>& model_means, const std::vector<double>& target_means);

// Regress each group, then test the slopes against mu0.
TTestResult slope_ttest(const std::vector<std::pair<std::vector<double>, std::vector<double>>>&
                            per_group_xy,
                        double mu0 = 0.0);

// Distribution machinery behind the p-values (relative error <= 1e-8).
double regularized_incomplete_beta(double a, double b, double x);
double regularized_gamma_upper(double a, double x);
double student_t_two_tailed_p(double t, long df);
double chi_square_upper_p(double x, long df);

}  // namespace deam::stats
