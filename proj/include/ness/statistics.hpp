#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ness {

/// Mean and standard error of the mean from equally weighted batch means.
struct BatchEstimate {
  double mean = 0.0;
  double stderr = 0.0;
};

BatchEstimate batch_means(std::span<const double> batch_values);

/// Standard error of a Bernoulli frequency: sqrt(p(1-p)/n).
double binomial_stderr(double p, long n);

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Pearson chi-square statistic and upper-tail p-value against equal cell probabilities.
struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

ChiSquareResult chi_square_uniform(std::span<const long> counts);

}  // namespace ness
