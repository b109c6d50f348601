#include "ness/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ness {

BatchEstimate batch_means(std::span<const double> batch_values) {
  const auto k = batch_values.size();
  if (k < 2) throw std::invalid_argument("batch_means needs at least two batches");
  double sum = 0.0;
  for (double v : batch_values) sum += v;
  const double mean = sum / static_cast<double>(k);
  double ss = 0.0;
  for (double v : batch_values) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(k - 1);
  return {mean, std::sqrt(var / static_cast<double>(k))};
}

double binomial_stderr(double p, long n) {
  if (n <= 0) return 0.0;
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

namespace {

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 1000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(log_prefix);
  }
  // Lentz continued fraction
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(log_prefix) * h;
}

}  // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

ChiSquareResult chi_square_uniform(std::span<const long> counts) {
  if (counts.size() < 2) throw std::invalid_argument("chi_square_uniform needs at least two cells");
  double total = 0.0;
  for (long c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (long c : counts) stat += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
  const int dof = static_cast<int>(counts.size()) - 1;
  return {stat, dof, gamma_q(0.5 * dof, 0.5 * stat)};
}

}  // namespace ness
