#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ness/random.hpp"
#include "ness/statistics.hpp"

using namespace ness;

TEST_CASE("batch means") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto e = batch_means(v);
  CHECK(e.mean == 2.5);
  CHECK(e.stderr == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  const std::vector<double> flat(30, 0.25);
  CHECK(batch_means(flat).stderr == 0.0);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(batch_means(one), std::invalid_argument);
}

TEST_CASE("binomial standard error") {
  CHECK(binomial_stderr(0.5, 100) == doctest::Approx(0.05));
  CHECK(binomial_stderr(0.0, 100) == 0.0);
  CHECK(binomial_stderr(1.0, 100) == 0.0);
  CHECK(binomial_stderr(0.3, 0) == 0.0);
}

TEST_CASE("chi-square p-values") {
  const std::vector<long> even{10, 10, 10};
  CHECK(chi_square_uniform(even).statistic == 0.0);
  CHECK(chi_square_uniform(even).p_value == doctest::Approx(1.0));
  // critical values at the 5% level
  CHECK(chi_square_uniform(std::vector<long>{0, 0}).dof == 1);
  const std::vector<long> two{1000 + 31, 1000 - 31};  // statistic 1.9220
  CHECK(chi_square_uniform(two).statistic == doctest::Approx(2.0 * 31 * 31 / 1000.0));
  CHECK(chi_square_uniform(two).p_value == doctest::Approx(0.16560).epsilon(1e-3));
  const std::vector<long> skew{100, 0};
  CHECK(chi_square_uniform(skew).p_value < 1e-20);
  const std::vector<long> cell{5};
  CHECK_THROWS_AS(chi_square_uniform(cell), std::invalid_argument);
}

TEST_CASE("two-sample KS") {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{4, 5, 6};
  CHECK(ks_two_sample(a, b).statistic == 1.0);
  CHECK(ks_two_sample(a, a).statistic == 0.0);
  CHECK(ks_two_sample(a, a).p_value == 1.0);
  CHECK_THROWS_AS(ks_two_sample({}, a), std::invalid_argument);
}

TEST_CASE("property: KS p-values are roughly uniform under the null") {
  Rng rng(77);
  std::normal_distribution<double> g;
  int rejections = 0;
  const int trials = 300;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> a(200), b(150);
    for (double& v : a) v = g(rng);
    for (double& v : b) v = g(rng);
    if (ks_two_sample(a, b).p_value < 0.05) ++rejections;
  }
  CHECK(rejections < 0.1 * trials);

  std::vector<double> a(400), b(400);
  for (double& v : a) v = g(rng);
  for (double& v : b) v = g(rng) + 1.0;
  CHECK(ks_two_sample(a, b).p_value < 1e-6);
}

TEST_CASE("substream seeds") {
  CHECK(substream_seed(1, {2, 3}) == substream_seed(1, {2, 3}));
  CHECK(substream_seed(1, {2, 3}) != substream_seed(1, {3, 2}));
  CHECK(substream_seed(1, {2}) != substream_seed(2, {2}));
  CHECK(substream_seed(1, {0}) != substream_seed(1, {}));
}
