#include <map>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "doctest.h"
#include "ness/random.hpp"
#include "ness/reservoirs.hpp"
#include "ness/statistics.hpp"

using namespace ness;

namespace {

bool within(double a, double b, double sigma, double k = 4.0) { return std::abs(a - b) <= k * sigma + 1e-15; }

}  // namespace

TEST_CASE("far-plane offset") {
  CHECK(default_far_offset(1) == 2);
  CHECK(default_far_offset(2) == 5);
  CHECK(default_far_offset(3) == 11);
  CHECK(default_far_offset(4) == 19);
  CHECK_THROWS_AS(default_far_offset(-1), std::invalid_argument);
  ReservoirConfig cfg;
  CHECK(cfg.resolved_far_offset(2) == 5);
  cfg.far_offset = 3;
  CHECK_THROWS_AS(cfg.validate(2), std::invalid_argument);
  cfg.far_offset = 9;
  CHECK(cfg.resolved_far_offset(2) == 9);
  CHECK_NOTHROW(cfg.validate(2));
}

TEST_CASE("walk steps are uniform over ambient neighbors") {
  Rng rng(3);
  const auto full = LatticeDomain::full_space();
  std::map<Site, long> seen;
  for (int k = 0; k < 60000; ++k) ++seen[walk_step(full, {{0, 0, 0}, 0}, rng).position];
  REQUIRE(seen.size() == 6);
  std::vector<long> counts;
  for (const auto& [s, c] : seen) counts.push_back(c);
  CHECK(chi_square_uniform(counts).p_value > 1e-3);

  // wall site with K = 5
  const auto ch = LatticeDomain::channel(4, 1);
  std::map<Site, long> wall;
  for (int k = 0; k < 50000; ++k) {
    const auto next = walk_step(ch, {{4, 2, 0}, 7}, rng);
    CHECK(next.time == 8);
    ++wall[next.position];
  }
  REQUIRE(wall.size() == 5);
  CHECK(wall.count({3, 2, 0}) == 0);
  counts.clear();
  for (const auto& [s, c] : wall) counts.push_back(c);
  CHECK(chi_square_uniform(counts).p_value > 1e-3);
}

TEST_CASE("free walk has marginal variance t/3") {
  Rng rng(4);
  const auto full = LatticeDomain::full_space();
  const int steps = 300;
  const int walks = 4000;
  double sum = 0.0, sum2 = 0.0;
  for (int w = 0; w < walks; ++w) {
    WalkState s{{0, 0, 0}, 0};
    for (int k = 0; k < steps; ++k) s = walk_step(full, s, rng);
    const double v = static_cast<double>(s.position.x1) * s.position.x1;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / walks;
  const double se = std::sqrt((sum2 / walks - mean * mean) / walks);
  CHECK(within(mean, steps / 3.0, se));
}

TEST_CASE("absorption") {
  const auto ch = LatticeDomain::channel(4, 1);
  ReservoirConfig cfg;
  cfg.n_samples = 4000;
  const auto mid = estimate_absorption(ch, {0, 0, 0}, cfg);
  CHECK(mid.valid);
  CHECK(mid.capped == 0);
  CHECK(mid.far_offset == 2);
  CHECK(mid.p_left.value + mid.p_right.value == doctest::Approx(1.0));
  CHECK(within(mid.p_left.value, 0.5, mid.p_left.stderr));

  const auto deep = estimate_absorption(ch, {6, 0, 0}, cfg);
  CHECK(deep.p_right.value == 1.0);
  CHECK(deep.p_left.value == 0.0);

  CHECK_THROWS_AS(estimate_absorption(LatticeDomain::darken(1), {0, 0, 0}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(estimate_absorption(ch, {0, 3, 0}, cfg), std::invalid_argument);

  ReservoirConfig capped = cfg;
  capped.step_cap = 2;
  capped.n_samples = 500;
  const auto bad = estimate_absorption(ch, {0, 0, 0}, capped);
  CHECK(bad.capped > 0);
  CHECK_FALSE(bad.valid);
}

TEST_CASE("reservoir value of lambda") {
  const auto ch = LatticeDomain::channel(4, 1);
  ReservoirConfig cfg;
  cfg.n_samples = 6000;
  const auto right = estimate_lambda_star(ch, {3, 0, 0}, 1.0, cfg);
  const auto left = estimate_lambda_star(ch, {-3, 0, 0}, 1.0, cfg);
  CHECK(right.estimate.value < 0.0);
  CHECK(left.estimate.value > 0.0);
  CHECK(std::abs(right.estimate.value) <= 1.0);
  CHECK(within(right.estimate.value, -left.estimate.value, std::hypot(right.estimate.stderr, left.estimate.stderr)));
  const auto zero = estimate_lambda_star(ch, {2, 1, 0}, 0.0, cfg);
  CHECK(zero.estimate.value == 0.0);
  CHECK(zero.estimate.stderr == 0.0);
  CHECK_FALSE(std::signbit(zero.estimate.value));

  // the thread count never changes the integer tallies
  ReservoirConfig threaded = cfg;
  threaded.threads = 3;
  const auto again = estimate_lambda_star(ch, {3, 0, 0}, 1.0, threaded);
  CHECK(again.estimate.value == right.estimate.value);
  CHECK(again.estimate.stderr == right.estimate.stderr);
}

TEST_CASE("harmonicity") {
  const auto full = LatticeDomain::full_space();
  const auto linear = [](const Site& x) { return MCEstimate{static_cast<double>(x.x1 + 2 * x.x2 - x.x3), 0.0, 1}; };
  const auto r = harmonicity_residual(full, linear, {3, -1, 2});
  CHECK(r.value == 0.0);
  CHECK(r.stderr == 0.0);
  const auto ch = LatticeDomain::channel(4, 1);
  const auto constant = [](const Site&) { return MCEstimate{0.7, 0.0, 1}; };
  CHECK(harmonicity_residual(ch, constant, {3, 1, 1}).value == doctest::Approx(0.0));

  ReservoirConfig cfg;
  cfg.n_samples = 3000;
  const auto estimator = [&](const Site& x) { return estimate_absorption(ch, x, cfg).p_left; };
  const auto mc = harmonicity_residual(ch, estimator, {1, 0, 1});
  CHECK(within(mc.value, 0.0, mc.stderr));
  CHECK(mc.stderr > 0.0);
}

TEST_CASE("hit probability against a linear-system oracle") {
  // Box |x_i| <= 3 of Z^3, target two sites, truncation outside the box.
  const int b = 3;
  const auto in_box = [b](const Site& x) { return std::abs(x.x1) <= b && std::abs(x.x2) <= b && std::abs(x.x3) <= b; };
  const auto is_target = [](const Site& x) { return x == Site{2, 0, 0} || x == Site{2, 1, 0}; };
  std::vector<Site> sites;
  std::map<Site, Eigen::Index> idx;
  for (int i = -b; i <= b; ++i)
    for (int j = -b; j <= b; ++j)
      for (int k = -b; k <= b; ++k) {
        const Site s{i, j, k};
        if (is_target(s)) continue;
        idx[s] = static_cast<Eigen::Index>(sites.size());
        sites.push_back(s);
      }
  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (const Site& step : kUnitSteps) {
      const Site y = sites[static_cast<std::size_t>(i)] + step;
      if (is_target(y))
        rhs(i) += 1.0 / 6.0;
      else if (in_box(y))
        a(i, idx.at(y)) -= 1.0 / 6.0;
    }
  const Eigen::VectorXd h = a.partialPivLu().solve(rhs);

  const auto full = LatticeDomain::full_space();
  for (const Site& start : {Site{0, 0, 0}, Site{1, 0, 0}, Site{-2, 2, 1}}) {
    const auto est = hit_probability(full, start, is_target, [&](const Site& x) { return !in_box(x); }, 20000, 9);
    CHECK(est.capped == 0);
    CHECK(within(est.probability.value, h(idx.at(start)), est.probability.stderr));
  }
  const auto inside = hit_probability(full, {2, 0, 0}, is_target, [&](const Site& x) { return !in_box(x); }, 10, 1);
  CHECK(inside.probability.value == 1.0);
}

TEST_CASE("returning to the channel mouth") {
  const auto ch = LatticeDomain::channel(4, 1);
  CHECK(in_sigma_plus(ch, {4, 1, -1}));
  CHECK_FALSE(in_sigma_plus(ch, {4, 2, 0}));
  CHECK_FALSE(in_sigma_plus(ch, {5, 0, 0}));
  CHECK(sigma_truncation_x1(ch, {6, 0, 0}) == 4 + 12);
  CHECK(sigma_truncation_x1(ch, {24, 0, 0}) == 4 + 80);

  ReservoirConfig cfg;
  cfg.n_samples = 4000;
  CHECK_THROWS_AS(hitting_sigma_probability(ch, {5, 0, 0}, cfg), std::invalid_argument);
  double previous = 1.0;
  double previous_se = 0.0;
  for (int x1 : {6, 8, 12}) {
    const auto p = hitting_sigma_probability(ch, {x1, 0, 0}, cfg);
    CHECK(p.probability.value > 0.0);
    CHECK(p.probability.value <= previous + 3.0 * std::hypot(p.probability.stderr, previous_se));
    previous = p.probability.value;
    previous_se = p.probability.stderr;
  }
}

TEST_CASE("reflected walk") {
  const auto ch = LatticeDomain::channel(4, 1);
  CHECK(reflect_across_mouth(ch, {3, 1, 2}) == Site{4, 1, 2});
  CHECK(reflect_across_mouth(ch, reflect_across_mouth(ch, {-7, 0, 5})) == Site{-7, 0, 5});
  const std::vector<Site> outside{{4, 0, 0}, {5, 0, 0}, {6, 1, 0}};
  CHECK(reflected_walk(ch, outside) == outside);

  Rng rng(12);
  const auto full = LatticeDomain::full_space();
  std::vector<Site> z{{4, 0, 0}};
  for (int k = 0; k < 2000; ++k) z.push_back(walk_step(full, {z.back(), 0}, rng).position);
  const auto x = reflected_walk(ch, z);
  for (std::size_t k = 0; k < x.size(); ++k) {
    CHECK(x[k].x1 >= 4);
    if (k > 0) CHECK((are_neighbors(x[k], x[k - 1]) || x[k] == x[k - 1]));
  }
}

TEST_CASE("constrained and reflected hitting times agree in law") {
  const auto ch = LatticeDomain::channel(4, 1);
  const int start_x1 = 6;
  const Site start{start_x1, 0, 0};
  const int trunc = sigma_truncation_x1(ch, start);
  std::vector<double> a, b;
  for (int s = 0; s < 3000; ++s) {
    Rng r1(substream_seed(1, {s}));
    Rng r2(substream_seed(2, {s}));
    a.push_back(constrained_hitting_time(ch, start, trunc, r1));
    b.push_back(reflected_hitting_time(ch, start, trunc, r2));
  }
  // compare the hitting events and the finite times separately
  std::vector<double> fa, fb;
  for (double t : a)
    if (t != kNoHit) fa.push_back(t);
  for (double t : b)
    if (t != kNoHit) fb.push_back(t);
  const double pa = static_cast<double>(fa.size()) / a.size();
  const double pb = static_cast<double>(fb.size()) / b.size();
  CHECK(within(pa, pb, std::hypot(binomial_stderr(pa, 3000), binomial_stderr(pb, 3000))));
  CHECK(ks_two_sample(fa, fb).p_value > 0.01);
}
