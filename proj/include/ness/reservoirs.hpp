#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "ness/lattice.hpp"
#include "ness/random.hpp"

namespace ness {

struct WalkState {
  Site position;
  long time = 0;  // jumps of the embedded chain
};

struct MCEstimate {
  double value = 0.0;
  double stderr = 0.0;
  long n_samples = 0;
};

/// One jump of the embedded chain: a uniformly chosen ambient neighbor.
WalkState walk_step(const LatticeDomain& domain, const WalkState& state, Rng& rng);

/// R = max(ceil(M^(2+eps)), M^2 + 1).
int default_far_offset(int m, double eps = 0.1);

struct ReservoirConfig {
  int far_offset = 0;  // 0 selects default_far_offset(M, eps)
  double eps = 0.1;
  long n_samples = 10000;
  std::uint64_t seed = 1;
  long step_cap = 10'000'000;
  int threads = 1;

  [[nodiscard]] int resolved_far_offset(int m) const;
  void validate(int m) const;
};

/// Capped samples above this fraction invalidate an estimate.
inline constexpr double kMaxCappedFraction = 1e-3;

struct AbsorptionEstimate {
  MCEstimate p_left;
  MCEstimate p_right;
  long capped = 0;
  int far_offset = 0;
  bool valid = true;
};

/// Runs walks from x until x1 <= -N-R or x1 >= N+R. Probabilities are over uncapped samples.
AbsorptionEstimate estimate_absorption(const LatticeDomain& domain, const Site& x, const ReservoirConfig& config);

struct LambdaStarEstimate {
  MCEstimate estimate;  // lambda (p_left - p_right)
  long capped = 0;
  int far_offset = 0;
  bool valid = true;
};

LambdaStarEstimate estimate_lambda_star(const LatticeDomain& domain, const Site& x, double lambda,
                                        const ReservoirConfig& config);

/// Value with an error bar for combinations of independent estimates.
struct Residual {
  double value = 0.0;
  double stderr = 0.0;
};

/// f(x) - (1/K_x) sum over ambient neighbors f(y), errors combined in quadrature.
Residual harmonicity_residual(const LatticeDomain& domain, const std::function<MCEstimate(const Site&)>& estimator,
                              const Site& x);

struct HitEstimate {
  MCEstimate probability;
  long capped = 0;
};

/// Probability that the walk from start meets is_target before is_truncated.
/// A start inside the target counts as a hit; capped samples are excluded from the estimate.
HitEstimate hit_probability(const LatticeDomain& domain, const Site& start,
                            const std::function<bool(const Site&)>& is_target,
                            const std::function<bool(const Site&)>& is_truncated, long n_samples,
                            std::uint64_t seed, long step_cap = 10'000'000, int threads = 1);

/// Sigma^+ = {x1 = N, |x2|, |x3| <= M}.
bool in_sigma_plus(const LatticeDomain& domain, const Site& x);

struct SigmaHitEstimate {
  MCEstimate probability;  // a lower bound: walks are stopped at the truncation plane
  int truncation_x1 = 0;
  long capped = 0;
};

/// Truncation plane x1 = N + max(4d, d + 10), d = x1(start) - N.
int sigma_truncation_x1(const LatticeDomain& domain, const Site& start);

/// Probability of reaching Sigma^+ from start in the right reservoir; requires x1 >= N + R.
SigmaHitEstimate hitting_sigma_probability(const LatticeDomain& domain, const Site& start,
                                           const ReservoirConfig& config);

/// Mirror image across x1 = N - 1/2.
Site reflect_across_mouth(const LatticeDomain& domain, const Site& z);

/// X = z where z1 >= N, the mirror image elsewhere.
std::vector<Site> reflected_walk(const LatticeDomain& domain, std::span<const Site> z_trajectory);

inline constexpr double kNoHit = std::numeric_limits<double>::infinity();

/// Continuous-time Sigma^+ hitting time of the walk restricted to the right reservoir
/// (rate one per ambient neighbor). kNoHit when x1 reaches truncation_x1 first.
double constrained_hitting_time(const LatticeDomain& domain, const Site& start, int truncation_x1, Rng& rng,
                                long step_cap = 10'000'000);

/// Same quantity realized through the free walk on Z^3 (rate six) and reflected_walk.
double reflected_hitting_time(const LatticeDomain& domain, const Site& start, int truncation_x1, Rng& rng,
                              long step_cap = 10'000'000);

}  // namespace ness
