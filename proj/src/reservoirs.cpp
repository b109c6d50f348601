#include "ness/reservoirs.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "ness/statistics.hpp"

namespace ness {

namespace {

enum Outcome : int { first = 0, second = 1, capped = 2 };

// Runs outcome(sample) for sample = 0..n-1 on up to `threads` workers. Counts are integers,
// so the totals are independent of the schedule.
template <typename Fn>
std::array<long, 3> tally(long n, int threads, Fn&& outcome) {
  constexpr long kChunk = 256;
  std::atomic<long> next{0};
  const int workers = static_cast<int>(std::clamp<long>(threads, 1, std::max<long>(1, (n + kChunk - 1) / kChunk)));
  std::vector<std::array<long, 3>> partial(static_cast<std::size_t>(workers), {0, 0, 0});
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  const auto work = [&](int w) {
    try {
      for (long start = next.fetch_add(kChunk); start < n; start = next.fetch_add(kChunk)) {
        const long stop = std::min(n, start + kChunk);
        for (long s = start; s < stop; ++s) ++partial[static_cast<std::size_t>(w)][static_cast<std::size_t>(outcome(s))];
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::array<long, 3> total{0, 0, 0};
  for (const auto& p : partial)
    for (std::size_t k = 0; k < 3; ++k) total[k] += p[k];
  return total;
}

MCEstimate frequency(long hits, long n) {
  if (n == 0) return {0.0, 0.0, 0};
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, binomial_stderr(p, n), n};
}

Site uniform_neighbor(const LatticeDomain& domain, const Site& x, Rng& rng) {
  const NeighborList nbs = domain.neighbors(x);
  if (nbs.empty()) throw std::logic_error("isolated site " + to_string(x));
  std::uniform_int_distribution<std::size_t> pick(0, nbs.size() - 1);
  return nbs[pick(rng)].site;
}

void require_channel(const LatticeDomain& domain, const char* what) {
  if (domain.geometry() != Geometry::channel) throw std::invalid_argument(std::string(what) + " requires a channel domain");
}

}  // namespace

WalkState walk_step(const LatticeDomain& domain, const WalkState& state, Rng& rng) {
  return {uniform_neighbor(domain, state.position, rng), state.time + 1};
}

int default_far_offset(int m, double eps) {
  if (m < 0) throw std::invalid_argument("M must be >= 0");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  const double r = std::ceil(std::pow(static_cast<double>(m), 2.0 + eps) - 1e-9);
  return std::max(static_cast<int>(r), m * m + 1);
}

int ReservoirConfig::resolved_far_offset(int m) const { return far_offset > 0 ? far_offset : default_far_offset(m, eps); }

void ReservoirConfig::validate(int m) const {
  if (n_samples <= 0) throw std::invalid_argument("n_samples must be > 0");
  if (step_cap <= 0) throw std::invalid_argument("step_cap must be > 0");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (resolved_far_offset(m) < m * m + 1)
    throw std::invalid_argument("far-plane offset R = " + std::to_string(far_offset) + " must be >= M^2 + 1 = " +
                                std::to_string(m * m + 1));
}

AbsorptionEstimate estimate_absorption(const LatticeDomain& domain, const Site& x, const ReservoirConfig& config) {
  require_channel(domain, "estimate_absorption");
  config.validate(domain.m());
  if (!domain.in_ambient(x)) throw std::invalid_argument("start " + to_string(x) + " is outside the channel domain");
  const int r = config.resolved_far_offset(domain.m());
  const int left = -domain.n() - r;
  const int right = domain.n() + r;
  const auto counts = tally(config.n_samples, config.threads, [&](long sample) {
    Site pos = x;
    if (pos.x1 <= left) return Outcome::first;
    if (pos.x1 >= right) return Outcome::second;
    Rng rng(substream_seed(config.seed, {x.x1, x.x2, x.x3, sample}));
    for (long step = 0; step < config.step_cap; ++step) {
      pos = uniform_neighbor(domain, pos, rng);
      if (pos.x1 <= left) return Outcome::first;
      if (pos.x1 >= right) return Outcome::second;
    }
    return Outcome::capped;
  });
  const long done = counts[0] + counts[1];
  AbsorptionEstimate out;
  out.p_left = frequency(counts[0], done);
  out.p_right = frequency(counts[1], done);
  out.capped = counts[2];
  out.far_offset = r;
  out.valid = done > 0 && static_cast<double>(counts[2]) <= kMaxCappedFraction * static_cast<double>(config.n_samples);
  return out;
}

LambdaStarEstimate estimate_lambda_star(const LatticeDomain& domain, const Site& x, double lambda,
                                        const ReservoirConfig& config) {
  const AbsorptionEstimate a = estimate_absorption(domain, x, config);
  // p_left - p_right = 2 p_left - 1
  const double value = lambda * (a.p_left.value - a.p_right.value) + 0.0;
  const double err = 2.0 * std::abs(lambda) * a.p_left.stderr + 0.0;
  return {{value, err, a.p_left.n_samples}, a.capped, a.far_offset, a.valid};
}

Residual harmonicity_residual(const LatticeDomain& domain, const std::function<MCEstimate(const Site&)>& estimator,
                              const Site& x) {
  const NeighborList nbs = domain.neighbors(x);
  const MCEstimate center = estimator(x);
  const double k = static_cast<double>(nbs.size());
  double avg = 0.0;
  double var = center.stderr * center.stderr;
  for (const Neighbor& nb : nbs) {
    const MCEstimate e = estimator(nb.site);
    avg += e.value / k;
    var += e.stderr * e.stderr / (k * k);
  }
  return {center.value - avg, std::sqrt(var)};
}

HitEstimate hit_probability(const LatticeDomain& domain, const Site& start,
                            const std::function<bool(const Site&)>& is_target,
                            const std::function<bool(const Site&)>& is_truncated, long n_samples,
                            std::uint64_t seed, long step_cap, int threads) {
  if (n_samples <= 0) throw std::invalid_argument("n_samples must be > 0");
  if (!domain.in_ambient(start)) throw std::invalid_argument("start " + to_string(start) + " is outside the domain");
  const auto counts = tally(n_samples, threads, [&](long sample) {
    Site pos = start;
    if (is_target(pos)) return Outcome::first;
    if (is_truncated(pos)) return Outcome::second;
    Rng rng(substream_seed(seed, {start.x1, start.x2, start.x3, sample}));
    for (long step = 0; step < step_cap; ++step) {
      pos = uniform_neighbor(domain, pos, rng);
      if (is_target(pos)) return Outcome::first;
      if (is_truncated(pos)) return Outcome::second;
    }
    return Outcome::capped;
  });
  return {frequency(counts[0], counts[0] + counts[1]), counts[2]};
}

bool in_sigma_plus(const LatticeDomain& domain, const Site& x) {
  return x.x1 == domain.n() && std::abs(x.x2) <= domain.m() && std::abs(x.x3) <= domain.m();
}

int sigma_truncation_x1(const LatticeDomain& domain, const Site& start) {
  const int d = start.x1 - domain.n();
  return domain.n() + std::max(4 * d, d + 10);
}

SigmaHitEstimate hitting_sigma_probability(const LatticeDomain& domain, const Site& start,
                                           const ReservoirConfig& config) {
  require_channel(domain, "hitting_sigma_probability");
  config.validate(domain.m());
  const int r = config.resolved_far_offset(domain.m());
  if (start.x1 < domain.n() + r)
    throw std::invalid_argument("start must satisfy x1 >= N + R = " + std::to_string(domain.n() + r));
  const int trunc = sigma_truncation_x1(domain, start);
  const HitEstimate h = hit_probability(
      domain, start, [&](const Site& s) { return in_sigma_plus(domain, s); },
      [trunc](const Site& s) { return s.x1 >= trunc; }, config.n_samples, config.seed, config.step_cap,
      config.threads);
  return {h.probability, trunc, h.capped};
}

Site reflect_across_mouth(const LatticeDomain& domain, const Site& z) {
  return {2 * domain.n() - 1 - z.x1, z.x2, z.x3};
}

std::vector<Site> reflected_walk(const LatticeDomain& domain, std::span<const Site> z_trajectory) {
  std::vector<Site> out;
  out.reserve(z_trajectory.size());
  for (const Site& z : z_trajectory) out.push_back(z.x1 >= domain.n() ? z : reflect_across_mouth(domain, z));
  return out;
}

double constrained_hitting_time(const LatticeDomain& domain, const Site& start, int truncation_x1, Rng& rng,
                                long step_cap) {
  require_channel(domain, "constrained_hitting_time");
  if (start.x1 < domain.n()) throw std::invalid_argument("start must lie in the right reservoir");
  double t = 0.0;
  Site pos = start;
  for (long step = 0; step < step_cap; ++step) {
    if (in_sigma_plus(domain, pos)) return t;
    if (pos.x1 >= truncation_x1) return kNoHit;
    const NeighborList nbs = domain.neighbors(pos);
    t += std::exponential_distribution<double>(static_cast<double>(nbs.size()))(rng);
    pos = nbs[std::uniform_int_distribution<std::size_t>(0, nbs.size() - 1)(rng)].site;
  }
  return kNoHit;
}

double reflected_hitting_time(const LatticeDomain& domain, const Site& start, int truncation_x1, Rng& rng,
                              long step_cap) {
  require_channel(domain, "reflected_hitting_time");
  if (start.x1 < domain.n()) throw std::invalid_argument("start must lie in the right reservoir");
  const int mirror_trunc = 2 * domain.n() - 1 - truncation_x1;
  std::vector<Site> z{start};
  std::vector<double> times{0.0};
  std::exponential_distribution<double> hold(6.0);
  std::uniform_int_distribution<std::size_t> pick(0, kUnitSteps.size() - 1);
  // Extend the free path until its image stops.
  for (long step = 0; step < step_cap; ++step) {
    const Site& s = z.back();
    const Site image = s.x1 >= domain.n() ? s : reflect_across_mouth(domain, s);
    if (in_sigma_plus(domain, image) || s.x1 >= truncation_x1 || s.x1 <= mirror_trunc) break;
    times.push_back(times.back() + hold(rng));
    z.push_back(s + kUnitSteps[pick(rng)]);
  }
  const std::vector<Site> x = reflected_walk(domain, z);
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (in_sigma_plus(domain, x[k])) return times[k];
    if (x[k].x1 >= truncation_x1) return kNoHit;
  }
  return kNoHit;
}

}  // namespace ness
