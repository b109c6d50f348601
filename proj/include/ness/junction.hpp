#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace ness {

/// omega = 6J/(1+6J).
template <typename Scalar>
Scalar junction_contraction(Scalar coupling) {
  return Scalar(6) * coupling / (Scalar(1) + Scalar(6) * coupling);
}

/// Positive root of 3 = omega (2 + cosh gamma), by bisection.
template <typename Scalar = double>
Scalar solve_gamma(Scalar coupling, Scalar tol = Scalar(1e-15)) {
  using std::cosh;
  if (!(coupling > Scalar(0))) throw std::invalid_argument("solve_gamma requires J > 0");
  const Scalar omega = junction_contraction(coupling);
  const auto f = [&](Scalar g) { return omega * (Scalar(2) + cosh(g)) - Scalar(3); };
  // f(0) = 3 omega - 3 < 0 and f is increasing on [0, inf).
  Scalar lo(0);
  Scalar hi(1);
  while (f(hi) < Scalar(0)) hi *= Scalar(2);
  while (hi - lo > tol) {
    const Scalar mid = lo + (hi - lo) / Scalar(2);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < Scalar(0) ? lo : hi) = mid;
  }
  return lo + (hi - lo) / Scalar(2);
}

/// arccosh(3/omega - 2), the same root in closed form.
template <typename Scalar = double>
Scalar gamma_closed_form(Scalar coupling) {
  using std::acosh;
  return acosh(Scalar(3) / junction_contraction(coupling) - Scalar(2));
}

/// Infinite-volume profile across the field discontinuity at x1 = 0 (lambda = 0).
///
///   x1 >= 0:  m(x1) = m0 exp(-gamma x1)
///   x1 <  0:  m(x1) = -|h| + amplitude exp(-gamma (|x1| - 1))
///
/// Both amplitudes come from requiring the one-dimensional recursion
///   m(x) = omega (2/3 m(x) + 1/6 m(x-1) + 1/6 m(x+1)) - |h|/(1+6J) 1[x<0]
/// at x1 = 0 and x1 = -1; elsewhere the branches satisfy it by the choice of gamma.
template <typename Scalar = double>
struct JunctionLayer {
  Scalar coupling;
  Scalar field;
  Scalar gamma;
  Scalar m0;
  Scalar amplitude;

  [[nodiscard]] Scalar operator()(int x1) const {
    using std::abs;
    using std::exp;
    if (x1 >= 0) return m0 * exp(-gamma * Scalar(x1));
    return -abs(field) + amplitude * exp(-gamma * Scalar(-x1 - 1));
  }

  /// Right-hand side minus left-hand side of the recursion at x1.
  [[nodiscard]] Scalar recursion_residual(int x1) const {
    using std::abs;
    const Scalar omega = junction_contraction(coupling);
    const Scalar source = x1 < 0 ? abs(field) / (Scalar(1) + Scalar(6) * coupling) : Scalar(0);
    const Scalar rhs = omega * (Scalar(2) / Scalar(3) * (*this)(x1) + ((*this)(x1 - 1) + (*this)(x1 + 1)) / Scalar(6)) -
                       source;
    return rhs - (*this)(x1);
  }
};

template <typename Scalar = double>
JunctionLayer<Scalar> junction_profile(Scalar coupling, Scalar field) {
  using std::abs;
  using std::exp;
  if (!(coupling > Scalar(0))) throw std::invalid_argument("junction_profile requires J > 0");
  if (!(field < Scalar(0))) throw std::invalid_argument("junction_profile requires h < 0");
  const Scalar gamma = solve_gamma(coupling);
  const Scalar omega = junction_contraction(coupling);
  const Scalar q = exp(-gamma);
  const Scalar hh = abs(field);
  const Scalar source = hh / (Scalar(1) + Scalar(6) * coupling);
  const Scalar third = Scalar(1) / Scalar(3);
  const Scalar sixth = Scalar(1) / Scalar(6);

  // Unknowns (m0, a). m(-1) = -|h| + a, m(-2) = -|h| + a q, m(1) = m0 q.
  // x1 = 0:   m0 = omega (2/3 m0 + 1/6 (-|h| + a) + 1/6 m0 q)
  // x1 = -1: -|h| + a = omega (2/3 (-|h| + a) + 1/6 (-|h| + a q) + 1/6 m0) - source
  Eigen::Matrix<Scalar, 2, 2> lhs;
  Eigen::Matrix<Scalar, 2, 1> rhs;
  lhs(0, 0) = Scalar(1) - omega * (Scalar(2) * third + sixth * q);
  lhs(0, 1) = -omega * sixth;
  rhs(0) = -omega * sixth * hh;
  lhs(1, 0) = -omega * sixth;
  lhs(1, 1) = Scalar(1) - omega * (Scalar(2) * third + sixth * q);
  rhs(1) = hh - omega * (Scalar(2) * third + sixth) * hh - source;
  const Eigen::Matrix<Scalar, 2, 1> sol = lhs.fullPivLu().solve(rhs);
  return {coupling, field, gamma, sol(0), sol(1)};
}

/// Truncated series -|h|/(1+6J) sum_{n<=n_max} omega^n P[S_n < 0 | S_0 = x1] where S is the
/// first coordinate of the simple random walk on Z^3 (holds w.p. 2/3, steps +-1 w.p. 1/6).
template <typename Scalar = double>
Scalar junction_series_oracle(Scalar coupling, Scalar field, int x1, int n_max) {
  using std::abs;
  if (n_max < 1) throw std::invalid_argument("junction_series_oracle requires n_max >= 1");
  const Scalar omega = junction_contraction(coupling);
  // dist[k] = P[S_n = x1 - n + k], k = 0..2n
  std::vector<Scalar> dist{Scalar(1)};
  Scalar weight(1);
  Scalar total(0);
  for (int n = 0; n <= n_max; ++n) {
    const int origin = x1 - n;
    Scalar below(0);
    for (int k = 0; k < static_cast<int>(dist.size()) && origin + k < 0; ++k) below += dist[static_cast<std::size_t>(k)];
    total += weight * below;
    weight *= omega;
    std::vector<Scalar> next(dist.size() + 2, Scalar(0));
    for (std::size_t k = 0; k < dist.size(); ++k) {
      next[k] += dist[k] / Scalar(6);
      next[k + 1] += Scalar(2) * dist[k] / Scalar(3);
      next[k + 2] += dist[k] / Scalar(6);
    }
    dist = std::move(next);
  }
  return -abs(field) / (Scalar(1) + Scalar(6) * coupling) * total;
}

/// Upper bound omega^{n_max+1}/(1-omega) |h|/(1+6J) on the omitted tail of the series.
template <typename Scalar = double>
Scalar junction_series_tail_bound(Scalar coupling, Scalar field, int n_max) {
  using std::abs;
  using std::pow;
  const Scalar omega = junction_contraction(coupling);
  return pow(omega, Scalar(n_max + 1)) / (Scalar(1) - omega) * abs(field) / (Scalar(1) + Scalar(6) * coupling);
}

/// Macroscopic profile -(lambda/2) r1 + h 1[r1 < 0] on 0 < |r1| < 2.
template <typename Scalar = double>
Scalar macroscopic_profile(Scalar r1, Scalar lambda, Scalar field) {
  using std::abs;
  if (r1 == Scalar(0)) throw std::invalid_argument("macroscopic profile is discontinuous at r1 = 0");
  if (!(abs(r1) < Scalar(2))) throw std::invalid_argument("macroscopic profile requires |r1| < 2");
  return -lambda / Scalar(2) * r1 + (r1 < Scalar(0) ? field : Scalar(0));
}

/// dm/dr1 of the macroscopic profile.
template <typename Scalar = double>
Scalar macroscopic_slope(Scalar lambda) {
  return -lambda / Scalar(2);
}

/// Limit of N times the e1 bond current.
template <typename Scalar = double>
Scalar macroscopic_current(Scalar lambda) {
  return lambda / Scalar(2);
}

}  // namespace ness
