#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "ness/model.hpp"

namespace ness {

struct SolverOptions {
  double tol = 1e-12;   // bound on ||(D-A) psi - b||_inf
  long max_iters = 0;   // 0 selects the a-priori bound from the contraction factor
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, long iterations, double residual)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}
  [[nodiscard]] long iterations() const { return iterations_; }
  [[nodiscard]] double residual() const { return residual_; }

 private:
  long iterations_;
  double residual_;
};

template <typename Scalar>
struct JacobiResult {
  Vector<Scalar> solution;
  long iterations = 0;
  Scalar residual = 0;
};

/// max_i sum_j A(i,j) / D(i,i): the sup-norm contraction of psi -> D^{-1}(A psi + b).
template <typename Scalar>
Scalar jacobi_contraction(const Vector<Scalar>& diag, const SparseMatrix<Scalar>& adjacency) {
  Scalar worst(0);
  for (Index i = 0; i < adjacency.outerSize(); ++i) {
    Scalar row(0);
    for (typename SparseMatrix<Scalar>::InnerIterator it(adjacency, i); it; ++it) row += std::abs(it.value());
    worst = std::max(worst, row / diag(i));
  }
  return worst;
}

/// Iterations needed to bring the residual below tol from psi = 0, given contraction omega.
template <typename Scalar>
long jacobi_iteration_bound(const Vector<Scalar>& diag, const Vector<Scalar>& rhs, Scalar omega, Scalar tol) {
  using std::log;
  const Scalar scaled_rhs = rhs.cwiseQuotient(diag).cwiseAbs().maxCoeff();
  if (scaled_rhs == Scalar(0)) return 1;
  // ||r_k|| <= max D * (1 + omega) * omega^k * ||psi*||, ||psi*|| <= ||D^{-1} b|| / (1 - omega)
  const Scalar scale = diag.maxCoeff() * (Scalar(1) + omega) * scaled_rhs / (Scalar(1) - omega);
  if (omega <= Scalar(0)) return 2;
  const Scalar k = log(tol / scale) / log(omega);
  return static_cast<long>(std::ceil(static_cast<double>(std::max(k, Scalar(0))))) + 10;
}

/// Fixed-point iteration psi <- D^{-1}(A psi + b), i.e. the series
/// psi = sum_n (D^{-1}A)^n D^{-1} b truncated once ||(D-A)psi - b||_inf <= tol.
template <typename Scalar>
JacobiResult<Scalar> jacobi_solve(const Vector<Scalar>& diag, const SparseMatrix<Scalar>& adjacency,
                                  const Vector<Scalar>& rhs, const SolverOptions& options = {}) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("solver tolerance must be > 0");
  const Scalar tol(options.tol);
  const Scalar omega = jacobi_contraction(diag, adjacency);
  if (!(omega < Scalar(1))) throw std::invalid_argument("fixed-point map is not a contraction");
  const long max_iters =
      options.max_iters > 0 ? options.max_iters : jacobi_iteration_bound(diag, rhs, omega, tol);

  JacobiResult<Scalar> out;
  out.solution = Vector<Scalar>::Zero(diag.size());
  Vector<Scalar> residual = -rhs;
  out.residual = residual.cwiseAbs().maxCoeff();
  while (out.residual > tol) {
    if (out.iterations >= max_iters)
    {
      std::ostringstream msg;
      msg << "fixed-point iteration did not reach tolerance " << options.tol << " in " << max_iters
          << " iterations (residual " << static_cast<double>(out.residual) << ")";
      throw SolverError(msg.str(), out.iterations, static_cast<double>(out.residual));
    }
    out.solution -= residual.cwiseQuotient(diag);
    residual = diag.cwiseProduct(out.solution) - adjacency * out.solution - rhs;
    out.residual = residual.cwiseAbs().maxCoeff();
    ++out.iterations;
  }
  return out;
}

/// Column i of sum_n (D^{-1}A)^n D^{-1}, i.e. of (D-A)^{-1}; stops when the geometric tail
/// bound ||v_n|| omega / (1 - omega) falls below tol.
template <typename Scalar>
Vector<Scalar> neumann_inverse_column(const Vector<Scalar>& diag, const SparseMatrix<Scalar>& adjacency, Index i,
                                      Scalar tol) {
  const Scalar omega = jacobi_contraction(diag, adjacency);
  Vector<Scalar> term = Vector<Scalar>::Zero(diag.size());
  term(i) = Scalar(1) / diag(i);
  Vector<Scalar> sum = term;
  while (term.cwiseAbs().maxCoeff() * omega / (Scalar(1) - omega) > tol) {
    term = (adjacency * term).cwiseQuotient(diag);
    sum += term;
  }
  return sum;
}

template <typename Scalar = double>
class GaussianSteadyState {
 public:
  GaussianSteadyState(QuadraticModel<Scalar> model, ScalarField<Scalar> mean, long iterations, Scalar residual)
      : model_(std::move(model)), mean_(std::move(mean)), iterations_(iterations), residual_(residual) {}

  [[nodiscard]] const QuadraticModel<Scalar>& model() const { return model_; }
  [[nodiscard]] const LatticeDomain& domain() const { return model_.domain(); }
  /// m_N.
  [[nodiscard]] const ScalarField<Scalar>& mean() const { return mean_; }
  [[nodiscard]] long iterations() const { return iterations_; }
  [[nodiscard]] Scalar residual() const { return residual_; }

  /// Gradient of the untilted Hamiltonian at the mean, (D-A)m - b0.
  [[nodiscard]] Vector<Scalar> untilted_gradient() const {
    return model_.apply_precision(mean_.values()) - model_.untilted_field();
  }

  /// Row of C_N = (2 beta (D-A))^{-1} = (2 beta)^{-1} sum_n D^{-1}(A D^{-1})^n.
  [[nodiscard]] Vector<Scalar> covariance_row(Index x, Scalar tol = Scalar(1e-14)) const {
    const Scalar scale = Scalar(1) / (Scalar(2) * Scalar(model_.params().beta));
    return scale * neumann_inverse_column(model_.diag(), model_.adjacency(), x, tol / scale);
  }
  [[nodiscard]] Vector<Scalar> covariance_row(const Site& x, Scalar tol = Scalar(1e-14)) const {
    return covariance_row(domain().index(x), tol);
  }
  [[nodiscard]] Scalar covariance_entry(const Site& x, const Site& y) const {
    return covariance_row(x)(domain().index(y));
  }

 private:
  QuadraticModel<Scalar> model_;
  ScalarField<Scalar> mean_;
  long iterations_;
  Scalar residual_;
};

/// Solves grad H^lambda = 0 by the fixed-point iteration; the solution is the stationary mean.
template <typename Scalar>
GaussianSteadyState<Scalar> stationary_mean(QuadraticModel<Scalar> model, const SolverOptions& options = {}) {
  auto result = jacobi_solve(model.diag(), model.adjacency(), model.linear_field(), options);
  ScalarField<Scalar> mean(model.domain_ptr(), std::move(result.solution));
  return GaussianSteadyState<Scalar>(std::move(model), std::move(mean), result.iterations, result.residual);
}

/// Direct solve of (D-A) m = b by LDL^T; oracle for small instances.
template <typename Scalar>
ScalarField<Scalar> dense_mean(const QuadraticModel<Scalar>& model) {
  const DenseMatrix<Scalar> p = model.dense_precision();
  Vector<Scalar> m = p.ldlt().solve(model.linear_field());
  return ScalarField<Scalar>(model.domain_ptr(), std::move(m));
}

/// (2 beta (D-A))^{-1} by dense factorization.
template <typename Scalar>
DenseMatrix<Scalar> dense_covariance(const QuadraticModel<Scalar>& model) {
  const DenseMatrix<Scalar> p = model.dense_precision();
  const Index n = p.rows();
  DenseMatrix<Scalar> inv = p.ldlt().solve(DenseMatrix<Scalar>::Identity(n, n));
  return inv / (Scalar(2) * Scalar(model.params().beta));
}

/// Current carried by bond x -> y, positive when magnetization flows from x to y.
template <typename Scalar = double>
struct BondCurrent {
  Site from;
  Site to;
  Scalar value;

  [[nodiscard]] BondCurrent reversed() const { return {to, from, -value}; }
};

/// Stationary mean of the instantaneous current dH/dphi_x - dH/dphi_y (untilted H).
template <typename Scalar>
BondCurrent<Scalar> stationary_current(const GaussianSteadyState<Scalar>& state, const Site& x, const Site& y) {
  const auto& dom = state.domain();
  if (!are_neighbors(x, y)) throw std::invalid_argument(to_string(x) + " and " + to_string(y) + " are not neighbors");
  const Index i = dom.index(x);
  const Index j = dom.index(y);
  const Scalar diag_i = state.model().diag()(i);
  const Scalar diag_j = state.model().diag()(j);
  const auto grad_at = [&](Index k, Scalar d) {
    Scalar g = d * state.mean()(k) - state.model().untilted_field()(k);
    for (typename SparseMatrix<Scalar>::InnerIterator it(state.model().adjacency(), k); it; ++it)
      g -= it.value() * state.mean()(it.col());
    return g;
  };
  return {x, y, grad_at(i, diag_i) - grad_at(j, diag_j)};
}

/// Currents on every core bond in domain().bonds() order (each oriented along +e_axis).
template <typename Scalar>
Vector<Scalar> bond_currents(const GaussianSteadyState<Scalar>& state) {
  const Vector<Scalar> grad = state.untilted_gradient();
  const auto& bonds = state.domain().bonds();
  Vector<Scalar> out(static_cast<Index>(bonds.size()));
  for (std::size_t b = 0; b < bonds.size(); ++b) out(static_cast<Index>(b)) = grad(bonds[b].from) - grad(bonds[b].to);
  return out;
}

/// Mean of phi over the section {x1 = const} (normalized by the section size).
template <typename Scalar>
Scalar sectional_average(const ScalarField<Scalar>& phi, int x1) {
  const auto section = phi.domain().section(x1);
  if (section.empty()) throw std::invalid_argument("section x1=" + std::to_string(x1) + " is empty");
  Scalar sum(0);
  for (Index i : section) sum += phi(i);
  return sum / Scalar(static_cast<Index>(section.size()));
}

/// Sum over the section {x1} of the e1-currents x -> x + e1, divided by the section size.
template <typename Scalar>
Scalar section_current(const GaussianSteadyState<Scalar>& state, int x1) {
  const auto& dom = state.domain();
  const auto section = dom.section(x1);
  if (section.empty() || x1 >= dom.x1_max()) throw std::invalid_argument("no e1-bonds leave section " + std::to_string(x1));
  const Vector<Scalar> grad = state.untilted_gradient();
  Scalar sum(0);
  for (Index i : section) sum += grad(i) - grad(dom.index(dom.site(i) + kUnitSteps[0]));
  return sum / Scalar(static_cast<Index>(section.size()));
}

/// Values of the field along the axis x2 = x3 = 0, indexed from x1_min.
template <typename Scalar>
std::vector<Scalar> axis_profile(const ScalarField<Scalar>& phi) {
  const auto& dom = phi.domain();
  std::vector<Scalar> out;
  for (int x1 = dom.x1_min(); x1 <= dom.x1_max(); ++x1) out.push_back(phi(dom.axis_index(x1)));
  return out;
}

struct UphillWindow {
  int first = 0;  // first x1 of the increasing run
  int last = -1;  // last x1 of the increasing run (the profile rises from first to last)
  [[nodiscard]] bool found() const { return last > first; }
};

/// First maximal run in {x1 >= 0} on the axis where the profile strictly increases while
/// the e1-current on each step of the run exceeds min_current (solver round-off otherwise
/// registers as a current when lambda = 0).
template <typename Scalar>
UphillWindow uphill_window(const GaussianSteadyState<Scalar>& state, Scalar min_current = Scalar(1e-9)) {
  const auto& dom = state.domain();
  if (dom.geometry() != Geometry::darken) throw std::invalid_argument("uphill_window requires the darken geometry");
  const Vector<Scalar> grad = state.untilted_gradient();
  UphillWindow w;
  bool open = false;
  for (int x1 = 0; x1 < dom.x1_max(); ++x1) {
    const Index i = dom.axis_index(x1);
    const Index j = dom.axis_index(x1 + 1);
    const bool rising = state.mean()(j) > state.mean()(i);
    const bool forward = grad(i) - grad(j) > min_current;
    if (rising && forward) {
      if (!open) w.first = x1;
      open = true;
      w.last = x1 + 1;
    } else if (open) {
      break;
    }
  }
  if (!open) w = UphillWindow{};
  return w;
}

}  // namespace ness
