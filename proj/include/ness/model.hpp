#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ness/lattice.hpp"

namespace ness {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, Index>;

using DomainPtr = std::shared_ptr<const LatticeDomain>;

inline DomainPtr share(LatticeDomain domain) { return std::make_shared<const LatticeDomain>(std::move(domain)); }

/// One real value per core site of a domain.
template <typename Scalar = double>
class ScalarField {
 public:
  explicit ScalarField(DomainPtr domain)
      : domain_(std::move(domain)), values_(Vector<Scalar>::Zero(domain_->size())) {}
  ScalarField(DomainPtr domain, Vector<Scalar> values) : domain_(std::move(domain)), values_(std::move(values)) {
    if (values_.size() != domain_->size())
      throw std::invalid_argument("ScalarField: " + std::to_string(values_.size()) + " values for " +
                                  std::to_string(domain_->size()) + " core sites");
  }

  [[nodiscard]] const LatticeDomain& domain() const { return *domain_; }
  [[nodiscard]] const DomainPtr& domain_ptr() const { return domain_; }
  [[nodiscard]] Index size() const { return values_.size(); }

  [[nodiscard]] const Vector<Scalar>& values() const { return values_; }
  Vector<Scalar>& values() { return values_; }

  Scalar& operator()(Index i) { return values_(i); }
  const Scalar& operator()(Index i) const { return values_(i); }
  Scalar& operator[](const Site& x) { return values_(domain_->index(x)); }
  const Scalar& operator[](const Site& x) const { return values_(domain_->index(x)); }

 private:
  DomainPtr domain_;
  Vector<Scalar> values_;
};

struct ModelParams {
  double coupling = 1.0;  // J > 0
  double beta = 1.0;      // inverse temperature > 0
  double field = 0.0;     // h <= 0, acts on {x1 < 0} of the darken geometry
  double lambda = 0.0;    // boundary chemical-potential amplitude
  double phi_bar_left = 0.0;
  double phi_bar_right = 0.0;

  /// Darken boundary values phi_bar_left = lambda + h, phi_bar_right = -lambda.
  static ModelParams darken(double coupling, double beta, double field, double lambda) {
    return {coupling, beta, field, lambda, lambda + field, -lambda};
  }
  /// Channel comparison model: no field and zero boundary conditions.
  static ModelParams channel(double coupling, double beta, double lambda) {
    return {coupling, beta, 0.0, lambda, 0.0, 0.0};
  }

  void validate() const {
    if (!(coupling > 0.0)) throw std::invalid_argument("coupling J must be > 0");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
    if (field > 0.0) throw std::invalid_argument("field h must be <= 0");
  }

  /// Contraction factor 6J/(1+6J) of the fixed-point iteration.
  [[nodiscard]] double contraction() const { return 6.0 * coupling / (1.0 + 6.0 * coupling); }
};

/// lambda_N(x1): linear, equal to lambda at x1=-2N-1 and -lambda at x1=2N.
template <typename Scalar = double>
Scalar darken_tilt(int n, Scalar lambda, int x1) {
  const Scalar left = Scalar(-2 * n - 1);
  const Scalar right = Scalar(2 * n);
  return lambda * (Scalar(x1) - right) / (left - right) - lambda * (Scalar(x1) - left) / (right - left);
}

template <typename Scalar = double>
Scalar channel_tilt(int n, Scalar lambda, int x1) {
  return -lambda * Scalar(x1) / Scalar(n);
}

template <typename Scalar = double>
ScalarField<Scalar> lambda_profile_darken(const DomainPtr& domain, Scalar lambda) {
  if (domain->geometry() != Geometry::darken) throw std::invalid_argument("lambda_profile_darken: not a darken domain");
  ScalarField<Scalar> out(domain);
  for (Index i = 0; i < domain->size(); ++i) out(i) = darken_tilt<Scalar>(domain->n(), lambda, domain->site(i).x1);
  return out;
}

template <typename Scalar = double>
ScalarField<Scalar> lambda_profile_channel(const DomainPtr& domain, Scalar lambda) {
  if (domain->geometry() != Geometry::channel) throw std::invalid_argument("lambda_profile_channel: not a channel domain");
  ScalarField<Scalar> out(domain);
  for (Index i = 0; i < domain->size(); ++i) out(i) = channel_tilt<Scalar>(domain->n(), lambda, domain->site(i).x1);
  return out;
}

/// Geometry-appropriate tilt: darken uses the interpolation between -2N-1 and 2N, channel uses -lambda x1/N.
template <typename Scalar = double>
ScalarField<Scalar> default_tilt(const DomainPtr& domain, Scalar lambda) {
  return domain->geometry() == Geometry::darken ? lambda_profile_darken<Scalar>(domain, lambda)
                                                : lambda_profile_channel<Scalar>(domain, lambda);
}

/// Quadratic Hamiltonian H(phi) = 1/2 <phi,(D-A)phi> - <b,phi> on the core, with
/// D = 1 + J K_x, A = J on core bonds, b = h_x + tilt + J * sum of frozen outside neighbors.
/// The untilted part b0 = b - tilt is kept separately; it drives the dynamics.
template <typename Scalar = double>
class QuadraticModel {
 public:
  QuadraticModel(DomainPtr domain, ModelParams params, Vector<Scalar> diag, SparseMatrix<Scalar> adjacency,
                 Vector<Scalar> field, Vector<Scalar> boundary, Vector<Scalar> tilt)
      : domain_(std::move(domain)),
        params_(params),
        diag_(std::move(diag)),
        adjacency_(std::move(adjacency)),
        field_(std::move(field)),
        boundary_(std::move(boundary)),
        tilt_(std::move(tilt)) {}

  [[nodiscard]] const LatticeDomain& domain() const { return *domain_; }
  [[nodiscard]] const DomainPtr& domain_ptr() const { return domain_; }
  [[nodiscard]] const ModelParams& params() const { return params_; }
  [[nodiscard]] Index size() const { return diag_.size(); }

  /// Diagonal of D.
  [[nodiscard]] const Vector<Scalar>& diag() const { return diag_; }
  /// Off-diagonal coupling matrix A.
  [[nodiscard]] const SparseMatrix<Scalar>& adjacency() const { return adjacency_; }
  /// h_x on the core.
  [[nodiscard]] const Vector<Scalar>& field() const { return field_; }
  /// J * sum over frozen outside neighbors of phi_bar.
  [[nodiscard]] const Vector<Scalar>& boundary() const { return boundary_; }
  [[nodiscard]] const Vector<Scalar>& tilt() const { return tilt_; }
  /// Untilted linear field b0 = h_x + boundary couplings.
  [[nodiscard]] Vector<Scalar> untilted_field() const { return field_ + boundary_; }
  /// Total linear field b.
  [[nodiscard]] Vector<Scalar> linear_field() const { return field_ + boundary_ + tilt_; }

  /// (D - A) phi.
  template <typename Derived>
  [[nodiscard]] Vector<Scalar> apply_precision(const Eigen::MatrixBase<Derived>& phi) const {
    return diag_.cwiseProduct(phi) - adjacency_ * phi;
  }

  /// Sparse D - A.
  [[nodiscard]] SparseMatrix<Scalar> precision() const {
    SparseMatrix<Scalar> p = -adjacency_;
    for (Index i = 0; i < size(); ++i) p.coeffRef(i, i) += diag_(i);
    p.makeCompressed();
    return p;
  }

  static constexpr Index kDenseLimit = 4000;

  /// Dense D - A, for oracle checks on small instances.
  [[nodiscard]] DenseMatrix<Scalar> dense_precision() const {
    if (size() > kDenseLimit)
      throw std::length_error("dense assembly limited to " + std::to_string(kDenseLimit) + " sites");
    DenseMatrix<Scalar> p = -DenseMatrix<Scalar>(adjacency_);
    p.diagonal() += diag_;
    return p;
  }

 private:
  DomainPtr domain_;
  ModelParams params_;
  Vector<Scalar> diag_;
  SparseMatrix<Scalar> adjacency_;
  Vector<Scalar> field_;
  Vector<Scalar> boundary_;
  Vector<Scalar> tilt_;
};

inline bool same_domain(const LatticeDomain& a, const LatticeDomain& b) {
  return &a == &b || (a.geometry() == b.geometry() && a.n() == b.n() && a.m() == b.m());
}

/// Builds D, A and b for the domain. h_x = h 1[x1<0] on darken, 0 on channel; outside
/// neighbors take phi_bar_left / phi_bar_right according to the reservoir they lie in.
template <typename Scalar = double>
QuadraticModel<Scalar> assemble(const DomainPtr& domain, const ModelParams& params, const ScalarField<Scalar>& tilt) {
  params.validate();
  if (domain->geometry() == Geometry::full_space) throw std::invalid_argument("assemble: full-space domain has no core");
  if (!same_domain(tilt.domain(), *domain)) throw std::invalid_argument("assemble: tilt is defined on a different domain");

  const Index n = domain->size();
  const Scalar j = Scalar(params.coupling);
  Vector<Scalar> diag(n), field(n), boundary(n);
  std::vector<Eigen::Triplet<Scalar, Index>> triplets;
  triplets.reserve(static_cast<std::size_t>(6 * n));

  for (Index i = 0; i < n; ++i) {
    const Site& x = domain->site(i);
    const auto nbs = domain->neighbors(x);
    diag(i) = Scalar(1) + j * Scalar(static_cast<int>(nbs.size()));
    field(i) = (domain->geometry() == Geometry::darken && x.x1 < 0) ? Scalar(params.field) : Scalar(0);
    Scalar couple(0);
    for (const auto& nb : nbs) {
      if (nb.kind == NeighborKind::core) {
        triplets.emplace_back(i, domain->index(nb.site), j);
      } else {
        couple += domain->in_left_reservoir(nb.site) ? Scalar(params.phi_bar_left) : Scalar(params.phi_bar_right);
      }
    }
    boundary(i) = j * couple;
  }
  SparseMatrix<Scalar> adjacency(n, n);
  adjacency.setFromTriplets(triplets.begin(), triplets.end());
  adjacency.makeCompressed();
  return QuadraticModel<Scalar>(domain, params, std::move(diag), std::move(adjacency), std::move(field),
                                std::move(boundary), tilt.values());
}

/// Convenience: assemble with the geometry's default tilt.
template <typename Scalar = double>
QuadraticModel<Scalar> assemble(const DomainPtr& domain, const ModelParams& params) {
  return assemble<Scalar>(domain, params, default_tilt<Scalar>(domain, Scalar(params.lambda)));
}

/// H^lambda(phi) = 1/2 <phi,(D-A)phi> - <b,phi>; the frozen self-energy constant is dropped.
template <typename Scalar, typename Derived>
Scalar hamiltonian_value(const QuadraticModel<Scalar>& model, const Eigen::MatrixBase<Derived>& phi) {
  if (phi.size() != model.size()) throw std::invalid_argument("hamiltonian_value: size mismatch");
  return Scalar(0.5) * phi.dot(model.apply_precision(phi)) - model.linear_field().dot(phi);
}

template <typename Scalar>
Scalar hamiltonian_value(const QuadraticModel<Scalar>& model, const ScalarField<Scalar>& phi) {
  return hamiltonian_value(model, phi.values());
}

}  // namespace ness
