#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ness/model.hpp"

namespace ness {

struct DrivenSite {
  Index site;
  double target;  // chemical potential the Glauber drift pulls toward
};

/// Quadratic part of the generator: G = sum_bonds e_b e_b^T + sum_driven delta_z delta_z^T,
/// with e_b = delta_from - delta_to.
class MobilityStructure {
 public:
  MobilityStructure(Index size, std::vector<Bond> bonds, std::vector<DrivenSite> driven);

  [[nodiscard]] Index size() const { return size_; }
  [[nodiscard]] const std::vector<Bond>& bonds() const { return bonds_; }
  [[nodiscard]] const std::vector<DrivenSite>& driven() const { return driven_; }
  [[nodiscard]] const SparseMatrix<double>& operator_matrix() const { return g_; }

 private:
  Index size_;
  std::vector<Bond> bonds_;
  std::vector<DrivenSite> driven_;
  SparseMatrix<double> g_;
};

/// Linear drift c - B phi of the Langevin dynamics; the noise covariance rate is (2/beta) G.
struct LinearDrift {
  SparseMatrix<double> matrix;  // B = G (D - A)
  Vector<double> offset;        // c = G b0 + sum_driven delta_z target_z
  MobilityStructure mobility;
  double beta;
};

/// Bonds of the darken core plus Glauber sites: left face -> lambda, right face -> -lambda.
MobilityStructure darken_mobility(const QuadraticModel<double>& model);

/// B and c for an arbitrary mobility structure; no driven-site requirement.
LinearDrift linear_drift(const QuadraticModel<double>& model, MobilityStructure mobility);

/// Darken drift; rejects other geometries and structures without driven sites.
LinearDrift build_drift(const QuadraticModel<double>& model);

/// max |(B C + C B^T - (2/beta) G)_{ij}| for a dense covariance candidate C.
double lyapunov_residual(const LinearDrift& drift, const DenseMatrix<double>& covariance);

/// ||B m - c||_inf.
double mean_equation_residual(const LinearDrift& drift, const Vector<double>& mean);

/// max_i sum_j |B_ij|, a Gershgorin bound on the spectrum of B.
double gershgorin_bound(const SparseMatrix<double>& matrix);

enum class Integrator { euler_maruyama, exact_ou };

struct SimulationConfig {
  double dt = 1e-3;
  long n_steps = 100000;
  long burn_in = 10000;
  std::uint64_t seed = 1;
  long thin = 1;
  int batches = 30;
  Integrator integrator = Integrator::euler_maruyama;
  bool noise = true;  // false integrates the deterministic flow

  void validate() const;
};

class SimulationDiverged : public std::runtime_error {
 public:
  SimulationDiverged(const std::string& what, long step) : std::runtime_error(what), step_(step) {}
  [[nodiscard]] long step() const { return step_; }

 private:
  long step_;
};

class UnstableTimeStep : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TraceSummary {
  Vector<double> mean;            // time-averaged phi per site
  Vector<double> mean_stderr;     // batch-means standard error
  Vector<double> variance;        // time-averaged (phi - mean)^2 per site
  std::vector<Bond> bonds;        // bonds of the mobility structure, in order
  Vector<double> current;         // time-averaged dH/dphi_from - dH/dphi_to
  Vector<double> current_stderr;
  Vector<double> final_state;
  long n_samples = 0;
  int batches = 0;
};

struct CurrentEstimate {
  double value;
  double stderr;
};

/// Integrates the Langevin dynamics from phi = 0 and accumulates time averages after burn-in.
/// Euler-Maruyama applies one shared Gaussian increment per bond with opposite signs at its
/// two endpoints, so every bond move conserves the pair sum.
TraceSummary simulate(const QuadraticModel<double>& model, const SimulationConfig& config);

/// Independent replicas with counter-derived seeds; results do not depend on the thread count.
std::vector<TraceSummary> simulate_replicas(const QuadraticModel<double>& model, const SimulationConfig& config,
                                            int replicas, int threads);

/// Empirical current through bond (x, y) from a trace; y must be x + e_axis or x - e_axis.
CurrentEstimate empirical_current(const TraceSummary& trace, const LatticeDomain& domain, const Site& x,
                                  const Site& y);

/// Deterministic Euler step of the bond/driven update with explicit noise increments,
/// exposed for conservation tests. noise has one entry per bond followed by one per driven site.
void langevin_step(const QuadraticModel<double>& model, const MobilityStructure& mobility, double dt,
                   const Vector<double>& noise, Vector<double>& phi);

}  // namespace ness
