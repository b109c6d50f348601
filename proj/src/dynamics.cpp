#include "ness/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "ness/random.hpp"
#include "ness/statistics.hpp"

namespace ness {

MobilityStructure::MobilityStructure(Index size, std::vector<Bond> bonds, std::vector<DrivenSite> driven)
    : size_(size), bonds_(std::move(bonds)), driven_(std::move(driven)), g_(size, size) {
  std::vector<Eigen::Triplet<double, Index>> t;
  t.reserve(4 * bonds_.size() + driven_.size());
  for (const Bond& b : bonds_) {
    if (b.from < 0 || b.from >= size || b.to < 0 || b.to >= size || b.from == b.to)
      throw std::invalid_argument("MobilityStructure: bond endpoint out of range");
    t.emplace_back(b.from, b.from, 1.0);
    t.emplace_back(b.to, b.to, 1.0);
    t.emplace_back(b.from, b.to, -1.0);
    t.emplace_back(b.to, b.from, -1.0);
  }
  for (const DrivenSite& z : driven_) {
    if (z.site < 0 || z.site >= size) throw std::invalid_argument("MobilityStructure: driven site out of range");
    t.emplace_back(z.site, z.site, 1.0);
  }
  g_.setFromTriplets(t.begin(), t.end());
  g_.makeCompressed();
}

MobilityStructure darken_mobility(const QuadraticModel<double>& model) {
  const auto& dom = model.domain();
  if (dom.geometry() != Geometry::darken) throw std::invalid_argument("darken_mobility: not a darken domain");
  const double lambda = model.params().lambda;
  std::vector<DrivenSite> driven;
  for (Index i : dom.section(dom.x1_min())) driven.push_back({i, lambda});
  for (Index i : dom.section(dom.x1_max())) driven.push_back({i, -lambda});
  return {dom.size(), dom.bonds(), std::move(driven)};
}

LinearDrift linear_drift(const QuadraticModel<double>& model, MobilityStructure mobility) {
  if (mobility.size() != model.size()) throw std::invalid_argument("linear_drift: mobility/model size mismatch");
  const SparseMatrix<double> precision = model.precision();
  SparseMatrix<double> b = mobility.operator_matrix() * precision;
  b.makeCompressed();
  Vector<double> c = mobility.operator_matrix() * model.untilted_field();
  for (const DrivenSite& z : mobility.driven()) c(z.site) += z.target;
  return {std::move(b), std::move(c), std::move(mobility), model.params().beta};
}

LinearDrift build_drift(const QuadraticModel<double>& model) {
  if (model.domain().geometry() != Geometry::darken)
    throw std::invalid_argument("build_drift: dynamics are defined on the darken geometry only");
  auto mobility = darken_mobility(model);
  if (mobility.driven().empty()) throw std::invalid_argument("build_drift: no driven sites, steady state not unique");
  return linear_drift(model, std::move(mobility));
}

double lyapunov_residual(const LinearDrift& drift, const DenseMatrix<double>& covariance) {
  const DenseMatrix<double> b(drift.matrix);
  const DenseMatrix<double> g(drift.mobility.operator_matrix());
  const DenseMatrix<double> r = b * covariance + covariance * b.transpose() - (2.0 / drift.beta) * g;
  return r.cwiseAbs().maxCoeff();
}

double mean_equation_residual(const LinearDrift& drift, const Vector<double>& mean) {
  return (drift.matrix * mean - drift.offset).cwiseAbs().maxCoeff();
}

double gershgorin_bound(const SparseMatrix<double>& matrix) {
  double worst = 0.0;
  for (Index i = 0; i < matrix.outerSize(); ++i) {
    double row = 0.0;
    for (SparseMatrix<double>::InnerIterator it(matrix, i); it; ++it) row += std::abs(it.value());
    worst = std::max(worst, row);
  }
  return worst;
}

void SimulationConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (n_steps <= 0) throw std::invalid_argument("n_steps must be > 0");
  if (burn_in < 0 || burn_in >= n_steps) throw std::invalid_argument("burn_in must lie in [0, n_steps)");
  if (thin <= 0) throw std::invalid_argument("thin must be >= 1");
  if (batches < 2) throw std::invalid_argument("at least two batches are required");
  if ((n_steps - burn_in + thin - 1) / thin < batches)
    throw std::invalid_argument("fewer samples than batches; increase n_steps or reduce thin");
}

namespace {

Vector<double> untilted_gradient(const QuadraticModel<double>& model, const Vector<double>& b0,
                                 const Vector<double>& phi) {
  return model.diag().cwiseProduct(phi) - model.adjacency() * phi - b0;
}

// Per-sample accumulation into batch sums.
class TraceAccumulator {
 public:
  TraceAccumulator(Index sites, std::size_t bonds, long n_samples, int batches)
      : sites_(sites),
        bonds_(static_cast<Index>(bonds)),
        n_samples_(n_samples),
        batches_(batches),
        site_sums_(DenseMatrix<double>::Zero(sites, batches)),
        bond_sums_(DenseMatrix<double>::Zero(static_cast<Index>(bonds), batches)),
        batch_counts_(static_cast<std::size_t>(batches), 0),
        second_moment_(Vector<double>::Zero(sites)) {}

  void add(const Vector<double>& phi, const Vector<double>& grad, const std::vector<Bond>& bonds) {
    const int batch = static_cast<int>(sample_ * batches_ / n_samples_);
    site_sums_.col(batch) += phi;
    for (Index b = 0; b < bonds_; ++b) {
      const Bond& bond = bonds[static_cast<std::size_t>(b)];
      bond_sums_(b, batch) += grad(bond.from) - grad(bond.to);
    }
    second_moment_ += phi.cwiseAbs2();
    ++batch_counts_[static_cast<std::size_t>(batch)];
    ++sample_;
  }

  TraceSummary finish(const std::vector<Bond>& bonds, Vector<double> final_state) const {
    TraceSummary out;
    out.bonds = bonds;
    out.n_samples = sample_;
    out.batches = batches_;
    out.final_state = std::move(final_state);
    const auto reduce = [&](const DenseMatrix<double>& sums, Vector<double>& mean, Vector<double>& err) {
      mean.resize(sums.rows());
      err.resize(sums.rows());
      std::vector<double> values(static_cast<std::size_t>(batches_));
      for (Index r = 0; r < sums.rows(); ++r) {
        for (int k = 0; k < batches_; ++k)
          values[static_cast<std::size_t>(k)] = sums(r, k) / static_cast<double>(batch_counts_[static_cast<std::size_t>(k)]);
        // overall mean weights samples, not batches
        mean(r) = sums.row(r).sum() / static_cast<double>(sample_);
        err(r) = batch_means(values).stderr;
      }
    };
    reduce(site_sums_, out.mean, out.mean_stderr);
    reduce(bond_sums_, out.current, out.current_stderr);
    out.variance = second_moment_ / static_cast<double>(sample_) - out.mean.cwiseAbs2();
    return out;
  }

 private:
  Index sites_;
  Index bonds_;
  long n_samples_;
  int batches_;
  long sample_ = 0;
  DenseMatrix<double> site_sums_;
  DenseMatrix<double> bond_sums_;
  std::vector<long> batch_counts_;
  Vector<double> second_moment_;
};

void check_divergence(const Vector<double>& phi, long step) {
  const double worst = phi.cwiseAbs().maxCoeff();
  if (!(worst <= 1e6))
    throw SimulationDiverged("trajectory diverged at step " + std::to_string(step) + " (max |phi| = " +
                                 std::to_string(worst) + "); reduce dt",
                             step);
}

struct ExactOuStep {
  Vector<double> center;
  DenseMatrix<double> propagator;
  DenseMatrix<double> noise_factor;
};

// Van Loan: exp([[B, S],[0, -B^T]] dt) = [[E11, E12],[0, E22]], Phi = E22^T, Q = Phi E12.
ExactOuStep exact_ou_step(const LinearDrift& drift, double dt, bool noise) {
  const DenseMatrix<double> b(drift.matrix);
  const Index n = b.rows();
  if (n > 1000) throw std::invalid_argument("exact OU integrator is limited to 1000 sites");
  const DenseMatrix<double> s = (2.0 / drift.beta) * DenseMatrix<double>(drift.mobility.operator_matrix());
  DenseMatrix<double> m = DenseMatrix<double>::Zero(2 * n, 2 * n);
  m.topLeftCorner(n, n) = b * dt;
  m.topRightCorner(n, n) = s * dt;
  m.bottomRightCorner(n, n) = -b.transpose() * dt;
  const DenseMatrix<double> e = m.exp();
  ExactOuStep out;
  out.propagator = e.bottomRightCorner(n, n).transpose();
  DenseMatrix<double> q = out.propagator * e.topRightCorner(n, n);
  q = 0.5 * (q + q.transpose());
  out.center = b.partialPivLu().solve(drift.offset);
  if (noise) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix<double>> eig(q);
    const Vector<double> root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    out.noise_factor = eig.eigenvectors() * root.asDiagonal();
  } else {
    out.noise_factor = DenseMatrix<double>::Zero(n, n);
  }
  return out;
}

}  // namespace

void langevin_step(const QuadraticModel<double>& model, const MobilityStructure& mobility, double dt,
                   const Vector<double>& noise, Vector<double>& phi) {
  const auto& bonds = mobility.bonds();
  const auto& driven = mobility.driven();
  if (noise.size() != static_cast<Index>(bonds.size() + driven.size()))
    throw std::invalid_argument("langevin_step: one noise increment per bond and driven site required");
  const Vector<double> grad = untilted_gradient(model, model.untilted_field(), phi);
  Index k = 0;
  for (const Bond& b : bonds) {
    const double flux = -(grad(b.from) - grad(b.to)) * dt + noise(k++);
    phi(b.from) += flux;
    phi(b.to) -= flux;
  }
  for (const DrivenSite& z : driven) phi(z.site) += -(grad(z.site) - z.target) * dt + noise(k++);
}

TraceSummary simulate(const QuadraticModel<double>& model, const SimulationConfig& config) {
  config.validate();
  const LinearDrift drift = build_drift(model);
  const auto& bonds = drift.mobility.bonds();
  const auto& driven = drift.mobility.driven();
  const Index n = model.size();
  const Vector<double> b0 = model.untilted_field();

  if (config.integrator == Integrator::euler_maruyama) {
    const double bound = gershgorin_bound(drift.matrix);
    if (!(config.dt < 2.0 / bound))
      throw UnstableTimeStep("dt = " + std::to_string(config.dt) + " violates the stability bound dt < 2/" +
                             std::to_string(bound) + " = " + std::to_string(2.0 / bound) + "; use a smaller dt");
  }

  Rng rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const long n_samples = (config.n_steps - config.burn_in + config.thin - 1) / config.thin;
  TraceAccumulator acc(n, bonds.size(), n_samples, config.batches);
  Vector<double> phi = Vector<double>::Zero(n);
  const double amplitude = config.noise ? std::sqrt(2.0 * config.dt / drift.beta) : 0.0;

  ExactOuStep ou;
  Vector<double> xi;
  if (config.integrator == Integrator::exact_ou) {
    ou = exact_ou_step(drift, config.dt, config.noise);
    xi.resize(n);
  }

  for (long step = 0; step < config.n_steps; ++step) {
    const Vector<double> grad = untilted_gradient(model, b0, phi);
    if (step >= config.burn_in && (step - config.burn_in) % config.thin == 0) acc.add(phi, grad, bonds);

    if (config.integrator == Integrator::euler_maruyama) {
      for (const Bond& b : bonds) {
        const double w = config.noise ? amplitude * normal(rng) : 0.0;
        const double flux = -(grad(b.from) - grad(b.to)) * config.dt + w;
        phi(b.from) += flux;
        phi(b.to) -= flux;
      }
      for (const DrivenSite& z : driven) {
        const double w = config.noise ? amplitude * normal(rng) : 0.0;
        phi(z.site) += -(grad(z.site) - z.target) * config.dt + w;
      }
    } else {
      if (config.noise)
        for (Index i = 0; i < n; ++i) xi(i) = normal(rng);
      phi = ou.center + ou.propagator * (phi - ou.center);
      if (config.noise) phi += ou.noise_factor * xi;
    }
    if ((step & 255) == 0) check_divergence(phi, step);
  }
  check_divergence(phi, config.n_steps);
  return acc.finish(bonds, phi);
}

std::vector<TraceSummary> simulate_replicas(const QuadraticModel<double>& model, const SimulationConfig& config,
                                            int replicas, int threads) {
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  std::vector<TraceSummary> out(static_cast<std::size_t>(replicas));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(replicas));
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int r = next++; r < replicas; r = next++) {
      SimulationConfig local = config;
      local.seed = substream_seed(config.seed, {r});
      try {
        out[static_cast<std::size_t>(r)] = simulate(model, local);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(threads, 1, replicas);
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

CurrentEstimate empirical_current(const TraceSummary& trace, const LatticeDomain& domain, const Site& x,
                                  const Site& y) {
  if (!are_neighbors(x, y)) throw std::invalid_argument(to_string(x) + " and " + to_string(y) + " are not neighbors");
  const Site d = y - x;
  const bool forward = d.x1 + d.x2 + d.x3 > 0;
  const int axis = d.x1 != 0 ? 0 : (d.x2 != 0 ? 1 : 2);
  const Index from = domain.index(forward ? x : y);
  const Index to = domain.index(forward ? y : x);
  const auto it = std::lower_bound(trace.bonds.begin(), trace.bonds.end(), std::pair{from, axis},
                                   [](const Bond& b, const std::pair<Index, int>& key) {
                                     return std::pair{b.from, b.axis} < key;
                                   });
  if (it == trace.bonds.end() || it->from != from || it->axis != axis || it->to != to)
    throw std::invalid_argument("bond " + to_string(x) + "-" + to_string(y) + " is not in the trace");
  const auto k = static_cast<Index>(it - trace.bonds.begin());
  const double sign = forward ? 1.0 : -1.0;
  return {sign * trace.current(k), trace.current_stderr(k)};
}

}  // namespace ness
