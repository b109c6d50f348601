#include "ness/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace ness {

std::string to_string(const Site& x) {
  return "(" + std::to_string(x.x1) + "," + std::to_string(x.x2) + "," + std::to_string(x.x3) + ")";
}

std::string to_string(SiteSetLabel label) {
  switch (label) {
    case SiteSetLabel::left_face: return "left-face";
    case SiteSetLabel::right_face: return "right-face";
    case SiteSetLabel::sigma_plus: return "sigma+";
    case SiteSetLabel::sigma_minus: return "sigma-";
    case SiteSetLabel::section: return "section";
  }
  return "unknown";
}

LatticeDomain::LatticeDomain(Geometry g, int n, int m, std::array<int, 3> lo, std::array<int, 3> hi)
    : geometry_(g), n_(n), m_(m), lo_(lo), hi_(hi) {
  if (g == Geometry::full_space) return;
  const auto width = [&](int k) { return static_cast<std::size_t>(hi_[k] - lo_[k] + 1); };
  sites_.reserve(width(0) * width(1) * width(2));
  for (int a = lo_[0]; a <= hi_[0]; ++a)
    for (int b = lo_[1]; b <= hi_[1]; ++b)
      for (int c = lo_[2]; c <= hi_[2]; ++c) sites_.push_back({a, b, c});

  bonds_.reserve(3 * sites_.size());
  for (Index i = 0; i < size(); ++i) {
    const Site& x = sites_[static_cast<std::size_t>(i)];
    for (int axis = 0; axis < 3; ++axis) {
      const auto j = index_of(x + kUnitSteps[static_cast<std::size_t>(2 * axis)]);
      if (j) bonds_.push_back({i, *j, axis});
    }
  }
}

LatticeDomain LatticeDomain::darken(int n) {
  if (n <= 0) throw std::invalid_argument("darken domain requires N >= 1, got " + std::to_string(n));
  return {Geometry::darken, n, 0, {-2 * n, -n, -n}, {2 * n - 1, n - 1, n - 1}};
}

LatticeDomain LatticeDomain::channel(int n, int m) {
  if (n < 2) throw std::invalid_argument("channel domain requires N >= 2, got " + std::to_string(n));
  if (m < 1) throw std::invalid_argument("channel domain requires M >= 1, got " + std::to_string(m));
  if (m >= n)
    throw std::invalid_argument("channel domain requires M < N (got N=" + std::to_string(n) +
                                ", M=" + std::to_string(m) + ")");
  return {Geometry::channel, n, m, {-(n - 1), -m, -m}, {n - 1, m, m}};
}

LatticeDomain LatticeDomain::full_space() { return {Geometry::full_space, 0, 0, {0, 0, 0}, {-1, -1, -1}}; }

bool channel_scale_warning(int n, int m) { return static_cast<double>(m) * m >= static_cast<double>(n); }

bool LatticeDomain::in_core(const Site& x) const {
  if (geometry_ == Geometry::full_space) return false;
  return x.x1 >= lo_[0] && x.x1 <= hi_[0] && x.x2 >= lo_[1] && x.x2 <= hi_[1] && x.x3 >= lo_[2] &&
         x.x3 <= hi_[2];
}

bool LatticeDomain::in_left_reservoir(const Site& x) const {
  switch (geometry_) {
    case Geometry::darken: return x.x1 < -2 * n_;
    case Geometry::channel: return x.x1 <= -n_;
    case Geometry::full_space: return false;
  }
  return false;
}

bool LatticeDomain::in_right_reservoir(const Site& x) const {
  switch (geometry_) {
    case Geometry::darken: return x.x1 >= 2 * n_;
    case Geometry::channel: return x.x1 >= n_;
    case Geometry::full_space: return false;
  }
  return false;
}

bool LatticeDomain::in_ambient(const Site& x) const {
  if (geometry_ == Geometry::full_space) return true;
  return in_core(x) || in_reservoir(x);
}

std::optional<Index> LatticeDomain::index_of(const Site& x) const {
  if (!in_core(x)) return std::nullopt;
  const Index w2 = hi_[1] - lo_[1] + 1;
  const Index w3 = hi_[2] - lo_[2] + 1;
  return (static_cast<Index>(x.x1 - lo_[0]) * w2 + (x.x2 - lo_[1])) * w3 + (x.x3 - lo_[2]);
}

Index LatticeDomain::index(const Site& x) const {
  const auto i = index_of(x);
  if (!i) throw std::out_of_range("site " + to_string(x) + " is not in the core");
  return *i;
}

NeighborList LatticeDomain::neighbors(const Site& x) const {
  if (!in_ambient(x)) throw std::invalid_argument("site " + to_string(x) + " is not in the ambient set");
  NeighborList out;
  for (const Site& e : kUnitSteps) {
    const Site y = x + e;
    if (in_core(y))
      out.push_back({y, NeighborKind::core});
    else if (in_ambient(y))
      out.push_back({y, NeighborKind::reservoir});
  }
  return out;
}

int LatticeDomain::ambient_degree(const Site& x) const { return static_cast<int>(neighbors(x).size()); }

int LatticeDomain::core_degree(const Site& x) const {
  int k = 0;
  for (const auto& nb : neighbors(x)) k += nb.kind == NeighborKind::core ? 1 : 0;
  return k;
}

std::vector<Index> LatticeDomain::section(int x1) const {
  std::vector<Index> out;
  if (geometry_ == Geometry::full_space || x1 < lo_[0] || x1 > hi_[0]) return out;
  for (int b = lo_[1]; b <= hi_[1]; ++b)
    for (int c = lo_[2]; c <= hi_[2]; ++c) out.push_back(index(Site{x1, b, c}));
  return out;
}

std::vector<SiteSet> site_sets(const LatticeDomain& domain) {
  std::vector<SiteSet> out;
  const auto slab = [&](SiteSetLabel label, int x1, int lo, int hi) {
    SiteSet s{label, x1, {}};
    for (int b = lo; b <= hi; ++b)
      for (int c = lo; c <= hi; ++c) s.sites.push_back({x1, b, c});
    return s;
  };
  switch (domain.geometry()) {
    case Geometry::darken: {
      const int n = domain.n();
      out.push_back(slab(SiteSetLabel::left_face, -2 * n, -n, n - 1));
      out.push_back(slab(SiteSetLabel::right_face, 2 * n - 1, -n, n - 1));
      break;
    }
    case Geometry::channel: {
      const int n = domain.n();
      const int m = domain.m();
      out.push_back(slab(SiteSetLabel::sigma_plus, n, -m, m));
      out.push_back(slab(SiteSetLabel::sigma_minus, -n, -m, m));
      for (int x1 = -(n - 1); x1 <= n - 1; ++x1) out.push_back(slab(SiteSetLabel::section, x1, -m, m));
      break;
    }
    case Geometry::full_space:
      throw std::invalid_argument("site_sets: full-space domain has no faces or sections");
  }
  return out;
}

}  // namespace ness
