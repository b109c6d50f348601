#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ness {

using Index = std::ptrdiff_t;

/// A point of Z^3 in lattice units.
struct Site {
  int x1 = 0;
  int x2 = 0;
  int x3 = 0;

  friend constexpr auto operator<=>(const Site&, const Site&) = default;
  friend constexpr Site operator+(Site a, Site b) { return {a.x1 + b.x1, a.x2 + b.x2, a.x3 + b.x3}; }
  friend constexpr Site operator-(Site a, Site b) { return {a.x1 - b.x1, a.x2 - b.x2, a.x3 - b.x3}; }
};

/// The six unit steps, ordered +e1, -e1, +e2, -e2, +e3, -e3.
inline constexpr std::array<Site, 6> kUnitSteps{{
    {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};

constexpr bool are_neighbors(const Site& a, const Site& b) {
  const Site d = a - b;
  const int l1 = (d.x1 < 0 ? -d.x1 : d.x1) + (d.x2 < 0 ? -d.x2 : d.x2) + (d.x3 < 0 ? -d.x3 : d.x3);
  return l1 == 1;
}

std::string to_string(const Site& x);

enum class Geometry { darken, channel, full_space };

enum class NeighborKind { core, reservoir };

struct Neighbor {
  Site site;
  NeighborKind kind;
};

/// Fixed-capacity neighbor list; a site never has more than six neighbors.
class NeighborList {
 public:
  void push_back(Neighbor n) { items_[size_++] = n; }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] bool empty() const { return size_ == 0; }
  [[nodiscard]] const Neighbor& operator[](std::size_t i) const { return items_[i]; }
  [[nodiscard]] const Neighbor* begin() const { return items_.data(); }
  [[nodiscard]] const Neighbor* end() const { return items_.data() + size_; }

 private:
  std::array<Neighbor, 6> items_{};
  std::size_t size_ = 0;
};

/// Nearest-neighbor bond between two core sites, oriented along +e_axis.
struct Bond {
  Index from;
  Index to;
  int axis;  // 0, 1, 2 for e1, e2, e3
};

/// Lattice geometry: an enumerable finite core plus an implicit ambient set.
///
/// darken(N):  core = {-2N <= x1 <= 2N-1, -N <= x2,x3 <= N-1},
///             ambient adds the half-spaces {x1 >= 2N} and {x1 < -2N}.
/// channel(N, M): core = {|x1| < N, |x2|,|x3| <= M},
///             ambient adds {x1 >= N} and {x1 <= -N}.
/// full_space: empty core, every site is ambient.
///
/// Half-spaces are never enumerated; their transverse extent is unrestricted.
/// Core sites are indexed lexicographically in (x1, x2, x3).
class LatticeDomain {
 public:
  static LatticeDomain darken(int n);
  static LatticeDomain channel(int n, int m);
  static LatticeDomain full_space();

  [[nodiscard]] Geometry geometry() const { return geometry_; }
  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] int m() const { return m_; }

  [[nodiscard]] bool in_core(const Site& x) const;
  [[nodiscard]] bool in_ambient(const Site& x) const;
  [[nodiscard]] bool in_left_reservoir(const Site& x) const;
  [[nodiscard]] bool in_right_reservoir(const Site& x) const;
  [[nodiscard]] bool in_reservoir(const Site& x) const {
    return in_left_reservoir(x) || in_right_reservoir(x);
  }

  [[nodiscard]] Index size() const { return static_cast<Index>(sites_.size()); }
  [[nodiscard]] std::span<const Site> sites() const { return sites_; }
  [[nodiscard]] const Site& site(Index i) const { return sites_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] std::optional<Index> index_of(const Site& x) const;
  /// Throws std::out_of_range for sites outside the core.
  [[nodiscard]] Index index(const Site& x) const;

  /// Ambient neighbors of x; throws std::invalid_argument if x is not ambient.
  [[nodiscard]] NeighborList neighbors(const Site& x) const;
  /// K_x: number of ambient neighbors.
  [[nodiscard]] int ambient_degree(const Site& x) const;
  /// K^-_x: number of core neighbors.
  [[nodiscard]] int core_degree(const Site& x) const;

  /// Core x1 range, inclusive. Undefined for full_space.
  [[nodiscard]] int x1_min() const { return lo_[0]; }
  [[nodiscard]] int x1_max() const { return hi_[0]; }
  [[nodiscard]] int transverse_min() const { return lo_[1]; }
  [[nodiscard]] int transverse_max() const { return hi_[1]; }

  /// All core bonds, each listed once in +e_axis orientation, lexicographic by origin.
  [[nodiscard]] const std::vector<Bond>& bonds() const { return bonds_; }

  /// Core sites with the given first coordinate, lexicographic.
  [[nodiscard]] std::vector<Index> section(int x1) const;

  /// Core index of (x1, a, a) with a the axis transverse coordinate (0 for both geometries).
  [[nodiscard]] Index axis_index(int x1) const { return index(Site{x1, 0, 0}); }

 private:
  LatticeDomain(Geometry g, int n, int m, std::array<int, 3> lo, std::array<int, 3> hi);

  Geometry geometry_;
  int n_ = 0;
  int m_ = 0;
  std::array<int, 3> lo_{};
  std::array<int, 3> hi_{};
  std::vector<Site> sites_;
  std::vector<Bond> bonds_;
};

/// True when the channel violates the M < sqrt(N) scale separation; callers warn, never fail.
bool channel_scale_warning(int n, int m);

enum class SiteSetLabel { left_face, right_face, sigma_plus, sigma_minus, section };

struct SiteSet {
  SiteSetLabel label;
  int x1;  // the shared first coordinate
  std::vector<Site> sites;
};

std::string to_string(SiteSetLabel label);

/// darken: the two driven faces {x1=-2N}, {x1=2N-1} (core sites).
/// channel: Sigma^+ , Sigma^- (ambient, outside the core) and every section S_x.
/// Throws std::invalid_argument for full_space.
std::vector<SiteSet> site_sets(const LatticeDomain& domain);

}  // namespace ness
