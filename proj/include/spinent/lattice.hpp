#pragma once

// Coupling graphs for the periodic J1-J2 chain, the 4x4 J1-J2 square lattice
// and the 4x4 Shastry-Sutherland lattice.

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "spinent/errors.hpp"

namespace spinent {

class SiteIndex {
 public:
  constexpr SiteIndex() = default;
  constexpr explicit SiteIndex(int value) : value_(value) {}

  /// Checked construction: value must lie in [0, n_sites).
  static SiteIndex checked(int value, int n_sites) {
    if (value < 0 || value >= n_sites) {
      throw ContractViolation("site index " + std::to_string(value) + " outside [0, " +
                              std::to_string(n_sites) + ")");
    }
    return SiteIndex(value);
  }

  constexpr int value() const noexcept { return value_; }
  constexpr auto operator<=>(const SiteIndex&) const = default;

 private:
  int value_ = 0;
};

enum class CouplingClass : std::uint8_t { J1, J2 };

struct Bond {
  SiteIndex a;
  SiteIndex b;
  CouplingClass coupling = CouplingClass::J1;

  bool operator==(const Bond&) const = default;
};

using BondList = std::vector<Bond>;

enum class ModelKind : std::uint8_t { Chain1D, Square2D_J1J2, ShastrySutherland };

inline std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Chain1D:
      return "chain1d";
    case ModelKind::Square2D_J1J2:
      return "square2d";
    case ModelKind::ShastrySutherland:
      return "ss";
  }
  return "unknown";
}

inline ModelKind parse_model(std::string_view name) {
  if (name == "chain1d") return ModelKind::Chain1D;
  if (name == "square2d") return ModelKind::Square2D_J1J2;
  if (name == "ss") return ModelKind::ShastrySutherland;
  throw ConfigError("unknown model '" + std::string(name) + "' (expected chain1d|square2d|ss)");
}

struct ModelSpec {
  ModelKind kind = ModelKind::Chain1D;
  int n_sites = 8;
  double j1 = 1.0;
  double alpha = 0.0;

  double j2() const noexcept { return alpha * j1; }
};

inline constexpr int kLatticeSide = 4;
inline constexpr int kMaxSites = 24;

inline void validate(const ModelSpec& spec) {
  if (spec.n_sites < 2) {
    throw ConfigError("n_sites must be >= 2, got " + std::to_string(spec.n_sites));
  }
  if (spec.n_sites > kMaxSites) {
    throw ConfigError("n_sites " + std::to_string(spec.n_sites) + " exceeds the supported " +
                      std::to_string(kMaxSites));
  }
  if (spec.kind != ModelKind::Chain1D && spec.n_sites != kLatticeSide * kLatticeSide) {
    throw ConfigError(std::string(model_name(spec.kind)) + " requires n_sites = 16 (4x4), got " +
                      std::to_string(spec.n_sites));
  }
  if (!(spec.j1 > 0.0)) throw ConfigError("j1 must be positive");
  if (!(spec.alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
}

namespace detail {

inline int torus_site(int row, int col, int rows, int cols) {
  const int r = ((row % rows) + rows) % rows;
  const int c = ((col % cols) + cols) % cols;
  return cols * r + c;
}

inline int square_site(int row, int col) { return torus_site(row, col, kLatticeSide, kLatticeSide); }

/// 2-D coupling graph on a rows x cols torus; the public models use 4 x 4 only.
inline BondList torus_bonds(ModelKind kind, int rows, int cols) {
  BondList bonds;
  auto site = [rows, cols](int r, int c) { return SiteIndex(torus_site(r, c, rows, cols)); };
  for (int row = 0; row < rows; ++row) {
    for (int col = 0; col < cols; ++col) {
      bonds.push_back({site(row, col), site(row, col + 1), CouplingClass::J1});
      bonds.push_back({site(row, col), site(row + 1, col), CouplingClass::J1});
    }
  }
  for (int row = 0; row < rows; ++row) {
    for (int col = 0; col < cols; ++col) {
      if (kind == ModelKind::Square2D_J1J2) {
        bonds.push_back({site(row, col), site(row + 1, col + 1), CouplingClass::J2});
        bonds.push_back({site(row, col + 1), site(row + 1, col), CouplingClass::J2});
      } else if ((row + col) % 2 == 0) {
        if (row % 2 == 0) {
          bonds.push_back({site(row, col), site(row + 1, col + 1), CouplingClass::J2});
        } else {
          bonds.push_back({site(row, col + 1), site(row + 1, col), CouplingClass::J2});
        }
      }
    }
  }
  return bonds;
}

}  // namespace detail

/// Bond list of one model instance; periodic in every direction.
///
/// Chain: N nearest-neighbour and N next-nearest-neighbour bonds, one per
/// summand (wraparound duplicates are kept for small N). 4x4 lattices use
/// row-major numbering site = 4*row + col. The square lattice carries both
/// diagonals of every plaquette; the Shastry-Sutherland lattice carries one
/// diagonal on plaquettes with even row+col, the orientation alternating with
/// row parity so that neighbouring dimers are orthogonal.
inline BondList build_bonds(const ModelSpec& spec) {
  validate(spec);
  if (spec.kind != ModelKind::Chain1D) return detail::torus_bonds(spec.kind, kLatticeSide, kLatticeSide);
  const int n = spec.n_sites;
  // two sites: the ring collapses to one bond and there is no next neighbour
  if (n == 2) return {{SiteIndex(0), SiteIndex(1), CouplingClass::J1}};
  BondList bonds;
  bonds.reserve(2 * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    bonds.push_back({SiteIndex(i), SiteIndex((i + 1) % n), CouplingClass::J1});
  }
  for (int i = 0; i < n; ++i) {
    bonds.push_back({SiteIndex(i), SiteIndex((i + 2) % n), CouplingClass::J2});
  }
  return bonds;
}

/// image[i] is the site that site i is carried to.
using SitePermutation = std::vector<int>;

inline bool preserves_bonds(const BondList& bonds, const SitePermutation& image) {
  auto canonical = [](int a, int b, CouplingClass c) {
    return std::tuple(std::min(a, b), std::max(a, b), c);
  };
  std::vector<std::tuple<int, int, CouplingClass>> before, after;
  for (const Bond& bond : bonds) {
    before.push_back(canonical(bond.a.value(), bond.b.value(), bond.coupling));
    after.push_back(canonical(image[static_cast<std::size_t>(bond.a.value())],
                              image[static_cast<std::size_t>(bond.b.value())], bond.coupling));
  }
  std::sort(before.begin(), before.end());
  std::sort(after.begin(), after.end());
  return before == after;
}

/// Site permutations that map the coupling graph onto itself: translation and
/// reflection of the ring; the unit and doubled translations of the 4x4 torus
/// that survive the diagonal pattern.
inline std::vector<SitePermutation> symmetry_generators(const ModelSpec& spec) {
  const BondList bonds = build_bonds(spec);
  const int n = spec.n_sites;
  std::vector<SitePermutation> candidates;
  if (spec.kind == ModelKind::Chain1D) {
    SitePermutation shift(static_cast<std::size_t>(n)), mirror(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      shift[static_cast<std::size_t>(i)] = (i + 1) % n;
      mirror[static_cast<std::size_t>(i)] = (n - i) % n;
    }
    candidates = {shift, mirror};
  } else {
    for (auto [dr, dc] : {std::pair{0, 1}, std::pair{1, 0}, std::pair{0, 2}, std::pair{2, 0}}) {
      SitePermutation shift(static_cast<std::size_t>(n));
      for (int row = 0; row < kLatticeSide; ++row) {
        for (int col = 0; col < kLatticeSide; ++col) {
          shift[static_cast<std::size_t>(detail::square_site(row, col))] = detail::square_site(row + dr, col + dc);
        }
      }
      candidates.push_back(shift);
    }
  }
  std::vector<SitePermutation> generators;
  for (auto& p : candidates) {
    if (preserves_bonds(bonds, p)) generators.push_back(std::move(p));
  }
  return generators;
}

/// Smallest L >= 1 with image^L = identity.
inline int permutation_order(const SitePermutation& image) {
  SitePermutation cur = image;
  for (int order = 1;; ++order) {
    bool identity = true;
    for (std::size_t i = 0; i < cur.size(); ++i) identity = identity && cur[i] == static_cast<int>(i);
    if (identity) return order;
    SitePermutation next(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) next[i] = image[static_cast<std::size_t>(cur[i])];
    cur = std::move(next);
  }
}

/// Number of bonds of the given coupling class incident on each site.
inline std::vector<int> coupling_degrees(const BondList& bonds, int n_sites, CouplingClass cls) {
  std::vector<int> degree(static_cast<std::size_t>(n_sites), 0);
  for (const Bond& bond : bonds) {
    if (bond.coupling != cls) continue;
    ++degree[static_cast<std::size_t>(bond.a.value())];
    ++degree[static_cast<std::size_t>(bond.b.value())];
  }
  return degree;
}

}  // namespace spinent
