#pragma once

// Matrix-free Heisenberg Hamiltonian in the sigma^z product basis.
//
// Pauli convention: each bond contributes sigma_a . sigma_b, which acts on the
// two-site subspace as 2*SWAP - 1. Bit i of a basis index set means spin up
// (sigma^z = +1) at site i.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spinent/errors.hpp"
#include "spinent/lattice.hpp"

namespace spinent {

using Complex = std::complex<double>;
using BasisIndex = std::uint64_t;

inline std::size_t hilbert_dimension(int n_sites) { return std::size_t{1} << n_sites; }

struct StateVector {
  int n_sites = 0;
  std::vector<Complex> amplitudes;

  StateVector() = default;
  explicit StateVector(int n) : n_sites(n), amplitudes(hilbert_dimension(n)) {}
  StateVector(int n, std::vector<Complex> amps) : n_sites(n), amplitudes(std::move(amps)) {
    if (amplitudes.size() != hilbert_dimension(n)) {
      throw ContractViolation("state vector length does not match 2^n_sites");
    }
  }

  std::size_t dim() const noexcept { return amplitudes.size(); }

  static StateVector basis(int n, BasisIndex index) {
    StateVector v(n);
    v.amplitudes.at(index) = 1.0;
    return v;
  }
};

inline Complex inner(const StateVector& x, const StateVector& y) {
  if (x.dim() != y.dim()) throw ContractViolation("inner product of vectors of different size");
  Complex sum = 0.0;
  for (std::size_t i = 0; i < x.dim(); ++i) sum += std::conj(x.amplitudes[i]) * y.amplitudes[i];
  return sum;
}

inline double norm(const StateVector& x) { return std::sqrt(std::real(inner(x, x))); }

class HamiltonianOperator {
 public:
  HamiltonianOperator(BondList bonds, double j1, double j2, int n_sites)
      : bonds_(std::move(bonds)), j1_(j1), j2_(j2), n_sites_(n_sites) {
    if (n_sites < 1 || n_sites > kMaxSites) throw ConfigError("unsupported n_sites");
    for (const Bond& bond : bonds_) {
      if (bond.a.value() < 0 || bond.a.value() >= n_sites || bond.b.value() < 0 ||
          bond.b.value() >= n_sites || bond.a == bond.b) {
        throw ContractViolation("bond outside lattice or self-coupled");
      }
      const double coupling = bond.coupling == CouplingClass::J1 ? j1 : j2;
      terms_.push_back({BasisIndex{1} << bond.a.value(), BasisIndex{1} << bond.b.value(), coupling});
    }
    build_diagonal();
  }

  explicit HamiltonianOperator(const ModelSpec& spec)
      : HamiltonianOperator(build_bonds(spec), spec.j1, spec.j2(), spec.n_sites) {}

  int n_sites() const noexcept { return n_sites_; }
  std::size_t dim() const noexcept { return hilbert_dimension(n_sites_); }
  const BondList& bonds() const noexcept { return bonds_; }
  double j1() const noexcept { return j1_; }
  double j2() const noexcept { return j2_; }
  std::span<const double> diagonal() const noexcept { return diagonal_; }

  /// out = H * in. Each output element is accumulated in fixed bond order.
  template <typename T>
  void apply(std::span<const T> in, std::span<T> out) const {
    if (in.size() != dim() || out.size() != dim()) {
      throw ContractViolation("apply: vector length " + std::to_string(in.size()) +
                              " does not match dimension " + std::to_string(dim()));
    }
    const std::size_t n = dim();
    for (std::size_t s = 0; s < n; ++s) out[s] = diagonal_[s] * in[s];
    for (const Term& term : terms_) {
      const BasisIndex lo = std::min(term.mask_a, term.mask_b);
      const BasisIndex hi = std::max(term.mask_a, term.mask_b);
      const double flip = 2.0 * term.coupling;
      // s runs over states with the lo bit set and the hi bit clear; t is its partner.
      for (BasisIndex top = 0; top < n; top += 2 * hi) {
        for (BasisIndex mid = 0; mid < hi; mid += 2 * lo) {
          const BasisIndex s0 = top + mid + lo;
          const BasisIndex t0 = top + mid + hi;
          for (BasisIndex low = 0; low < lo; ++low) {
            out[s0 + low] += flip * in[t0 + low];
            out[t0 + low] += flip * in[s0 + low];
          }
        }
      }
    }
  }

  StateVector apply(const StateVector& v) const {
    if (v.n_sites != n_sites_) throw ContractViolation("apply: n_sites mismatch");
    StateVector out(n_sites_);
    apply<Complex>(v.amplitudes, out.amplitudes);
    return out;
  }

 private:
  struct Term {
    BasisIndex mask_a;
    BasisIndex mask_b;
    double coupling;
  };

  void build_diagonal() {
    diagonal_.assign(dim(), 0.0);
    for (BasisIndex s = 0; s < dim(); ++s) {
      double d = 0.0;
      for (const Term& term : terms_) {
        const bool up_a = (s & term.mask_a) != 0;
        const bool up_b = (s & term.mask_b) != 0;
        d += up_a == up_b ? term.coupling : -term.coupling;
      }
      diagonal_[s] = d;
    }
  }

  BondList bonds_;
  double j1_;
  double j2_;
  int n_sites_;
  std::vector<Term> terms_;
  std::vector<double> diagonal_;
};

inline StateVector apply(const HamiltonianOperator& h, const StateVector& v) { return h.apply(v); }

/// Sum of sigma^z / 2 for a basis state.
inline double magnetization(BasisIndex s, int n_sites) {
  const int up = std::popcount(s);
  return 0.5 * static_cast<double>(2 * up - n_sites);
}

/// Common S^z eigenvalue of v, or nullopt if v spans more than one sector.
inline std::optional<double> total_sz(const StateVector& v, double zero_tol = 1e-14) {
  std::optional<int> up_count;
  bool nonzero = false;
  for (BasisIndex s = 0; s < v.dim(); ++s) {
    if (std::abs(v.amplitudes[s]) <= zero_tol) continue;
    nonzero = true;
    const int up = std::popcount(s);
    if (!up_count) {
      up_count = up;
    } else if (*up_count != up) {
      return std::nullopt;
    }
  }
  if (!nonzero) throw ContractViolation("total_sz of a zero vector");
  return 0.5 * static_cast<double>(2 * *up_count - v.n_sites);
}

/// Basis states with a fixed number of up spins, ascending.
inline std::vector<BasisIndex> sector_states(int n_sites, int up_spins) {
  std::vector<BasisIndex> states;
  for (BasisIndex s = 0; s < hilbert_dimension(n_sites); ++s) {
    if (std::popcount(s) == up_spins) states.push_back(s);
  }
  return states;
}

}  // namespace spinent
