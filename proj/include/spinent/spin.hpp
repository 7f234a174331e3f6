#pragma once

// Total-spin operators in the sigma^z product basis (spin-1/2 units, S = sigma/2).

#include <algorithm>
#include <cmath>
#include <span>
#include <type_traits>
#include <vector>

#include "spinent/errors.hpp"
#include "spinent/hamiltonian.hpp"

namespace spinent {

/// out = S^+ in, with S^+ = sum_i sigma_i^+ (flips a down spin at site i up).
template <typename T>
void raise_total_spin(std::span<const T> in, std::span<T> out, int n_sites) {
  const std::size_t n = hilbert_dimension(n_sites);
  if (in.size() != n || out.size() != n) throw ContractViolation("raise_total_spin: size mismatch");
  std::fill(out.begin(), out.end(), T{});
  for (int site = 0; site < n_sites; ++site) {
    const BasisIndex bit = BasisIndex{1} << site;
    for (BasisIndex s = 0; s < n; ++s) {
      if ((s & bit) == 0) out[s | bit] += in[s];
    }
  }
}

/// out = S^- in.
template <typename T>
void lower_total_spin(std::span<const T> in, std::span<T> out, int n_sites) {
  const std::size_t n = hilbert_dimension(n_sites);
  if (in.size() != n || out.size() != n) throw ContractViolation("lower_total_spin: size mismatch");
  std::fill(out.begin(), out.end(), T{});
  for (int site = 0; site < n_sites; ++site) {
    const BasisIndex bit = BasisIndex{1} << site;
    for (BasisIndex s = 0; s < n; ++s) {
      if ((s & bit) != 0) out[s ^ bit] += in[s];
    }
  }
}

/// <x| S^2 |y> using S^2 = Sz^2 + Sz + S^- S^+.
template <typename T>
T s_squared_element(std::span<const T> x, std::span<const T> y, int n_sites) {
  const std::size_t n = hilbert_dimension(n_sites);
  std::vector<T> rx(n), ry(n);
  raise_total_spin<T>(x, rx, n_sites);
  raise_total_spin<T>(y, ry, n_sites);
  T sum{};
  for (BasisIndex s = 0; s < n; ++s) {
    const double m = magnetization(s, n_sites);
    if constexpr (std::is_same_v<T, Complex>) {
      sum += std::conj(x[s]) * y[s] * (m * m + m) + std::conj(rx[s]) * ry[s];
    } else {
      sum += x[s] * y[s] * (m * m + m) + rx[s] * ry[s];
    }
  }
  return sum;
}

/// Spin quantum number S from an S(S+1) value, rounded to the nearest half-integer.
inline double spin_from_casimir(double casimir) {
  const double s = 0.5 * (std::sqrt(1.0 + 4.0 * std::max(0.0, casimir)) - 1.0);
  return std::round(2.0 * s) / 2.0;
}

}  // namespace spinent
