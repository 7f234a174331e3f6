#pragma once

// Two-site reduced density matrices of degenerate-level mixtures, Wootters
// concurrence, and total-spin labels of eigenlevels.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spinent/eigensolver.hpp"
#include "spinent/errors.hpp"
#include "spinent/hamiltonian.hpp"
#include "spinent/spin.hpp"

namespace spinent {

/// 4x4 density matrix of the pair (a, b); row/column index = 2*bit_a + bit_b.
struct TwoQubitDensityMatrix {
  Eigen::Matrix4cd entries = Eigen::Matrix4cd::Zero();

  Complex operator()(int row, int col) const { return entries(row, col); }
  double trace() const { return entries.trace().real(); }
  double hermiticity_error() const { return (entries - entries.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const {
    const Eigen::Matrix4cd herm = 0.5 * (entries + entries.adjoint());
    return Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd>(herm, Eigen::EigenvaluesOnly)
        .eigenvalues()
        .minCoeff();
  }
};

/// Uniform mixture (1/d) sum |v><v| over the orthonormal members of one level.
struct LevelMixture {
  std::span<const StateVector> members;

  std::size_t degeneracy() const noexcept { return members.size(); }
};

inline LevelMixture level_mixture(const EigenSolution& sol, std::size_t level) {
  if (level >= sol.levels.size()) {
    throw ContractViolation("level " + std::to_string(level) + " not present in solution");
  }
  const Level& lv = sol.levels[level];
  if (sol.eigenvectors.size() < lv.first + lv.degeneracy) {
    throw ContractViolation("solution carries no eigenvectors for level " + std::to_string(level));
  }
  return {std::span<const StateVector>(sol.eigenvectors).subspan(lv.first, lv.degeneracy)};
}

inline LevelMixture pure_state(const StateVector& v) { return {std::span<const StateVector>(&v, 1)}; }

/// Partial trace over every site except a and b, without forming any 2^N x 2^N matrix.
inline TwoQubitDensityMatrix reduced_two_qubit(const LevelMixture& mix, SiteIndex a, SiteIndex b) {
  if (mix.members.empty()) throw ContractViolation("reduced_two_qubit: empty mixture");
  const int n_sites = mix.members.front().n_sites;
  if (a.value() < 0 || a.value() >= n_sites || b.value() < 0 || b.value() >= n_sites) {
    throw ContractViolation("reduced_two_qubit: site outside lattice");
  }
  if (a == b) throw ContractViolation("reduced_two_qubit: sites must differ");
  const BasisIndex bit_a = BasisIndex{1} << a.value();
  const BasisIndex bit_b = BasisIndex{1} << b.value();
  const std::array<BasisIndex, 4> offsets{0, bit_b, bit_a, bit_a | bit_b};

  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (const StateVector& v : mix.members) {
    if (v.n_sites != n_sites) throw ContractViolation("reduced_two_qubit: mixed system sizes");
    for (BasisIndex env = 0; env < v.dim(); ++env) {
      if ((env & (bit_a | bit_b)) != 0) continue;
      Eigen::Vector4cd amp;
      for (int i = 0; i < 4; ++i) amp[i] = v.amplitudes[env | offsets[static_cast<std::size_t>(i)]];
      rho.noalias() += amp * amp.adjoint();
    }
  }
  return {rho / static_cast<double>(mix.degeneracy())};
}

/// Wootters concurrence max(0, l1 - l2 - l3 - l4), l_i the descending square roots of
/// the eigenvalues of rho (sy x sy) rho^* (sy x sy).
inline double concurrence(const TwoQubitDensityMatrix& rho) {
  constexpr double kPsdTolerance = 1e-10;
  if (rho.hermiticity_error() > kPsdTolerance) throw DataError("concurrence: rho is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > kPsdTolerance) throw DataError("concurrence: trace(rho) != 1");
  if (rho.min_eigenvalue() < -kPsdTolerance) throw DataError("concurrence: rho is not PSD");

  Eigen::Matrix4cd flip = Eigen::Matrix4cd::Zero();
  // sigma_y x sigma_y in the |00>,|01>,|10>,|11> basis
  flip(0, 3) = -1.0;
  flip(1, 2) = 1.0;
  flip(2, 1) = 1.0;
  flip(3, 0) = -1.0;
  const Eigen::Matrix4cd tilde = flip * rho.entries.conjugate() * flip;
  const Eigen::Matrix4cd product = rho.entries * tilde;
  const Eigen::Vector4cd eig = Eigen::ComplexEigenSolver<Eigen::Matrix4cd>(product, false).eigenvalues();
  std::array<double, 4> lambda{};
  for (int i = 0; i < 4; ++i) {
    double value = eig[i].real();
    if (value < 0.0) {
      if (value < -kPsdTolerance) throw DataError("concurrence: negative eigenvalue of rho*rho_tilde");
      value = 0.0;
    }
    lambda[static_cast<std::size_t>(i)] = std::sqrt(value);
  }
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  const double c = lambda[0] - lambda[1] - lambda[2] - lambda[3];
  return std::clamp(c, 0.0, 1.0);
}

/// S such that <v|S^2|v> = S(S+1), rounded to the nearest half-integer.
inline double total_spin_of(const StateVector& v, double residue_tol = 1e-6) {
  const double nv = norm(v);
  if (!(nv > 0.0)) throw ContractViolation("total_spin_of: zero vector");
  const double casimir = std::real(s_squared_element<Complex>(v.amplitudes, v.amplitudes, v.n_sites)) / (nv * nv);
  const double s = spin_from_casimir(casimir);
  if (std::abs(casimir - s * (s + 1.0)) > residue_tol) {
    throw ClassificationError("total_spin_of: <S^2> = " + std::to_string(casimir) +
                              " is not of the form S(S+1)");
  }
  return s;
}

/// Spin labels of every member of one level, from S^2 diagonalized within the level.
/// Sorted ascending; more than one distinct value marks an accidental degeneracy.
inline std::vector<double> level_spins(const LevelMixture& mix, double residue_tol = 1e-6) {
  const auto d = static_cast<Eigen::Index>(mix.degeneracy());
  if (d == 0) return {};
  const int n_sites = mix.members.front().n_sites;
  const std::size_t dim = mix.members.front().dim();
  std::vector<std::vector<Complex>> raised(mix.degeneracy(), std::vector<Complex>(dim));
  for (std::size_t i = 0; i < mix.degeneracy(); ++i) {
    raise_total_spin<Complex>(mix.members[i].amplitudes, raised[i], n_sites);
  }
  Eigen::MatrixXcd casimir(d, d);
  for (Eigen::Index x = 0; x < d; ++x) {
    for (Eigen::Index y = x; y < d; ++y) {
      const auto& u = mix.members[static_cast<std::size_t>(x)].amplitudes;
      const auto& w = mix.members[static_cast<std::size_t>(y)].amplitudes;
      const auto& ru = raised[static_cast<std::size_t>(x)];
      const auto& rw = raised[static_cast<std::size_t>(y)];
      Complex sum = 0.0;
      for (BasisIndex s = 0; s < dim; ++s) {
        const double m = magnetization(s, n_sites);
        sum += std::conj(u[s]) * w[s] * (m * m + m) + std::conj(ru[s]) * rw[s];
      }
      casimir(x, y) = sum;
      casimir(y, x) = std::conj(sum);
    }
  }
  const Eigen::VectorXd values =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(casimir, Eigen::EigenvaluesOnly).eigenvalues();
  std::vector<double> spins;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double s = spin_from_casimir(values[i]);
    if (std::abs(values[i] - s * (s + 1.0)) > residue_tol) {
      throw ClassificationError("level_spins: S^2 eigenvalue " + std::to_string(values[i]) +
                                " is not of the form S(S+1)");
    }
    spins.push_back(s);
  }
  std::sort(spins.begin(), spins.end());
  return spins;
}

/// Basis-state image of s under a site permutation.
inline BasisIndex permute_basis_state(BasisIndex s, const SitePermutation& image) {
  BasisIndex t = 0;
  for (std::size_t i = 0; i < image.size(); ++i) {
    if ((s >> i) & 1U) t |= BasisIndex{1} << image[i];
  }
  return t;
}

/// Eigenvalues of a lattice symmetry restricted to one level, reported as the
/// integers m of exp(2 pi i m / L) with L the order of the permutation. Sorted.
inline std::vector<int> level_symmetry_labels(const LevelMixture& mix, const SitePermutation& image) {
  const auto d = static_cast<Eigen::Index>(mix.degeneracy());
  if (d == 0) return {};
  const std::size_t dim = mix.members.front().dim();
  if (hilbert_dimension(static_cast<int>(image.size())) != dim) {
    throw ContractViolation("level_symmetry_labels: permutation does not match system size");
  }
  const int order = permutation_order(image);
  std::vector<BasisIndex> target(dim);
  for (BasisIndex s = 0; s < dim; ++s) target[s] = permute_basis_state(s, image);

  Eigen::MatrixXcd rep(d, d);
  for (Eigen::Index y = 0; y < d; ++y) {
    const auto& w = mix.members[static_cast<std::size_t>(y)].amplitudes;
    std::vector<Complex> moved(dim);
    for (BasisIndex s = 0; s < dim; ++s) moved[target[s]] = w[s];
    for (Eigen::Index x = 0; x < d; ++x) {
      const auto& u = mix.members[static_cast<std::size_t>(x)].amplitudes;
      Complex sum = 0.0;
      for (BasisIndex s = 0; s < dim; ++s) sum += std::conj(u[s]) * moved[s];
      rep(x, y) = sum;
    }
  }
  const Eigen::VectorXcd eig = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(rep, false).eigenvalues();
  std::vector<int> labels;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double turns = std::arg(eig[i]) / (2.0 * std::numbers::pi);
    const long m = std::lround(turns * order);
    labels.push_back(static_cast<int>(((m % order) + order) % order));
  }
  std::sort(labels.begin(), labels.end());
  return labels;
}

struct EnergyGaps {
  double singlet_triplet = 0.0;                // E(lowest S=1) - E(lowest S=0)
  std::optional<double> singlet_singlet;       // E(second S=0) - E(lowest S=0); empty if no such state exists
};

/// Singlet-triplet and singlet-singlet gaps from the spin-labelled levels of sol.
/// A missing second singlet is an error unless sol spans the whole Hilbert space.
inline EnergyGaps energy_gaps(const EigenSolution& sol) {
  std::vector<double> singlets;
  std::optional<double> triplet;
  for (std::size_t l = 0; l < sol.levels.size(); ++l) {
    const auto spins = level_spins(level_mixture(sol, l));
    for (double s : spins) {
      if (s == 0.0) singlets.push_back(sol.levels[l].energy);
      if (s == 1.0 && !triplet) triplet = sol.levels[l].energy;
    }
  }
  const bool complete = !sol.eigenvectors.empty() && sol.size() == sol.eigenvectors.front().dim();
  if (singlets.empty() || !triplet || (singlets.size() < 2 && !complete)) {
    throw ClassificationError("energy_gaps: insufficient levels (found " +
                              std::to_string(singlets.size()) + " singlet states" +
                              (triplet ? "" : ", no triplet") + "); increase k");
  }
  EnergyGaps g;
  g.singlet_triplet = *triplet - singlets[0];
  if (singlets.size() >= 2) g.singlet_singlet = singlets[1] - singlets[0];
  return g;
}

}  // namespace spinent
