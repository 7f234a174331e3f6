#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <random>

#include "spinent/eigensolver.hpp"
#include "spinent/entanglement.hpp"
#include "test_support.hpp"

using namespace spinent;
using spinent::testing::random_state;

namespace {

HamiltonianOperator chain(int n, double alpha) {
  ModelSpec spec;
  spec.n_sites = n;
  spec.alpha = alpha;
  return HamiltonianOperator(spec);
}

TwoQubitDensityMatrix from_matrix(const Eigen::Matrix4cd& m) {
  TwoQubitDensityMatrix rho;
  rho.entries = m;
  return rho;
}

Eigen::Matrix2cd pauli(int mu) {
  const Complex i(0.0, 1.0);
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  switch (mu) {
    case 0: m = Eigen::Matrix2cd::Identity(); break;
    case 1: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case 2: m(0, 1) = i; m(1, 0) = -i; break;
    case 3: m(0, 0) = -1.0; m(1, 1) = 1.0; break;
  }
  return m;
}

// sigma^mu on one site of a state vector
StateVector apply_pauli(const StateVector& v, int site, int mu) {
  const Eigen::Matrix2cd p = pauli(mu);
  StateVector out(v.n_sites);
  const BasisIndex bit = BasisIndex{1} << site;
  for (BasisIndex s = 0; s < v.dim(); ++s) {
    const int in_bit = (s & bit) ? 1 : 0;
    for (int o = 0; o < 2; ++o) {
      const BasisIndex t = o ? (s | bit) : (s & ~bit);
      out.amplitudes[t] += p(o, in_bit) * v.amplitudes[s];
    }
  }
  return out;
}

// rho_ab = 1/4 sum_{mu,nu} <sigma_a^mu sigma_b^nu> sigma^mu x sigma^nu
Eigen::Matrix4cd pauli_expansion_rdm(const StateVector& v, int a, int b) {
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = 0; nu < 4; ++nu) {
      const Complex expect = inner(v, apply_pauli(apply_pauli(v, b, nu), a, mu));
      rho += 0.25 * expect * Eigen::kroneckerProduct(pauli(mu), pauli(nu)).eval();
    }
  }
  return rho;
}

Eigen::Matrix2cd random_unitary2(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::Matrix2cd g;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) g(r, c) = Complex(normal(rng), normal(rng));
  return Eigen::HouseholderQR<Eigen::Matrix2cd>(g).householderQ();
}

}  // namespace

TEST(Concurrence, BellStateIsMaximal) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = m(0, 3) = m(3, 0) = m(3, 3) = 0.5;
  EXPECT_NEAR(concurrence(from_matrix(m)), 1.0, 1e-12);
}

TEST(Concurrence, MaximallyMixedIsZero) {
  EXPECT_NEAR(concurrence(from_matrix(0.25 * Eigen::Matrix4cd::Identity())), 0.0, 1e-12);
}

TEST(Concurrence, WernerStates) {
  for (double p = 0.0; p <= 1.0 + 1e-12; p += 0.05) {
    Eigen::Matrix4cd singlet = Eigen::Matrix4cd::Zero();
    singlet(1, 1) = singlet(2, 2) = 0.5;
    singlet(1, 2) = singlet(2, 1) = -0.5;
    const Eigen::Matrix4cd rho = p * singlet + (1.0 - p) * 0.25 * Eigen::Matrix4cd::Identity();
    EXPECT_NEAR(concurrence(from_matrix(rho)), std::max(0.0, (3.0 * p - 1.0) / 2.0), 1e-10) << "p=" << p;
  }
  Eigen::Matrix4cd singlet = Eigen::Matrix4cd::Zero();
  singlet(1, 1) = singlet(2, 2) = 0.5;
  singlet(1, 2) = singlet(2, 1) = -0.5;
  EXPECT_NEAR(concurrence(from_matrix(0.6 * singlet + 0.1 * Eigen::Matrix4cd::Identity())), 0.4, 1e-12);
}

TEST(Concurrence, InvariantUnderLocalUnitaries) {
  std::mt19937_64 rng(3);
  const StateVector v = random_state(6, rng);
  const TwoQubitDensityMatrix rho = reduced_two_qubit(pure_state(v), SiteIndex(1), SiteIndex(4));
  const double c = concurrence(rho);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Matrix4cd u = Eigen::kroneckerProduct(random_unitary2(rng), random_unitary2(rng)).eval();
    EXPECT_NEAR(concurrence(from_matrix(u * rho.entries * u.adjoint())), c, 1e-10);
  }
}

TEST(Concurrence, RejectsInvalidMatrices) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = 1.5;
  m(1, 1) = -0.5;
  EXPECT_THROW(concurrence(from_matrix(m)), DataError);
  EXPECT_THROW(concurrence(from_matrix(0.5 * Eigen::Matrix4cd::Identity())), DataError);
  Eigen::Matrix4cd h = 0.25 * Eigen::Matrix4cd::Identity();
  h(0, 1) = 0.1;
  EXPECT_THROW(concurrence(from_matrix(h)), DataError);
}

TEST(ReducedDensityMatrix, BellTimesSpectator) {
  StateVector v(3);
  v.amplitudes[0b000] = 1.0 / std::sqrt(2.0);
  v.amplitudes[0b011] = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(concurrence(reduced_two_qubit(pure_state(v), SiteIndex(0), SiteIndex(1))), 1.0, 1e-12);
  EXPECT_NEAR(concurrence(reduced_two_qubit(pure_state(v), SiteIndex(0), SiteIndex(2))), 0.0, 1e-12);
}

TEST(ReducedDensityMatrix, GhzPairsAreUnentangled) {
  StateVector v(3);
  v.amplitudes[0b000] = 1.0 / std::sqrt(2.0);
  v.amplitudes[0b111] = 1.0 / std::sqrt(2.0);
  const TwoQubitDensityMatrix rho = reduced_two_qubit(pure_state(v), SiteIndex(0), SiteIndex(2));
  EXPECT_NEAR(rho(0, 0).real(), 0.5, 1e-14);
  EXPECT_NEAR(rho(3, 3).real(), 0.5, 1e-14);
  EXPECT_NEAR(std::abs(rho(0, 3)), 0.0, 1e-14);
  EXPECT_NEAR(concurrence(rho), 0.0, 1e-12);
}

TEST(ReducedDensityMatrix, MatchesPauliExpansion) {
  std::mt19937_64 rng(4);
  for (auto [a, b] : {std::pair{0, 1}, std::pair{3, 7}, std::pair{6, 2}}) {
    const StateVector v = random_state(8, rng);
    const TwoQubitDensityMatrix rho = reduced_two_qubit(pure_state(v), SiteIndex(a), SiteIndex(b));
    EXPECT_LT((rho.entries - pauli_expansion_rdm(v, a, b)).cwiseAbs().maxCoeff(), 1e-12);
  }
  // eigenstate mixture of an 8-site ring
  const EigenSolution sol = lowest_k(chain(8, 0.0), 2);
  const TwoQubitDensityMatrix rho = reduced_two_qubit(level_mixture(sol, 1), SiteIndex(0), SiteIndex(1));
  Eigen::Matrix4cd expected = Eigen::Matrix4cd::Zero();
  for (std::size_t i = 1; i < 4; ++i) expected += pauli_expansion_rdm(sol.eigenvectors[i], 0, 1) / 3.0;
  EXPECT_LT((rho.entries - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ReducedDensityMatrix, LevelMixtureIsBasisIndependent) {
  const EigenSolution sol = lowest_k(chain(8, 0.1), 2);
  ASSERT_EQ(sol.levels[1].degeneracy, 3u);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  Eigen::Matrix3cd g;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) g(r, c) = Complex(normal(rng), normal(rng));
  const Eigen::Matrix3cd u = Eigen::HouseholderQR<Eigen::Matrix3cd>(g).householderQ();
  std::vector<StateVector> rotated(3, StateVector(8));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (std::size_t s = 0; s < 256; ++s) rotated[i].amplitudes[s] += u(j, i) * sol.eigenvectors[1 + j].amplitudes[s];
  const auto original = reduced_two_qubit(level_mixture(sol, 1), SiteIndex(2), SiteIndex(3));
  const auto mixed = reduced_two_qubit(LevelMixture{rotated}, SiteIndex(2), SiteIndex(3));
  EXPECT_LT((original.entries - mixed.entries).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ReducedDensityMatrix, TranslationInvariantOnRings) {
  const EigenSolution sol = lowest_k(chain(10, 0.3), 4);
  for (std::size_t level = 0; level < 2; ++level) {
    const double c0 = concurrence(reduced_two_qubit(level_mixture(sol, level), SiteIndex(0), SiteIndex(1)));
    for (int i = 1; i < 10; ++i) {
      const double ci =
          concurrence(reduced_two_qubit(level_mixture(sol, level), SiteIndex(i), SiteIndex((i + 1) % 10)));
      EXPECT_NEAR(ci, c0, 1e-10) << "level " << level << " bond " << i;
    }
  }
}

TEST(ReducedDensityMatrix, PhysicalAtRandomCouplings) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> alpha_dist(0.0, 1.6);
  for (int trial = 0; trial < 20; ++trial) {
    const double alpha = alpha_dist(rng);
    const EigenSolution sol = lowest_k(chain(10, alpha), 4);
    for (std::size_t level = 0; level < 2; ++level) {
      const auto rho = reduced_two_qubit(level_mixture(sol, level), SiteIndex(0), SiteIndex(1));
      EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
      EXPECT_LT(rho.hermiticity_error(), 1e-12);
      EXPECT_GT(rho.min_eigenvalue(), -1e-12);
      const double c = concurrence(rho);
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 1.0);
    }
  }
}

TEST(ReducedDensityMatrix, ContractChecks) {
  StateVector v(3);
  v.amplitudes[0] = 1.0;
  EXPECT_THROW(reduced_two_qubit(pure_state(v), SiteIndex(1), SiteIndex(1)), ContractViolation);
  EXPECT_THROW(reduced_two_qubit(pure_state(v), SiteIndex(0), SiteIndex(3)), ContractViolation);
  const EigenSolution no_vectors = dense_all(chain(4, 0.0), 0);
  EXPECT_THROW(level_mixture(no_vectors, 0), ContractViolation);
}

TEST(TotalSpin, SimpleStates) {
  StateVector singlet(2);
  singlet.amplitudes[0b01] = 1.0 / std::sqrt(2.0);
  singlet.amplitudes[0b10] = -1.0 / std::sqrt(2.0);
  EXPECT_EQ(total_spin_of(singlet), 0.0);
  EXPECT_EQ(total_spin_of(StateVector::basis(2, 0b11)), 1.0);
  EXPECT_EQ(total_spin_of(StateVector::basis(3, 0b111)), 1.5);
  EXPECT_THROW(total_spin_of(StateVector::basis(2, 0b01)), ClassificationError);
}

TEST(TotalSpin, LevelSpinsOfRingLevels) {
  const EigenSolution even = lowest_k(chain(8, 0.0), 2);
  EXPECT_EQ(level_spins(level_mixture(even, 0)), std::vector<double>{0.0});
  EXPECT_EQ(level_spins(level_mixture(even, 1)), (std::vector<double>{1.0, 1.0, 1.0}));
  const EigenSolution odd = lowest_k(chain(9, 0.2), 4);
  for (double s : level_spins(level_mixture(odd, 0))) EXPECT_EQ(s, 0.5);
}

TEST(EnergyGaps, RingGapsAndTheirCrossing) {
  const EnergyGaps g0 = energy_gaps(lowest_k(chain(8, 0.0), 24));
  EXPECT_GT(g0.singlet_triplet, 0.0);
  ASSERT_TRUE(g0.singlet_singlet.has_value());
  EXPECT_GT(*g0.singlet_singlet, g0.singlet_triplet);
  // the first excited state switches from triplet to singlet near alpha = 0.2463
  const EnergyGaps below = energy_gaps(lowest_k(chain(8, 0.22), 24));
  const EnergyGaps above = energy_gaps(lowest_k(chain(8, 0.27), 24));
  EXPECT_GT(below.singlet_singlet.value() - below.singlet_triplet, 0.0);
  EXPECT_LT(above.singlet_singlet.value() - above.singlet_triplet, 0.0);
}

TEST(EnergyGaps, SingleBond) {
  const EnergyGaps g = energy_gaps(lowest_k(chain(2, 0.0), 4));
  EXPECT_NEAR(g.singlet_triplet, 4.0, 1e-12);
  EXPECT_FALSE(g.singlet_singlet.has_value());
}

TEST(EnergyGaps, NeedsTwoSingletsAndATriplet) {
  EXPECT_THROW(energy_gaps(lowest_k(chain(8, 0.0), 2)), ClassificationError);
}
