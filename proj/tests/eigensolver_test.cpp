#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <random>

#include "spinent/eigensolver.hpp"
#include "test_support.hpp"

using namespace spinent;

namespace {

HamiltonianOperator chain(int n, double alpha) {
  ModelSpec spec;
  spec.n_sites = n;
  spec.alpha = alpha;
  return HamiltonianOperator(spec);
}

std::vector<std::size_t> degeneracies(const EigenSolution& sol) {
  std::vector<std::size_t> d;
  for (const Level& l : sol.levels) d.push_back(l.degeneracy);
  return d;
}

// Largest deviation of the projector onto the lanczos level from that of the reference level.
double level_subspace_error(const EigenSolution& got, const EigenSolution& ref, std::size_t level) {
  const Level& g = got.levels[level];
  const Level& r = ref.levels[level];
  double worst = 0.0;
  for (std::size_t i = g.first; i < g.first + g.degeneracy; ++i) {
    double weight = 0.0;
    for (std::size_t j = r.first; j < r.first + r.degeneracy; ++j) {
      weight += std::norm(inner(ref.eigenvectors[j], got.eigenvectors[i]));
    }
    worst = std::max(worst, std::abs(1.0 - weight));
  }
  return worst;
}

// Forces the iterative path on small systems.
LanczosOptions small_krylov(bool sectors, std::uint64_t seed) {
  LanczosOptions opt;
  opt.seed = seed;
  opt.krylov_dim = 32;
  opt.dense_cutoff = 16;
  opt.spin_sectors = sectors;
  // the 2x5 tori carry large accidental multiplets at some couplings
  opt.multiplet_slack = 24;
  return opt;
}

void expect_agrees_with_dense(const HamiltonianOperator& h, std::size_t k, const LanczosOptions& opt,
                              const std::string& label) {
  const EigenSolution ref = dense_all(h, 64);
  const EigenSolution got = lowest_k(h, k, opt);
  ASSERT_GE(got.size(), k) << label;
  ASSERT_EQ(got.eigenvectors.size(), got.size()) << label;
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_NEAR(got.eigenvalues[i], ref.eigenvalues[i], 1e-10 * std::max(1.0, std::abs(ref.eigenvalues[i])))
        << label << " state " << i;
  }
  std::vector<std::size_t> expected = degeneracies(ref);
  expected.resize(got.levels.size());
  ASSERT_EQ(degeneracies(got), expected) << label;
  for (std::size_t l = 0; l < got.levels.size(); ++l) {
    EXPECT_LT(level_subspace_error(got, ref, l), 1e-8) << label << " level " << l;
  }
}

}  // namespace

TEST(Eigensolver, TwoSiteSingletAndTriplet) {
  const EigenSolution sol = lowest_k(chain(2, 0.0), 2);
  ASSERT_EQ(sol.size(), 4u);
  EXPECT_NEAR(sol.eigenvalues[0], -3.0, 1e-12);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_NEAR(sol.eigenvalues[i], 1.0, 1e-12);
  EXPECT_EQ(degeneracies(sol), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(lowest_k(chain(2, 0.0), 4).eigenvalues, sol.eigenvalues);
}

TEST(Eigensolver, EightSiteRingCompletesTheTriplet) {
  const EigenSolution sol = lowest_k(chain(8, 0.0), 2);
  EXPECT_EQ(degeneracies(sol), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(sol.size(), 4u);
}

TEST(Eigensolver, TwelveSiteRingMatchesDense) {
  const HamiltonianOperator h = chain(12, 0.3);
  LanczosOptions opt;
  expect_agrees_with_dense(h, 10, opt, "N=12 alpha=0.3");
}

TEST(Eigensolver, MajumdarGhoshGroundStateIsDoublyDegenerate) {
  for (int n : {8, 12}) {
    const EigenSolution sol = lowest_k(chain(n, 0.5), 4);
    ASSERT_FALSE(sol.levels.empty());
    EXPECT_EQ(sol.levels[0].degeneracy, 2u) << "N=" << n;
    // product of nearest-neighbour singlets: -3/2 per site in this normalization
    EXPECT_NEAR(sol.levels[0].energy, -1.5 * n, 1e-9);
  }
}

TEST(Eigensolver, DenseSpectrumSumsToTrace) {
  for (double alpha : {0.0, 0.7}) {
    const EigenSolution all = dense_all(chain(10, alpha), 1);
    ASSERT_EQ(all.eigenvalues.size(), 1024u);
    double sum = 0.0;
    for (double e : all.eigenvalues) sum += e;
    EXPECT_NEAR(sum, 0.0, 1e-8);
  }
}

TEST(Eigensolver, DenseSectorsMatchFullMatrix) {
  for (ModelKind kind : {ModelKind::Chain1D, ModelKind::Square2D_J1J2, ModelKind::ShastrySutherland}) {
    const BondList bonds = kind == ModelKind::Chain1D ? build_bonds(ModelSpec{kind, 9, 1.0, 0.4})
                                                      : detail::torus_bonds(kind, 3, 3);
    const HamiltonianOperator h(bonds, 1.0, 0.9, 9);
    const Eigen::VectorXd full =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(spinent::testing::full_matrix(h), Eigen::EigenvaluesOnly)
            .eigenvalues();
    const EigenSolution sectors = dense_all(h, 1);
    for (Eigen::Index i = 0; i < full.size(); ++i) {
      EXPECT_NEAR(sectors.eigenvalues[static_cast<std::size_t>(i)], full[i], 1e-10);
    }
  }
}

TEST(Eigensolver, LanczosAgreesWithDenseAtRandomCouplings) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> alpha_dist(0.0, 1.6);
  for (ModelKind kind : {ModelKind::Chain1D, ModelKind::Square2D_J1J2, ModelKind::ShastrySutherland}) {
    const BondList bonds = kind == ModelKind::Chain1D ? build_bonds(ModelSpec{kind, 10, 1.0, 0.0})
                                                      : detail::torus_bonds(kind, 2, 5);
    for (int trial = 0; trial < 20; ++trial) {
      const double alpha = alpha_dist(rng);
      const HamiltonianOperator h(bonds, 1.0, alpha, 10);
      const bool sectors = trial % 2 == 0;
      const std::string label = std::string(model_name(kind)) + " alpha=" + std::to_string(alpha) +
                                (sectors ? " sectors" : " full");
      expect_agrees_with_dense(h, 4, small_krylov(sectors, static_cast<std::uint64_t>(trial)), label);
    }
  }
}

TEST(Eigensolver, EigenpairsAreOrthonormalWithSmallResiduals) {
  const HamiltonianOperator h = chain(14, 0.24);
  const EigenSolution sol = lowest_k(h, 8);
  for (std::size_t i = 0; i < sol.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      EXPECT_NEAR(std::abs(inner(sol.eigenvectors[i], sol.eigenvectors[j])), i == j ? 1.0 : 0.0, 1e-10);
    }
    StateVector r = h.apply(sol.eigenvectors[i]);
    for (std::size_t s = 0; s < r.dim(); ++s) r.amplitudes[s] -= sol.eigenvalues[i] * sol.eigenvectors[i].amplitudes[s];
    EXPECT_LT(norm(r), 1e-9 * std::max(1.0, std::abs(sol.eigenvalues[i])));
  }
}

TEST(Eigensolver, DeterministicForFixedSeed) {
  const HamiltonianOperator h = chain(13, 0.2);
  const EigenSolution a = lowest_k(h, 6, 5);
  const EigenSolution b = lowest_k(h, 6, 5);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  ASSERT_EQ(a.eigenvectors.size(), b.eigenvectors.size());
  for (std::size_t i = 0; i < a.eigenvectors.size(); ++i) EXPECT_EQ(a.eigenvectors[i].amplitudes, b.eigenvectors[i].amplitudes);
}

TEST(Eigensolver, MultipletOverflowWhenLevelExceedsSlack) {
  // At J2 = 0 on an even ring the first excited level is a triplet: three states, slack 1.
  LanczosOptions opt;
  opt.multiplet_slack = 1;
  EXPECT_THROW(lowest_k(chain(8, 0.0), 2, opt), MultipletOverflow);
  EXPECT_THROW(lowest_k(chain(12, 0.0), 2, opt), MultipletOverflow);
}

TEST(Eigensolver, RejectsBadK) {
  const HamiltonianOperator h = chain(4, 0.0);
  EXPECT_THROW(lowest_k(h, 0), ContractViolation);
  EXPECT_THROW(lowest_k(h, 17), ContractViolation);
  EXPECT_EQ(lowest_k(h, 16).size(), 16u);
}
