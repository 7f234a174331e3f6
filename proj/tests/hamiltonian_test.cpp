#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <random>

#include "spinent/hamiltonian.hpp"
#include "test_support.hpp"

using namespace spinent;
using spinent::testing::random_state;

namespace {

using CMatrix = Eigen::MatrixXcd;

// Single-site Pauli matrices in the (down, up) = (bit 0, bit 1) basis.
CMatrix pauli(char which) {
  CMatrix m = CMatrix::Zero(2, 2);
  const Complex i(0.0, 1.0);
  switch (which) {
    case 'x':
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case 'y':
      m(0, 1) = i;
      m(1, 0) = -i;
      break;
    case 'z':
      m(0, 0) = -1.0;
      m(1, 1) = 1.0;
      break;
  }
  return m;
}

// op acting on `site` of an n-site register; site n-1 is the leftmost factor.
CMatrix embed(const CMatrix& op, int site, int n) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int s = n - 1; s >= 0; --s) {
    const CMatrix factor = s == site ? op : CMatrix::Identity(2, 2);
    out = Eigen::kroneckerProduct(out, factor).eval();
  }
  return out;
}

CMatrix kronecker_hamiltonian(const BondList& bonds, double j1, double j2, int n) {
  const auto dim = static_cast<Eigen::Index>(1) << n;
  CMatrix h = CMatrix::Zero(dim, dim);
  for (const Bond& b : bonds) {
    const double j = b.coupling == CouplingClass::J1 ? j1 : j2;
    for (char axis : {'x', 'y', 'z'}) {
      h += j * embed(pauli(axis), b.a.value(), n) * embed(pauli(axis), b.b.value(), n);
    }
  }
  return h;
}

CMatrix matrix_of(const HamiltonianOperator& h) {
  const auto dim = static_cast<Eigen::Index>(h.dim());
  CMatrix m(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    const StateVector col = h.apply(StateVector::basis(h.n_sites(), static_cast<BasisIndex>(c)));
    for (Eigen::Index r = 0; r < dim; ++r) m(r, c) = col.amplitudes[static_cast<std::size_t>(r)];
  }
  return m;
}

}  // namespace

TEST(Hamiltonian, MatchesKroneckerPauliOracle) {
  ModelSpec spec;
  for (int n : {2, 3, 4, 5, 6}) {
    for (double alpha : {0.0, 0.37, 1.2}) {
      spec.n_sites = n;
      spec.alpha = alpha;
      spec.j1 = 1.3;
      const HamiltonianOperator h(spec);
      const CMatrix oracle = kronecker_hamiltonian(build_bonds(spec), spec.j1, spec.j2(), n);
      EXPECT_LT((matrix_of(h) - oracle).cwiseAbs().maxCoeff(), 1e-12) << "n=" << n << " alpha=" << alpha;
    }
  }
}

TEST(Hamiltonian, MatchesKroneckerOracleOnTori) {
  for (ModelKind kind : {ModelKind::Square2D_J1J2, ModelKind::ShastrySutherland}) {
    const BondList bonds = detail::torus_bonds(kind, 2, 3);
    const HamiltonianOperator h(bonds, 1.0, 0.8, 6);
    const CMatrix oracle = kronecker_hamiltonian(bonds, 1.0, 0.8, 6);
    EXPECT_LT((matrix_of(h) - oracle).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Hamiltonian, TwoSiteBondIsTwoSwapMinusIdentity) {
  const BondList bonds{{SiteIndex(0), SiteIndex(1), CouplingClass::J1}};
  const HamiltonianOperator h(bonds, 1.0, 0.0, 2);
  // |01> - |10> singlet has eigenvalue -3, |11> has +1
  StateVector singlet(2);
  singlet.amplitudes[1] = 1.0 / std::sqrt(2.0);
  singlet.amplitudes[2] = -1.0 / std::sqrt(2.0);
  const StateVector hs = h.apply(singlet);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(hs.amplitudes[i] + 3.0 * singlet.amplitudes[i]), 0.0, 1e-14);
  const StateVector up = h.apply(StateVector::basis(2, 3));
  EXPECT_NEAR(up.amplitudes[3].real(), 1.0, 1e-14);
}

TEST(Hamiltonian, HermitianOnRandomVectors) {
  std::mt19937_64 rng(11);
  for (ModelKind kind : {ModelKind::Chain1D, ModelKind::Square2D_J1J2, ModelKind::ShastrySutherland}) {
    ModelSpec spec;
    spec.kind = kind;
    spec.n_sites = kind == ModelKind::Chain1D ? 12 : 16;
    spec.alpha = 0.61;
    const HamiltonianOperator h(spec);
    for (int trial = 0; trial < 3; ++trial) {
      const StateVector x = random_state(spec.n_sites, rng);
      const StateVector y = random_state(spec.n_sites, rng);
      const Complex xhy = inner(x, h.apply(y));
      const Complex yhx = inner(y, h.apply(x));
      EXPECT_LT(std::abs(xhy - std::conj(yhx)), 1e-10 * std::max(1.0, std::abs(xhy)));
    }
  }
}

TEST(Hamiltonian, Linear) {
  std::mt19937_64 rng(12);
  ModelSpec spec;
  spec.n_sites = 10;
  spec.alpha = 0.3;
  const HamiltonianOperator h(spec);
  const StateVector x = random_state(10, rng);
  const StateVector y = random_state(10, rng);
  const Complex a(0.3, -1.7), b(-2.1, 0.4);
  StateVector combo(10);
  for (std::size_t i = 0; i < combo.dim(); ++i) combo.amplitudes[i] = a * x.amplitudes[i] + b * y.amplitudes[i];
  const StateVector lhs = h.apply(combo);
  const StateVector hx = h.apply(x), hy = h.apply(y);
  for (std::size_t i = 0; i < combo.dim(); ++i) {
    EXPECT_LT(std::abs(lhs.amplitudes[i] - (a * hx.amplitudes[i] + b * hy.amplitudes[i])), 1e-12);
  }
}

TEST(Hamiltonian, ConservesMagnetization) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> normal;
  for (ModelKind kind : {ModelKind::Chain1D, ModelKind::ShastrySutherland}) {
    ModelSpec spec;
    spec.kind = kind;
    spec.n_sites = kind == ModelKind::Chain1D ? 9 : 16;
    spec.alpha = 0.8;
    const HamiltonianOperator h(spec);
    for (int up : {2, spec.n_sites / 2}) {
      StateVector v(spec.n_sites);
      for (BasisIndex s : sector_states(spec.n_sites, up)) v.amplitudes[s] = Complex(normal(rng), normal(rng));
      const auto before = total_sz(v);
      const auto after = total_sz(h.apply(v));
      ASSERT_TRUE(before && after);
      EXPECT_EQ(*before, *after);
    }
  }
}

TEST(Hamiltonian, DiagonalIsTraceless) {
  ModelSpec spec;
  spec.n_sites = 8;
  spec.alpha = 0.45;
  const HamiltonianOperator h(spec);
  double trace = 0.0;
  for (double d : h.diagonal()) trace += d;
  EXPECT_NEAR(trace, 0.0, 1e-9);
}

TEST(Hamiltonian, ContractViolations) {
  ModelSpec spec;
  spec.n_sites = 4;
  const HamiltonianOperator h(spec);
  std::vector<double> in(8), out(16);
  EXPECT_THROW(h.apply<double>(in, out), ContractViolation);
  EXPECT_THROW(h.apply(StateVector(5)), ContractViolation);
  EXPECT_THROW(StateVector(3, std::vector<Complex>(7)), ContractViolation);
  EXPECT_THROW(total_sz(StateVector(3)), ContractViolation);
  const BondList self{{SiteIndex(1), SiteIndex(1), CouplingClass::J1}};
  EXPECT_THROW(HamiltonianOperator(self, 1.0, 0.0, 3), ContractViolation);
}

TEST(Hamiltonian, TotalSzDetectsMixedSectors) {
  StateVector v(3);
  v.amplitudes[0b011] = 1.0;
  EXPECT_EQ(total_sz(v), 0.5);
  v.amplitudes[0b001] = 1.0;
  EXPECT_FALSE(total_sz(v).has_value());
}
