#pragma once

// Lowest eigenpairs of a HamiltonianOperator.
//
// lowest_k runs restarted block Lanczos with full reorthogonalization and
// locking. Every restart block carries one fresh random vector, so copies of a
// degenerate level that the previous Krylov space could not see are picked up
// by a later pass. The solve ends only once a pass over the orthogonal
// complement of the locked vectors shows nothing below the last requested
// level, which is what guarantees complete multiplets.
//
// dense_all diagonalizes each S^z sector separately (H conserves S^z) and
// merges the spectra.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spinent/errors.hpp"
#include "spinent/hamiltonian.hpp"
#include "spinent/spin.hpp"

namespace spinent {

struct Level {
  std::size_t first = 0;
  std::size_t degeneracy = 0;
  double energy = 0.0;  // energy of the first member
};

struct EigenSolution {
  std::vector<double> eigenvalues;
  std::vector<StateVector> eigenvectors;
  std::vector<Level> levels;
  double degeneracy_tolerance = 0.0;
  std::size_t matvecs = 0;

  std::size_t size() const noexcept { return eigenvalues.size(); }
};

inline double degeneracy_tolerance(double lowest_energy) {
  return 1e-8 * std::max(1.0, std::abs(lowest_energy));
}

/// Groups an ascending spectrum into levels; consecutive values within tol share a level.
inline std::vector<Level> group_levels(std::span<const double> eigenvalues, double tol) {
  std::vector<Level> levels;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    if (levels.empty() || eigenvalues[i] - eigenvalues[i - 1] > tol) {
      levels.push_back({i, 1, eigenvalues[i]});
    } else {
      ++levels.back().degeneracy;
    }
  }
  return levels;
}

struct LanczosOptions {
  std::uint64_t seed = 42;
  int block_size = 4;
  std::size_t krylov_dim = 96;
  double residual_tol = 1e-11;  // on ||Hv - lv|| / max(1, |l|)
  std::size_t matvecs_per_pair = 5000;
  std::size_t multiplet_slack = 8;
  // Below this dimension the problem is handed to the dense solver.
  std::size_t dense_cutoff = 64;
  // Iterate in the lowest |S^z| sector and rebuild multiplets with S^+/S^-.
  bool spin_sectors = true;
};

namespace detail {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline StateVector to_state(const Eigen::Ref<const Vector>& v, int n_sites) {
  StateVector out(n_sites);
  for (Eigen::Index i = 0; i < v.size(); ++i) out.amplitudes[static_cast<std::size_t>(i)] = v[i];
  return out;
}

inline void apply_real(const HamiltonianOperator& h, const Eigen::Ref<const Vector>& in,
                       Eigen::Ref<Vector> out) {
  h.apply<double>(std::span<const double>(in.data(), static_cast<std::size_t>(in.size())),
                  std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
}

/// Dense symmetric matrix of H restricted to the given basis states.
inline Matrix sector_matrix(const HamiltonianOperator& h, std::span<const BasisIndex> states) {
  const auto m = static_cast<Eigen::Index>(states.size());
  Matrix dense = Matrix::Zero(m, m);
  std::vector<double> in(h.dim(), 0.0);
  std::vector<double> out(h.dim(), 0.0);
  for (Eigen::Index col = 0; col < m; ++col) {
    in[states[static_cast<std::size_t>(col)]] = 1.0;
    h.apply<double>(in, out);
    in[states[static_cast<std::size_t>(col)]] = 0.0;
    for (Eigen::Index row = 0; row < m; ++row) {
      dense(row, col) = out[states[static_cast<std::size_t>(row)]];
    }
  }
  return dense;
}

class RandomBlock {
 public:
  explicit RandomBlock(std::uint64_t seed) : engine_(seed) {}

  void fill(Eigen::Ref<Vector> v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal_(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Removes components along the columns of basis (two classical Gram-Schmidt sweeps).
/// Returns the coefficients removed.
inline Vector project_out(const Eigen::Ref<const Matrix>& basis, Eigen::Ref<Vector> v) {
  Vector coeff = Vector::Zero(basis.cols());
  if (basis.cols() == 0) return coeff;
  for (int sweep = 0; sweep < 2; ++sweep) {
    const Vector c = basis.transpose() * v;
    v.noalias() -= basis * c;
    coeff += c;
  }
  return coeff;
}

/// Block version of project_out; returns the removed coefficient matrix.
inline Matrix project_out_block(const Eigen::Ref<const Matrix>& basis, Eigen::Ref<Matrix> w) {
  Matrix coeff = Matrix::Zero(basis.cols(), w.cols());
  if (basis.cols() == 0) return coeff;
  for (int sweep = 0; sweep < 2; ++sweep) {
    const Matrix c = basis.transpose() * w;
    w.noalias() -= basis * c;
    coeff += c;
  }
  return coeff;
}

}  // namespace detail

/// Full spectrum by dense diagonalization of every S^z sector.
///
/// Eigenvectors are kept for the lowest `keep_vectors` states only; storing all
/// of them is refused above 1 GiB.
inline EigenSolution dense_all(const HamiltonianOperator& h,
                               std::size_t keep_vectors = std::numeric_limits<std::size_t>::max()) {
  constexpr int kMaxDenseSites = 14;
  if (h.n_sites() > kMaxDenseSites) {
    throw ConfigError("dense_all refuses N=" + std::to_string(h.n_sites()) + " (limit " +
                      std::to_string(kMaxDenseSites) + ")");
  }
  const std::size_t dim = h.dim();
  keep_vectors = std::min(keep_vectors, dim);
  if (static_cast<double>(keep_vectors) * static_cast<double>(dim) * sizeof(Complex) >
      static_cast<double>(std::size_t{1} << 30)) {
    throw ConfigError("dense_all: requested eigenvectors exceed 1 GiB; lower keep_vectors");
  }

  struct Entry {
    double energy;
    int sector;
    Eigen::Index column;
  };
  std::vector<Entry> entries;
  entries.reserve(dim);
  std::vector<std::vector<BasisIndex>> sectors;
  std::vector<Eigen::SelfAdjointEigenSolver<detail::Matrix>> solvers;
  for (int up = 0; up <= h.n_sites(); ++up) {
    sectors.push_back(sector_states(h.n_sites(), up));
    solvers.emplace_back(detail::sector_matrix(h, sectors.back()), Eigen::ComputeEigenvectors);
    const auto& values = solvers.back().eigenvalues();
    for (Eigen::Index i = 0; i < values.size(); ++i) entries.push_back({values[i], up, i});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& x, const Entry& y) { return x.energy < y.energy; });

  EigenSolution sol;
  sol.eigenvalues.reserve(dim);
  for (const Entry& e : entries) sol.eigenvalues.push_back(e.energy);
  for (std::size_t i = 0; i < keep_vectors; ++i) {
    const Entry& e = entries[i];
    const auto& states = sectors[static_cast<std::size_t>(e.sector)];
    const auto& vecs = solvers[static_cast<std::size_t>(e.sector)].eigenvectors();
    StateVector v(h.n_sites());
    for (std::size_t r = 0; r < states.size(); ++r) {
      v.amplitudes[states[r]] = vecs(static_cast<Eigen::Index>(r), e.column);
    }
    sol.eigenvectors.push_back(std::move(v));
  }
  sol.degeneracy_tolerance = degeneracy_tolerance(sol.eigenvalues.front());
  sol.levels = group_levels(sol.eigenvalues, sol.degeneracy_tolerance);
  sol.matvecs = dim;
  return sol;
}

namespace detail {

/// Number of leading states that ends on a level boundary at or after index k-1.
inline std::size_t complete_prefix(std::span<const double> values, std::size_t k, double tol) {
  std::size_t end = k;
  while (end < values.size() && values[end] - values[end - 1] <= tol) ++end;
  return end;
}

inline EigenSolution dense_lowest(const HamiltonianOperator& h, std::size_t k,
                                  std::size_t slack) {
  EigenSolution full = dense_all(h, std::min(h.dim(), k + slack + 1));
  const std::size_t end = complete_prefix(full.eigenvalues, k, full.degeneracy_tolerance);
  if (end > k + slack) {
    throw MultipletOverflow("multiplet overflow: level at index " + std::to_string(k - 1) +
                            " extends to " + std::to_string(end));
  }
  full.eigenvalues.resize(end);
  full.eigenvectors.resize(end);
  full.levels = group_levels(full.eigenvalues, full.degeneracy_tolerance);
  return full;
}

}  // namespace detail

namespace detail {

struct KrylovResult {
  std::vector<double> values;  // ascending
  Matrix vectors;              // matching columns
  double degeneracy_tolerance = 0.0;
  std::size_t matvecs = 0;
};

/// Restarted block Lanczos for the lowest k eigenpairs of a symmetric operator
/// `op(in, out)` on R^n; returns complete levels only.
template <typename Op>
KrylovResult krylov_lowest(Op&& op, Eigen::Index n, std::size_t k, const LanczosOptions& opt) {
  const auto block = static_cast<Eigen::Index>(std::max(1, opt.block_size));
  const std::size_t max_locked = k + opt.multiplet_slack + 1;
  const auto krylov = std::max<Eigen::Index>(static_cast<Eigen::Index>(opt.krylov_dim),
                                             4 * block + static_cast<Eigen::Index>(max_locked));
  // Thick restarts keep at most this many Ritz vectors.
  const Eigen::Index keep_max = std::min<Eigen::Index>(
      krylov / 2, static_cast<Eigen::Index>(max_locked) + 2 * block);
  const std::size_t budget = opt.matvecs_per_pair * k;
  auto scale_of = [](double theta) { return std::max(1.0, std::abs(theta)); };

  RandomBlock rng(opt.seed);
  Matrix locked(n, 0);
  std::vector<double> locked_values;
  // Basis columns: [kept Ritz vectors | blocks of the Krylov expansion]. Columns
  // past `krylov` hold the final unexpanded block.
  Matrix basis(n, krylov + 2 * block);
  Matrix proj = Matrix::Zero(basis.cols(), basis.cols());
  Eigen::Index used = 0;
  Eigen::Index expanded = 0;  // columns whose H-image is already in proj
  Vector w(n);
  std::size_t matvecs = 0;
  std::vector<double> last_residuals;

  auto append_random = [&]() {
    Vector r(n);
    do {
      rng.fill(r);
      project_out(locked, r);
      project_out(basis.leftCols(used), r);
    } while (!(r.norm() > 1e-10));
    basis.col(used++) = r.normalized();
  };

  for (Eigen::Index c = 0; c < block; ++c) append_random();
  bool fresh_pass = true;

  while (true) {
    // Block expansion with full reorthogonalization; proj(:, c) = Q^T H q_c.
    while (expanded < krylov) {
      const Eigen::Index first = expanded;
      const Eigen::Index width = used - expanded;
      const Eigen::Index old_used = used;
      Matrix images(n, width);
      for (Eigen::Index c = 0; c < width; ++c) {
        op(basis.col(first + c), images.col(c));
        ++matvecs;
      }
      project_out_block(locked, images);
      proj.block(0, first, old_used, width) =
          project_out_block(basis.leftCols(old_used), images);
      // Orthonormalize the block images among themselves.
      for (Eigen::Index c = 0; c < width; ++c) {
        auto v = images.col(c);
        const Eigen::Index fresh = used - old_used;
        proj.block(old_used, first + c, fresh, 1) =
            project_out(basis.middleCols(old_used, fresh), v);
        const double nv = v.norm();
        if (nv > 1e-12 * scale_of(proj(first + c, first + c))) {
          basis.col(used) = v / nv;
          proj(used, first + c) = nv;
          ++used;
        } else {
          append_random();  // invariant subspace reached: no coupling
        }
      }
      expanded = first + width;
    }

    const Eigen::Index m = expanded;
    Matrix t = proj.topLeftCorner(m, m);
    t = (0.5 * (t + t.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> ritz(t);
    const Vector theta = ritz.eigenvalues();
    const Matrix y = ritz.eigenvectors();
    // H Q y - theta Q y = Q_rest * C y, with C the coupling into the unexpanded block.
    const Matrix coupling = proj.block(m, 0, used - m, m);
    Vector estimate(m);
    for (Eigen::Index i = 0; i < m; ++i) estimate[i] = (coupling * y.col(i)).norm();

    std::vector<bool> taken(static_cast<std::size_t>(m), false);
    last_residuals.clear();
    const Eigen::Index scan = std::min<Eigen::Index>(m / 2, keep_max);
    for (Eigen::Index i = 0; i < scan && locked_values.size() < max_locked; ++i) {
      const double tol = opt.residual_tol * scale_of(theta[i]);
      if (estimate[i] > 10.0 * tol) continue;
      Vector x = basis.leftCols(m) * y.col(i);
      project_out(locked, x);
      x.normalize();
      op(x, w);
      ++matvecs;
      const double rq = x.dot(w);
      const double res = (w - rq * x).norm();
      last_residuals.push_back(res);
      if (res > tol) continue;
      locked.conservativeResize(Eigen::NoChange, locked.cols() + 1);
      locked.col(locked.cols() - 1) = x;
      locked_values.push_back(rq);
      taken[static_cast<std::size_t>(i)] = true;
      // A pass that locks something may hide further partners of that level.
      fresh_pass = false;
    }

    Eigen::Index lowest_free = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!taken[static_cast<std::size_t>(i)]) {
        lowest_free = i;
        break;
      }
    }

    bool below_cut_free = true;
    if (locked_values.size() >= k) {
      std::vector<double> sorted = locked_values;
      std::sort(sorted.begin(), sorted.end());
      const double tol_deg = degeneracy_tolerance(sorted.front());
      const double cut = sorted[k - 1];
      // The lowest free Ritz pair sits within its residual of an eigenvalue of the complement.
      double floor_free = std::numeric_limits<double>::infinity();
      if (lowest_free >= 0) {
        floor_free = theta[lowest_free] - estimate[lowest_free];
        if (floor_free > cut + tol_deg) {
          const Vector x = (basis.leftCols(m) * y.col(lowest_free)).normalized();
          op(x, w);
          ++matvecs;
          floor_free = theta[lowest_free] - (w - theta[lowest_free] * x).norm();
        }
      }
      below_cut_free = floor_free <= cut + tol_deg;
      // Only a pass started from fresh random vectors, and which has locked nothing
      // since, can vouch that the locked set holds every state below the cut.
      if (!below_cut_free && fresh_pass) {
        const std::size_t end = complete_prefix(sorted, k, tol_deg);
        if (end > k + opt.multiplet_slack) {
          throw MultipletOverflow("multiplet overflow: level at index " + std::to_string(k - 1) +
                                  " has more than " + std::to_string(opt.multiplet_slack) +
                                  " extra members");
        }
        std::vector<std::size_t> order(locked_values.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return locked_values[a] < locked_values[b];
        });
        KrylovResult result;
        result.degeneracy_tolerance = tol_deg;
        result.matvecs = matvecs;
        result.vectors.resize(n, static_cast<Eigen::Index>(end));
        for (std::size_t i = 0; i < end; ++i) {
          result.values.push_back(locked_values[order[i]]);
          result.vectors.col(static_cast<Eigen::Index>(i)) =
              locked.col(static_cast<Eigen::Index>(order[i]));
        }
        return result;
      }
      if (below_cut_free && locked_values.size() >= max_locked) {
        throw MultipletOverflow("multiplet overflow: more than " +
                                std::to_string(max_locked - 1) + " states at or below " +
                                std::to_string(cut));
      }
    }

    if (matvecs > budget) {
      throw SolverError("lanczos: no convergence after " + std::to_string(matvecs) + " matvecs",
                        last_residuals);
    }

    if (!below_cut_free) {
      // Verification pass from scratch in the complement of the locked vectors.
      proj.setZero();
      used = 0;
      expanded = 0;
      for (Eigen::Index c = 0; c < block; ++c) append_random();
      fresh_pass = true;
      continue;
    }

    // Thick restart: [lowest free Ritz vectors | unexpanded block]. The Krylov relation
    // H Y = Y diag(theta) + Q_rest C Y carries over exactly.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < m && static_cast<Eigen::Index>(keep.size()) < keep_max; ++i) {
      if (!taken[static_cast<std::size_t>(i)]) keep.push_back(i);
    }
    const auto p = static_cast<Eigen::Index>(keep.size());
    Matrix ysel(m, p);
    for (Eigen::Index j = 0; j < p; ++j) ysel.col(j) = y.col(keep[static_cast<std::size_t>(j)]);
    const Matrix kept = basis.leftCols(m) * ysel;
    const Matrix rest = basis.middleCols(m, used - m);
    const Matrix rest_coupling = coupling * ysel;
    proj.setZero();
    basis.leftCols(p) = kept;
    basis.middleCols(p, rest.cols()) = rest;
    for (Eigen::Index j = 0; j < p; ++j) proj(j, j) = theta[keep[static_cast<std::size_t>(j)]];
    proj.block(p, 0, rest.cols(), p) = rest_coupling;
    used = p + rest.cols();
    expanded = p;
  }
}

}  // namespace detail

namespace detail {

inline std::size_t binomial(int n, int r) {
  std::size_t c = 1;
  for (int i = 1; i <= r; ++i) c = c * static_cast<std::size_t>(n - r + i) / static_cast<std::size_t>(i);
  return c;
}

/// Lowest eigenpairs of H restricted to the S^z sector spanned by `states`.
inline KrylovResult sector_lowest(const HamiltonianOperator& h, std::span<const BasisIndex> states,
                                  std::size_t k, const LanczosOptions& opt) {
  const auto m = static_cast<Eigen::Index>(states.size());
  const std::size_t max_locked = k + opt.multiplet_slack + 1;
  if (states.size() <= std::max(opt.dense_cutoff, 2 * (max_locked + opt.krylov_dim))) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sector_matrix(h, states));
    KrylovResult result;
    const Vector& values = eig.eigenvalues();
    result.degeneracy_tolerance = degeneracy_tolerance(values[0]);
    const std::size_t end = complete_prefix(
        std::span<const double>(values.data(), static_cast<std::size_t>(m)), std::min(k, states.size()),
        result.degeneracy_tolerance);
    result.values.assign(values.data(), values.data() + end);
    result.vectors = eig.eigenvectors().leftCols(static_cast<Eigen::Index>(end));
    result.matvecs = states.size();
    return result;
  }
  std::vector<double> full_in(h.dim(), 0.0);
  std::vector<double> full_out(h.dim(), 0.0);
  auto op = [&](const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) {
    for (Eigen::Index i = 0; i < m; ++i) full_in[states[static_cast<std::size_t>(i)]] = in[i];
    h.apply<double>(full_in, full_out);
    for (Eigen::Index i = 0; i < m; ++i) out[i] = full_out[states[static_cast<std::size_t>(i)]];
  };
  return krylov_lowest(op, m, k, opt);
}

struct MultipletMember {
  double energy;
  StateVector vector;
};

/// Rebuilds every multiplet member from the sector eigenvectors: each sector level
/// is rotated onto S^2 eigenvectors, which are then walked up and down with S^+/S^-.
inline std::vector<MultipletMember> expand_multiplets(const HamiltonianOperator& h,
                                                      std::span<const BasisIndex> states,
                                                      const KrylovResult& sector) {
  const int n_sites = h.n_sites();
  const std::size_t dim = h.dim();
  const double sector_m = magnetization(states.front(), n_sites);
  std::vector<MultipletMember> members;
  const auto levels = group_levels(sector.values, sector.degeneracy_tolerance);
  for (const Level& level : levels) {
    const auto d = static_cast<Eigen::Index>(level.degeneracy);
    std::vector<std::vector<double>> embedded(level.degeneracy, std::vector<double>(dim, 0.0));
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto col = sector.vectors.col(static_cast<Eigen::Index>(level.first) + j);
      for (std::size_t r = 0; r < states.size(); ++r) {
        embedded[static_cast<std::size_t>(j)][states[r]] = col[static_cast<Eigen::Index>(r)];
      }
    }
    Matrix casimir(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index b = a; b < d; ++b) {
        casimir(a, b) = s_squared_element<double>(embedded[static_cast<std::size_t>(a)],
                                                  embedded[static_cast<std::size_t>(b)], n_sites);
        casimir(b, a) = casimir(a, b);
      }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> spin(casimir);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double total = spin_from_casimir(spin.eigenvalues()[j]);
      std::vector<double> top(dim, 0.0);
      for (Eigen::Index a = 0; a < d; ++a) {
        const double c = spin.eigenvectors()(a, j);
        const auto& src = embedded[static_cast<std::size_t>(a)];
        for (std::size_t s = 0; s < dim; ++s) top[s] += c * src[s];
      }
      const double energy = sector.values[level.first + static_cast<std::size_t>(j)];
      // Members from m = -S to +S.
      std::vector<std::vector<double>> ladder;
      std::vector<double> cur = top;
      std::vector<double> next(dim);
      for (double mz = sector_m; mz > -total + 0.25; mz -= 1.0) {
        lower_total_spin<double>(cur, next, n_sites);
        const double nn = std::sqrt(std::inner_product(next.begin(), next.end(), next.begin(), 0.0));
        for (double& x : next) x /= nn;
        ladder.push_back(next);
        cur = next;
      }
      std::reverse(ladder.begin(), ladder.end());
      ladder.push_back(top);
      cur = top;
      for (double mz = sector_m; mz < total - 0.25; mz += 1.0) {
        raise_total_spin<double>(cur, next, n_sites);
        const double nn = std::sqrt(std::inner_product(next.begin(), next.end(), next.begin(), 0.0));
        for (double& x : next) x /= nn;
        ladder.push_back(next);
        cur = next;
      }
      for (const auto& v : ladder) {
        StateVector sv(n_sites);
        for (std::size_t s = 0; s < dim; ++s) sv.amplitudes[s] = v[s];
        members.push_back({energy, std::move(sv)});
      }
    }
  }
  std::stable_sort(members.begin(), members.end(),
                   [](const MultipletMember& a, const MultipletMember& b) { return a.energy < b.energy; });
  return members;
}

}  // namespace detail

/// The k lowest eigenpairs, extended so that the last level is never split.
///
/// With opt.spin_sectors the Krylov iteration runs in the lowest |S^z| sector and
/// the remaining members of each SU(2) multiplet are generated with S^+/S^-; the
/// returned vectors always live in the full 2^N space.
inline EigenSolution lowest_k(const HamiltonianOperator& h, std::size_t k,
                              const LanczosOptions& opt) {
  const std::size_t dim = h.dim();
  if (k < 1 || k > dim) throw ContractViolation("lowest_k: need 1 <= k <= dim");
  const std::size_t max_locked = k + opt.multiplet_slack + 1;
  if (dim <= opt.dense_cutoff) return detail::dense_lowest(h, k, opt.multiplet_slack);

  EigenSolution sol;
  if (opt.spin_sectors) {
    const int up = (h.n_sites() + 1) / 2;
    const auto states = sector_states(h.n_sites(), up);
    // Every multiplet contributes at least one sector state, so k sector states cover k states.
    const detail::KrylovResult sector =
        detail::sector_lowest(h, states, std::min(k, states.size() - 1), opt);
    auto members = detail::expand_multiplets(h, states, sector);
    std::vector<double> energies;
    for (const auto& mm : members) energies.push_back(mm.energy);
    sol.degeneracy_tolerance = degeneracy_tolerance(energies.front());
    const std::size_t end =
        detail::complete_prefix(energies, std::min(k, energies.size()), sol.degeneracy_tolerance);
    if (end > k + opt.multiplet_slack) {
      throw MultipletOverflow("multiplet overflow: level at index " + std::to_string(k - 1) +
                              " extends to index " + std::to_string(end - 1));
    }
    for (std::size_t i = 0; i < end; ++i) {
      sol.eigenvalues.push_back(members[i].energy);
      sol.eigenvectors.push_back(std::move(members[i].vector));
    }
    sol.matvecs = sector.matvecs;
  } else {
    if (2 * (max_locked + opt.krylov_dim) > dim) return detail::dense_lowest(h, k, opt.multiplet_slack);
    auto op = [&](const Eigen::Ref<const detail::Vector>& in, Eigen::Ref<detail::Vector> out) {
      detail::apply_real(h, in, out);
    };
    const detail::KrylovResult full = detail::krylov_lowest(op, static_cast<Eigen::Index>(dim), k, opt);
    sol.degeneracy_tolerance = full.degeneracy_tolerance;
    sol.eigenvalues = full.values;
    for (Eigen::Index c = 0; c < full.vectors.cols(); ++c) {
      sol.eigenvectors.push_back(detail::to_state(full.vectors.col(c), h.n_sites()));
    }
    sol.matvecs = full.matvecs;
  }
  sol.levels = group_levels(sol.eigenvalues, sol.degeneracy_tolerance);
  return sol;
}

inline EigenSolution lowest_k(const HamiltonianOperator& h, std::size_t k, std::uint64_t seed = 42) {
  LanczosOptions opt;
  opt.seed = seed;
  return lowest_k(h, k, opt);
}

}  // namespace spinent
