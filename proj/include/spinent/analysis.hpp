#pragma once

// Alpha sweeps, concurrence-jump location, level-crossing diagrams and the
// finite-size extrapolation fits.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "spinent/eigensolver.hpp"
#include "spinent/entanglement.hpp"
#include "spinent/errors.hpp"
#include "spinent/hamiltonian.hpp"
#include "spinent/lattice.hpp"

namespace spinent {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class RecordFlag : std::uint8_t { ok, near_crossing, solver_error };

inline std::string_view flag_name(RecordFlag flag) {
  switch (flag) {
    case RecordFlag::ok:
      return "ok";
    case RecordFlag::near_crossing:
      return "near_crossing";
    case RecordFlag::solver_error:
      return "solver_error";
  }
  return "unknown";
}

inline RecordFlag parse_flag(std::string_view name) {
  if (name == "ok") return RecordFlag::ok;
  if (name == "near_crossing") return RecordFlag::near_crossing;
  if (name == "solver_error") return RecordFlag::solver_error;
  throw DataError("unknown record flag '" + std::string(name) + "'");
}

struct SweepRecord {
  double alpha = 0.0;
  std::vector<double> eigenvalues;  // the first k, ascending
  std::size_t d1 = 0;
  std::vector<double> spins0;  // S labels of the ground level members
  std::vector<double> spins1;  // ... and of the first excited level
  double c0 = kNaN;
  double c1 = kNaN;
  RecordFlag flag = RecordFlag::ok;
  std::string message;

  bool valid() const noexcept { return flag == RecordFlag::ok; }
};

struct SweepConfig {
  ModelSpec model;  // alpha is overwritten per point
  std::size_t k = 8;
  std::uint64_t seed = 42;
  SiteIndex site_a{0};
  SiteIndex site_b{1};
  unsigned threads = 0;  // 0: hardware concurrency
};

struct SweepResult {
  SweepConfig config;
  std::vector<double> alphas;
  std::vector<SweepRecord> records;
};

/// start, start+step, ... up to stop inclusive (within step*1e-9).
inline std::vector<double> alpha_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw ConfigError("alpha step must be positive");
  if (!(start <= stop)) throw ConfigError("alpha range is empty: start must not exceed stop");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = start + static_cast<double>(i) * step;
  return grid;
}

struct GridRange {
  double start;
  double stop;
  double step;
};

inline GridRange default_range(ModelKind kind) {
  switch (kind) {
    case ModelKind::Chain1D:
      return {0.0, 0.35, 0.0025};
    case ModelKind::Square2D_J1J2:
      return {0.0, 0.8, 0.005};
    case ModelKind::ShastrySutherland:
      return {0.8, 1.8, 0.005};
  }
  return {0.0, 1.0, 0.01};
}

/// Number of lowest states requested per point; enough to hold three levels for
/// the usual multiplet structure of each model (odd rings start with a quartet).
inline std::size_t default_k(const ModelSpec& spec) {
  if (spec.kind == ModelKind::Chain1D) return spec.n_sites % 2 == 0 ? 8 : 16;
  return 6;
}

namespace detail {

/// Runs fn(i) for i in [0, count) on up to `threads` workers; results land by index.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Slack used when the first attempt stops inside a wide multiplet. Only the
/// lowest levels are wanted, so a wide level at the cutoff is accepted whole.
inline constexpr std::size_t kWideSlack = 64;

inline EigenSolution solve_with_slack(const HamiltonianOperator& h, std::size_t k, std::uint64_t seed) {
  LanczosOptions opt;
  opt.seed = seed;
  try {
    return lowest_k(h, k, opt);
  } catch (const MultipletOverflow&) {
    opt.multiplet_slack = kWideSlack;
    return lowest_k(h, k, opt);
  }
}

/// Solves with k states, enlarging k until three levels are resolved or the space runs out.
inline EigenSolution solve_levels(const HamiltonianOperator& h, std::size_t k, std::uint64_t seed,
                                  std::size_t min_levels = 3) {
  std::size_t kk = std::min(k, h.dim() - 1);
  while (true) {
    EigenSolution sol = solve_with_slack(h, kk, seed);
    if (sol.levels.size() >= min_levels || kk >= h.dim() - 1 || kk >= 4 * k) return sol;
    kk = std::min(h.dim() - 1, std::max(2 * kk, sol.size() + 1));
  }
}

inline bool levels_too_close(const EigenSolution& sol, std::size_t upto) {
  for (std::size_t l = 0; l + 1 < sol.levels.size() && l < upto; ++l) {
    if (sol.levels[l + 1].energy - sol.levels[l].energy < 10.0 * sol.degeneracy_tolerance) return true;
  }
  return false;
}

}  // namespace detail

/// One eigen-solve plus ground and first-excited concurrence at a single alpha.
inline SweepRecord evaluate_point(const SweepConfig& config, double alpha) {
  SweepRecord rec;
  rec.alpha = alpha;
  try {
    ModelSpec spec = config.model;
    spec.alpha = alpha;
    const HamiltonianOperator h(spec);
    const EigenSolution sol = detail::solve_levels(h, config.k, config.seed);
    const std::size_t keep = std::min(config.k, sol.size());
    rec.eigenvalues.assign(sol.eigenvalues.begin(), sol.eigenvalues.begin() + static_cast<std::ptrdiff_t>(keep));
    if (sol.levels.size() < 2) {
      rec.flag = RecordFlag::solver_error;
      rec.message = "fewer than two levels resolved";
      return rec;
    }
    rec.d1 = sol.levels[1].degeneracy;
    const LevelMixture ground = level_mixture(sol, 0);
    const LevelMixture excited = level_mixture(sol, 1);
    rec.spins0 = level_spins(ground);
    rec.spins1 = level_spins(excited);
    if (detail::levels_too_close(sol, 2)) {
      rec.flag = RecordFlag::near_crossing;
      return rec;
    }
    rec.c0 = concurrence(reduced_two_qubit(ground, config.site_a, config.site_b));
    rec.c1 = concurrence(reduced_two_qubit(excited, config.site_a, config.site_b));
  } catch (const SolverError& e) {
    rec.flag = RecordFlag::solver_error;
    rec.message = e.what();
  } catch (const ClassificationError& e) {
    rec.flag = RecordFlag::solver_error;
    rec.message = e.what();
  } catch (const DataError& e) {
    rec.flag = RecordFlag::solver_error;
    rec.message = e.what();
  }
  return rec;
}

inline SweepResult sweep(const SweepConfig& config, std::span<const double> alphas) {
  validate(config.model);
  if (config.k < 3) throw ConfigError("sweep needs k >= 3");
  for (std::size_t i = 1; i < alphas.size(); ++i) {
    if (!(alphas[i] > alphas[i - 1])) throw ConfigError("alpha grid must be strictly ascending");
  }
  SweepResult result;
  result.config = config;
  result.alphas.assign(alphas.begin(), alphas.end());
  result.records.resize(alphas.size());
  detail::parallel_for(alphas.size(), config.threads,
                       [&](std::size_t i) { result.records[i] = evaluate_point(config, alphas[i]); });
  return result;
}

// ---------------------------------------------------------------------------
// discontinuities

enum class JumpSide : std::uint8_t { single, right_shifting, left_shifting };

inline std::string_view side_name(JumpSide side) {
  switch (side) {
    case JumpSide::single:
      return "single";
    case JumpSide::right_shifting:
      return "right";
    case JumpSide::left_shifting:
      return "left";
  }
  return "unknown";
}

struct Discontinuity {
  double alpha_star = 0.0;
  // where the first and second excited levels swap, linear in the bracket;
  // NaN when the records cannot say
  double alpha_cross = kNaN;
  double lo = 0.0;
  double hi = 0.0;
  double jump = 0.0;  // C1(hi) - C1(lo)
  JumpSide side = JumpSide::single;
  bool at_boundary = false;  // in the first or last grid interval; not refined
  std::vector<double> widths;  // bracket width after each bisection step
};

struct DiscontinuityReport {
  std::vector<Discontinuity> locations;
  std::vector<SweepRecord> evaluated;  // bisection midpoints, for merging into the sweep
};

namespace detail {

inline std::vector<std::size_t> valid_indices(const std::vector<SweepRecord>& records) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].valid()) idx.push_back(i);
  }
  return idx;
}

/// Ground degeneracy and the gap between the first and second excited levels,
/// regrouped from the stored energies (the CSV keeps no ground degeneracy). The
/// two excited levels swap inside a jump bracket, so the gap closes linearly there.
struct ExcitedGap {
  std::size_t d0 = 0;
  double gap = 0.0;
};

inline std::optional<ExcitedGap> excited_gap(const SweepRecord& r) {
  if (r.eigenvalues.empty()) return std::nullopt;
  const auto levels = group_levels(r.eigenvalues, degeneracy_tolerance(r.eigenvalues.front()));
  if (levels.size() < 3 || levels[1].degeneracy != r.d1) return std::nullopt;
  return ExcitedGap{levels[0].degeneracy, levels[2].energy - levels[1].energy};
}

inline double crossing_root(const SweepRecord& lo, const SweepRecord& hi) {
  const auto g_lo = excited_gap(lo);
  const auto g_hi = excited_gap(hi);
  if (!g_lo || !g_hi || g_lo->d0 != g_hi->d0) return kNaN;  // ground level changed too
  if (!(g_lo->gap > 0.0) || !(g_hi->gap > 0.0)) return kNaN;
  return lo.alpha + g_lo->gap / (g_lo->gap + g_hi->gap) * (hi.alpha - lo.alpha);
}

/// A valid record inside (lo, hi), trying the midpoint first and then points
/// off-centre in case the midpoint sits on a level crossing.
inline std::optional<SweepRecord> probe(const SweepConfig& config, double lo, double hi,
                                        std::vector<SweepRecord>& evaluated) {
  for (double t : {0.5, 0.375, 0.625}) {
    SweepRecord rec = evaluate_point(config, lo + t * (hi - lo));
    evaluated.push_back(rec);
    if (rec.valid()) return rec;
  }
  return std::nullopt;
}

}  // namespace detail

/// Jumps of C1 between neighbouring valid records, refined by bisection when
/// resolution > 0. With resolution <= 0 the records are taken as they are.
inline DiscontinuityReport locate_discontinuities(const SweepResult& sw, double jump_threshold,
                                                  double resolution) {
  if (!(jump_threshold > 0.0)) throw ConfigError("jump threshold must be positive");
  DiscontinuityReport report;
  const auto idx = detail::valid_indices(sw.records);
  if (idx.size() < 2) return report;

  struct Seed {
    SweepRecord lo, hi;
    bool boundary;
  };
  std::vector<Seed> seeds;
  for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
    const SweepRecord& a = sw.records[idx[j]];
    const SweepRecord& b = sw.records[idx[j + 1]];
    if (std::abs(b.c1 - a.c1) < jump_threshold) continue;
    const bool boundary = idx[j] == 0 || idx[j + 1] == sw.records.size() - 1;
    seeds.push_back({a, b, boundary});
  }

  std::vector<Discontinuity> found(seeds.size());
  std::vector<std::vector<SweepRecord>> evaluated(seeds.size());
  std::vector<char> keep(seeds.size(), 1);
  detail::parallel_for(seeds.size(), sw.config.threads, [&](std::size_t s) {
    SweepRecord lo = seeds[s].lo;
    SweepRecord hi = seeds[s].hi;
    Discontinuity& d = found[s];
    d.at_boundary = seeds[s].boundary;
    if (!d.at_boundary && resolution > 0.0) {
      while (hi.alpha - lo.alpha > resolution) {
        auto mid = detail::probe(sw.config, lo.alpha, hi.alpha, evaluated[s]);
        if (!mid) break;
        if (std::abs(mid->c1 - lo.c1) > std::abs(hi.c1 - mid->c1)) {
          hi = *mid;
        } else {
          lo = *mid;
        }
        d.widths.push_back(hi.alpha - lo.alpha);
      }
    }
    d.lo = lo.alpha;
    d.hi = hi.alpha;
    d.alpha_star = 0.5 * (lo.alpha + hi.alpha);
    d.alpha_cross = detail::crossing_root(lo, hi);
    d.jump = hi.c1 - lo.c1;
    // A steep but continuous stretch flattens out under refinement.
    if (std::abs(d.jump) < jump_threshold) keep[s] = 0;
  });
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    if (keep[s]) report.locations.push_back(found[s]);
    report.evaluated.insert(report.evaluated.end(), evaluated[s].begin(), evaluated[s].end());
  }
  return report;
}

/// The sweep with extra evaluated points merged in, kept in ascending alpha.
inline SweepResult merge_records(const SweepResult& sw, std::span<const SweepRecord> extra) {
  SweepResult out;
  out.config = sw.config;
  out.records = sw.records;
  out.records.insert(out.records.end(), extra.begin(), extra.end());
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const SweepRecord& a, const SweepRecord& b) { return a.alpha < b.alpha; });
  auto last = std::unique(out.records.begin(), out.records.end(),
                          [](const SweepRecord& a, const SweepRecord& b) { return a.alpha == b.alpha; });
  out.records.erase(last, out.records.end());
  for (const auto& r : out.records) out.alphas.push_back(r.alpha);
  return out;
}

/// Odd rings show two jumps: the lower one drifts right with N, the upper one left.
inline void assign_odd_chain_sides(DiscontinuityReport& report) {
  if (report.locations.size() != 2) return;
  report.locations[0].side = JumpSide::right_shifting;
  report.locations[1].side = JumpSide::left_shifting;
}

enum class Observable : std::uint8_t { C0, C1 };

struct Onset {
  double alpha = 0.0;  // bracket midpoint
  double lo = 0.0;     // last point with a nonzero value
  double hi = 0.0;     // first point where the value is zero
};

/// Points where the chosen concurrence falls from a positive value to exactly zero,
/// refined by bisection to `resolution`.
inline std::vector<Onset> locate_vanishing(const SweepResult& sw, Observable which, double resolution,
                                           double zero_tol = 1e-9) {
  auto value = [which](const SweepRecord& r) { return which == Observable::C0 ? r.c0 : r.c1; };
  std::vector<Onset> onsets;
  const auto idx = detail::valid_indices(sw.records);
  std::vector<SweepRecord> scratch;
  for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
    SweepRecord lo = sw.records[idx[j]];
    SweepRecord hi = sw.records[idx[j + 1]];
    if (!(value(lo) > zero_tol && value(hi) <= zero_tol)) continue;
    while (resolution > 0.0 && hi.alpha - lo.alpha > resolution) {
      auto mid = detail::probe(sw.config, lo.alpha, hi.alpha, scratch);
      if (!mid) break;
      if (value(*mid) > zero_tol) {
        lo = *mid;
      } else {
        hi = *mid;
      }
    }
    onsets.push_back({0.5 * (lo.alpha + hi.alpha), lo.alpha, hi.alpha});
  }
  return onsets;
}

// ---------------------------------------------------------------------------
// energy-level diagrams

/// Quantum numbers that tell levels apart: degeneracy, total spins and the
/// eigenvalue labels of each lattice symmetry generator.
struct LevelSignature {
  std::size_t degeneracy = 0;
  std::vector<double> spins;
  std::vector<std::vector<int>> symmetry;

  bool operator==(const LevelSignature&) const = default;
};

struct LevelPoint {
  double alpha = 0.0;
  std::vector<Level> levels;
  std::vector<LevelSignature> signatures;
  RecordFlag flag = RecordFlag::ok;
  std::string message;
  double gap_difference = kNaN;  // G_ss - G_st, when both gaps are resolvable

  bool valid() const noexcept { return flag == RecordFlag::ok && levels.size() >= 3; }
};

struct LevelCrossing {
  double alpha = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool ambiguous = false;  // bracket could not be refined past a degenerate point
  double gap_difference_lo = kNaN;
  double gap_difference_hi = kNaN;
};

struct LevelDiagram {
  SweepConfig config;
  std::vector<LevelPoint> points;
  std::vector<LevelCrossing> crossings;
};

inline LevelPoint evaluate_levels(const SweepConfig& config, double alpha) {
  LevelPoint pt;
  pt.alpha = alpha;
  try {
    ModelSpec spec = config.model;
    spec.alpha = alpha;
    const HamiltonianOperator h(spec);
    const EigenSolution sol = detail::solve_levels(h, config.k, config.seed);
    const auto generators = symmetry_generators(spec);
    pt.levels = sol.levels;
    for (std::size_t l = 0; l < sol.levels.size(); ++l) {
      const LevelMixture mix = level_mixture(sol, l);
      LevelSignature sig{sol.levels[l].degeneracy, level_spins(mix), {}};
      for (const auto& g : generators) sig.symmetry.push_back(level_symmetry_labels(mix, g));
      pt.signatures.push_back(std::move(sig));
    }
    if (detail::levels_too_close(sol, 2)) pt.flag = RecordFlag::near_crossing;
    try {
      const EnergyGaps g = energy_gaps(sol);
      if (g.singlet_singlet) pt.gap_difference = *g.singlet_singlet - g.singlet_triplet;
    } catch (const ClassificationError&) {
      // no singlet pair among the resolved levels (odd rings, or k too small)
    }
  } catch (const SolverError& e) {
    pt.flag = RecordFlag::solver_error;
    pt.message = e.what();
  } catch (const ClassificationError& e) {
    pt.flag = RecordFlag::solver_error;
    pt.message = e.what();
  }
  return pt;
}

/// Level curves on the grid plus every exchange of the first and second excited
/// levels. Levels are tracked by energy order; an exchange shows up as a change of
/// the first excited level's signature while the ground level keeps its own.
inline LevelDiagram energy_levels(const SweepConfig& config, std::span<const double> alphas,
                                  double resolution) {
  validate(config.model);
  if (config.k < 3) throw ConfigError("energy_levels needs k >= 3");
  LevelDiagram diagram;
  diagram.config = config;
  diagram.points.resize(alphas.size());
  detail::parallel_for(alphas.size(), config.threads,
                       [&](std::size_t i) { diagram.points[i] = evaluate_levels(config, alphas[i]); });

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < diagram.points.size(); ++i) {
    if (diagram.points[i].valid()) idx.push_back(i);
  }
  std::vector<std::pair<LevelPoint, LevelPoint>> seeds;
  for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
    const LevelPoint& a = diagram.points[idx[j]];
    const LevelPoint& b = diagram.points[idx[j + 1]];
    if (a.signatures[0] == b.signatures[0] && !(a.signatures[1] == b.signatures[1])) seeds.emplace_back(a, b);
  }
  diagram.crossings.resize(seeds.size());
  detail::parallel_for(seeds.size(), config.threads, [&](std::size_t s) {
    LevelPoint lo = seeds[s].first;
    LevelPoint hi = seeds[s].second;
    const LevelSignature below = lo.signatures[1];
    LevelCrossing& c = diagram.crossings[s];
    while (resolution > 0.0 && hi.alpha - lo.alpha > resolution) {
      std::optional<LevelPoint> mid;
      for (double t : {0.5, 0.375, 0.625}) {
        LevelPoint p = evaluate_levels(config, lo.alpha + t * (hi.alpha - lo.alpha));
        if (p.valid()) {
          mid = std::move(p);
          break;
        }
      }
      if (!mid) {
        c.ambiguous = true;
        break;
      }
      if (mid->signatures[1] == below) {
        lo = std::move(*mid);
      } else {
        hi = std::move(*mid);
      }
    }
    c.lo = lo.alpha;
    c.hi = hi.alpha;
    c.alpha = 0.5 * (lo.alpha + hi.alpha);
    c.gap_difference_lo = lo.gap_difference;
    c.gap_difference_hi = hi.gap_difference;
  });
  return diagram;
}

// ---------------------------------------------------------------------------
// scaling fits

struct ScalingPoint {
  int n_sites = 0;
  double alpha_star = 0.0;
};

/// F(N) = (p1 N^2 + p2 N + p3) / (N^2 + q1 N + q2); the N -> infinity limit is p1.
struct RationalFit {
  double p1 = 0.0, p2 = 0.0, p3 = 0.0, q1 = 0.0, q2 = 0.0;
  double sse = 0.0;
  std::vector<double> residuals;

  double limit() const noexcept { return p1; }
  double operator()(double n) const { return (p1 * n * n + p2 * n + p3) / (n * n + q1 * n + q2); }
};

struct LogLogFit {
  double beta = 0.0;  // slope of log2|alpha* - alpha_c| against log2 N
  double c = 0.0;     // intercept
  double sse = 0.0;
  std::vector<double> residuals;

  double prefactor() const { return std::exp2(c); }
};

namespace detail {

struct LmOutcome {
  Eigen::Matrix<double, 5, 1> x = Eigen::Matrix<double, 5, 1>::Zero();
  double sse = std::numeric_limits<double>::infinity();
  bool ok = false;
};

inline bool poles_clear(const Eigen::Matrix<double, 5, 1>& x, std::span<const ScalingPoint> pts) {
  for (const auto& p : pts) {
    const double n = p.n_sites;
    if (!(n * n + x[3] * n + x[4] > 1e-8 * n * n)) return false;
  }
  return true;
}

inline double rational_sse(const Eigen::Matrix<double, 5, 1>& x, std::span<const ScalingPoint> pts) {
  double sse = 0.0;
  for (const auto& p : pts) {
    const double n = p.n_sites;
    const double r = (x[0] * n * n + x[1] * n + x[2]) / (n * n + x[3] * n + x[4]) - p.alpha_star;
    sse += r * r;
  }
  return sse;
}

/// Levenberg-Marquardt on the five rational-fit parameters.
inline LmOutcome levenberg_marquardt(Eigen::Matrix<double, 5, 1> x, std::span<const ScalingPoint> pts) {
  const auto m = static_cast<Eigen::Index>(pts.size());
  LmOutcome out;
  if (!poles_clear(x, pts)) return out;
  double sse = rational_sse(x, pts);
  double lambda = 1e-3;
  Eigen::MatrixXd jac(m, 5);
  Eigen::VectorXd res(m);
  for (int iter = 0; iter < 2000; ++iter) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double n = pts[static_cast<std::size_t>(i)].n_sites;
      const double num = x[0] * n * n + x[1] * n + x[2];
      const double den = n * n + x[3] * n + x[4];
      res[i] = num / den - pts[static_cast<std::size_t>(i)].alpha_star;
      jac(i, 0) = n * n / den;
      jac(i, 1) = n / den;
      jac(i, 2) = 1.0 / den;
      jac(i, 3) = -num * n / (den * den);
      jac(i, 4) = -num / (den * den);
    }
    const Eigen::Matrix<double, 5, 5> jtj = jac.transpose() * jac;
    const Eigen::Matrix<double, 5, 1> grad = jac.transpose() * res;
    if (grad.norm() < 1e-30 || sse < 1e-32) break;
    bool improved = false;
    while (lambda < 1e16) {
      Eigen::Matrix<double, 5, 5> a = jtj;
      for (int d = 0; d < 5; ++d) a(d, d) += lambda * std::max(jtj(d, d), 1e-30);
      const Eigen::Matrix<double, 5, 1> step = a.ldlt().solve(-grad);
      const Eigen::Matrix<double, 5, 1> trial = x + step;
      if (step.allFinite() && poles_clear(trial, pts)) {
        const double s = rational_sse(trial, pts);
        if (s < sse) {
          const bool tiny = step.norm() <= 1e-15 * (1.0 + x.norm());
          x = trial;
          sse = s;
          lambda = std::max(lambda / 10.0, 1e-12);
          improved = !tiny;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  out.x = x;
  out.sse = sse;
  out.ok = std::isfinite(sse);
  return out;
}

}  // namespace detail

/// Least-squares (2,2) rational fit. Starts from p1 = last alpha*, the rest 0.5,
/// then from 20 seeded random perturbations and from the solution of the
/// denominator-cleared linear problem; the lowest SSE wins.
inline RationalFit fit_rational_22(std::span<const ScalingPoint> points, std::uint64_t seed = 7) {
  if (points.size() < 5) {
    throw FitError("rational fit needs at least 5 points (5 parameters), got " +
                   std::to_string(points.size()));
  }
  using Vec5 = Eigen::Matrix<double, 5, 1>;
  std::vector<Vec5> starts;
  const double last = points.back().alpha_star;
  starts.push_back((Vec5() << last, 0.5, 0.5, 0.5, 0.5).finished());

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int r = 0; r < 20; ++r) {
    Vec5 x;
    x << last * (1.0 + 0.05 * unit(rng)), 0.5 + 2.0 * unit(rng), 0.5 + 2.0 * unit(rng), 0.5 + 2.0 * unit(rng),
        0.5 + 2.0 * unit(rng);
    starts.push_back(x);
  }
  {
    // a (N^2 + q1 N + q2) = p1 N^2 + p2 N + p3 is linear in the parameters
    const auto m = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd a(m, 5);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double n = points[static_cast<std::size_t>(i)].n_sites;
      const double y = points[static_cast<std::size_t>(i)].alpha_star;
      a.row(i) << n * n, n, 1.0, -y * n, -y;
      b[i] = y * n * n;
    }
    const Vec5 lin = a.colPivHouseholderQr().solve(b);
    if (lin.allFinite()) starts.push_back(lin);
  }

  detail::LmOutcome best;
  std::string trace;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const auto out = detail::levenberg_marquardt(starts[s], points);
    trace += " start" + std::to_string(s) + ":" + (out.ok ? std::to_string(out.sse) : "rejected");
    if (out.ok && out.sse < best.sse) best = out;
  }
  if (!best.ok) throw FitError("rational fit did not converge from any start; residual trace:" + trace);

  RationalFit fit{best.x[0], best.x[1], best.x[2], best.x[3], best.x[4], best.sse, {}};
  for (const auto& p : points) fit.residuals.push_back(fit(p.n_sites) - p.alpha_star);
  return fit;
}

enum class Approach : std::uint8_t { from_above, from_below };

/// Straight line through (log2 N, log2 |alpha* - alpha_c|). Every point must lie
/// strictly on the side of alpha_c named by `approach`.
inline LogLogFit fit_loglog(std::span<const ScalingPoint> points, double alpha_c,
                            Approach approach = Approach::from_above) {
  if (points.size() < 3) {
    throw FitError("log-log fit needs at least 3 points, got " + std::to_string(points.size()));
  }
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    const double diff = approach == Approach::from_above ? p.alpha_star - alpha_c : alpha_c - p.alpha_star;
    if (!(diff > 0.0)) {
      throw DomainError("log-log fit: point N=" + std::to_string(p.n_sites) + " alpha*=" +
                        std::to_string(p.alpha_star) + " is not " +
                        (approach == Approach::from_above ? "above" : "below") +
                        " alpha_c=" + std::to_string(alpha_c));
    }
    a(i, 0) = std::log2(static_cast<double>(p.n_sites));
    a(i, 1) = 1.0;
    y[i] = std::log2(diff);
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(y);
  LogLogFit fit;
  fit.beta = coef[0];
  fit.c = coef[1];
  const Eigen::VectorXd r = a * coef - y;
  fit.residuals.assign(r.data(), r.data() + r.size());
  fit.sse = r.squaredNorm();
  return fit;
}

}  // namespace spinent
