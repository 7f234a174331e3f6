#pragma once

// Finite-size scaling of the located concurrence jumps: per-size tables, the
// rational extrapolation and the three log-log series.

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spinent/analysis.hpp"
#include "spinent/csv.hpp"
#include "spinent/errors.hpp"

namespace spinent {

/// Default first-excited jump threshold. Odd rings show lower jumps of 0.012 to
/// 0.018, so the threshold sits well below those and far above solver noise.
inline constexpr double kDefaultJumpThreshold = 0.005;
inline constexpr double kDefaultResolution = 1e-5;

/// A sweep with every bisection evaluation merged in, ready for serialization.
inline SweepResult refined_sweep(const SweepConfig& config, std::span<const double> alphas,
                                 double jump_threshold, double resolution) {
  const SweepResult coarse = sweep(config, alphas);
  const DiscontinuityReport report = locate_discontinuities(coarse, jump_threshold, resolution);
  return merge_records(coarse, report.evaluated);
}

/// Jumps read off the records as stored in CSV: the sweep is serialized and parsed
/// back first, so a file and a live run give identical answers.
inline std::vector<Discontinuity> jumps_from_records(const SweepResult& sw, double jump_threshold) {
  const SweepResult parsed = csv::sweep_from_string(csv::sweep_to_string(sw), sw.config);
  return locate_discontinuities(parsed, jump_threshold, 0.0).locations;
}

struct SizeSweep {
  int n_sites = 0;
  SweepResult sweep;
};

struct TableRow {
  int n_sites = 0;
  JumpSide side = JumpSide::single;
  double alpha_star = 0.0;
  double alpha_cross = 0.0;  // falls back to alpha_star
  double jump = 0.0;
};

struct ScalingReport {
  std::vector<TableRow> table;
  std::optional<RationalFit> rational;
  double alpha_c = std::numeric_limits<double>::quiet_NaN();
  std::optional<LogLogFit> even;
  std::optional<LogLogFit> odd_right;
  std::optional<LogLogFit> odd_left;
};

/// Even rings must show one jump and odd rings two. The even series needs at least
/// five sizes for the rational fit. Its limit is the alpha_c of the log-log fits
/// unless one is given. Positions are the level-crossing estimates; the bracket
/// midpoint alone moves the extrapolated limit by ~1e-3.
inline ScalingReport scaling_report(std::span<const SizeSweep> sweeps, double jump_threshold,
                                    std::optional<double> alpha_c = std::nullopt) {
  ScalingReport report;
  std::vector<ScalingPoint> even, right, left;
  for (const SizeSweep& s : sweeps) {
    auto jumps = jumps_from_records(s.sweep, jump_threshold);
    std::erase_if(jumps, [](const Discontinuity& d) { return d.at_boundary; });
    const bool odd = s.n_sites % 2 != 0;
    const std::size_t expected = odd ? 2 : 1;
    if (jumps.size() != expected) {
      throw FitError("N=" + std::to_string(s.n_sites) + ": expected " + std::to_string(expected) +
                     " concurrence jump(s), found " + std::to_string(jumps.size()));
    }
    if (odd) {
      DiscontinuityReport r{jumps, {}};
      assign_odd_chain_sides(r);
      jumps = r.locations;
    }
    for (const Discontinuity& d : jumps) {
      const double at = std::isfinite(d.alpha_cross) ? d.alpha_cross : d.alpha_star;
      report.table.push_back({s.n_sites, d.side, d.alpha_star, at, d.jump});
      const ScalingPoint p{s.n_sites, at};
      if (d.side == JumpSide::single) even.push_back(p);
      if (d.side == JumpSide::right_shifting) right.push_back(p);
      if (d.side == JumpSide::left_shifting) left.push_back(p);
    }
  }
  if (even.size() < 5) {
    throw FitError("scaling needs at least 5 even-N sizes for the rational fit, got " +
                   std::to_string(even.size()));
  }
  report.rational = fit_rational_22(even);
  report.alpha_c = alpha_c ? *alpha_c : report.rational->limit();
  if (!std::isfinite(report.alpha_c)) throw FitError("alpha_c is not finite");
  report.even = fit_loglog(even, report.alpha_c, Approach::from_above);
  if (!right.empty() || !left.empty()) {
    report.odd_right = fit_loglog(right, report.alpha_c, Approach::from_below);
    report.odd_left = fit_loglog(left, report.alpha_c, Approach::from_above);
  }
  return report;
}

inline void write_report_text(std::ostream& os, const ScalingReport& r) {
  using csv::format_number;
  os << "N     side    alpha*          crossing        jump\n";
  for (const auto& row : r.table) {
    std::string n = std::to_string(row.n_sites);
    std::string side(side_name(row.side));
    n.resize(6, ' ');
    side.resize(8, ' ');
    std::string a = format_number(row.alpha_star);
    std::string x = format_number(row.alpha_cross);
    a.resize(16, ' ');
    x.resize(16, ' ');
    os << n << side << a << x << format_number(row.jump) << '\n';
  }
  if (r.rational) {
    const auto& f = *r.rational;
    os << "rational fit: p1=" << format_number(f.p1) << " p2=" << format_number(f.p2)
       << " p3=" << format_number(f.p3) << " q1=" << format_number(f.q1) << " q2=" << format_number(f.q2)
       << " sse=" << format_number(f.sse) << '\n';
    os << "alpha_c=" << format_number(r.alpha_c) << '\n';
  }
  auto line = [&os](const char* name, const std::optional<LogLogFit>& f) {
    if (!f) return;
    os << name << ": beta=" << format_number(f->beta) << " c=" << format_number(f->c)
       << " prefactor=" << format_number(f->prefactor()) << " sse=" << format_number(f->sse) << '\n';
  };
  line("even", r.even);
  line("odd right", r.odd_right);
  line("odd left", r.odd_left);
}

/// Long format: `quantity,series,n,value`.
inline void write_report_csv(std::ostream& os, const ScalingReport& r) {
  using csv::format_number;
  os << "quantity,series,n,value\n";
  for (const auto& row : r.table) {
    os << "alpha_star," << side_name(row.side) << ',' << std::to_string(row.n_sites) << ',' << format_number(row.alpha_star) << '\n';
    os << "alpha_cross," << side_name(row.side) << ',' << std::to_string(row.n_sites) << ',' << format_number(row.alpha_cross) << '\n';
    os << "jump," << side_name(row.side) << ',' << std::to_string(row.n_sites) << ',' << format_number(row.jump) << '\n';
  }
  if (r.rational) {
    const auto& f = *r.rational;
    for (auto [name, v] : {std::pair{"p1", f.p1}, std::pair{"p2", f.p2}, std::pair{"p3", f.p3},
                           std::pair{"q1", f.q1}, std::pair{"q2", f.q2}, std::pair{"sse", f.sse}}) {
      os << name << ",rational,," << format_number(v) << '\n';
    }
    os << "alpha_c,rational,," << format_number(r.alpha_c) << '\n';
  }
  auto rows = [&os](const char* series, const std::optional<LogLogFit>& f) {
    if (!f) return;
    os << "beta," << series << ",," << format_number(f->beta) << '\n';
    os << "c," << series << ",," << format_number(f->c) << '\n';
    os << "sse," << series << ",," << format_number(f->sse) << '\n';
  };
  rows("even", r.even);
  rows("right", r.odd_right);
  rows("left", r.odd_left);
}

}  // namespace spinent
