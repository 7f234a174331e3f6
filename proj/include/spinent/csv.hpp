#pragma once

// Locale-independent CSV for sweep records and level diagrams. Numbers carry 12
// significant digits; lines end in LF.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "spinent/analysis.hpp"
#include "spinent/errors.hpp"

namespace spinent::csv {

inline constexpr int kSignificantDigits = 12;

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, kSignificantDigits);
  return std::string(buf, res.ptr);
}

inline double parse_number(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw DataError("csv: not a number: '" + std::string(text) + "'");
  }
  return x;
}

/// Spin labels of one level: a single value when uniform, else all members joined by '/'.
inline std::string format_spins(const std::vector<double>& spins) {
  if (spins.empty()) return "nan";
  bool uniform = true;
  for (double s : spins) uniform = uniform && s == spins.front();
  if (uniform) return format_number(spins.front());
  std::string out;
  for (std::size_t i = 0; i < spins.size(); ++i) {
    if (i) out += '/';
    out += format_number(spins[i]);
  }
  return out;
}

inline std::vector<double> parse_spins(std::string_view text) {
  std::vector<double> spins;
  if (text == "nan") return spins;
  std::size_t start = 0;
  while (true) {
    const std::size_t slash = text.find('/', start);
    spins.push_back(parse_number(text.substr(start, slash - start)));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return spins;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

/// Header `alpha,E0,...,E{k-1},d1,S0,S1,C0,C1,flag` and one row per record.
inline void write_sweep(std::ostream& os, const SweepResult& sw) {
  const std::size_t k = sw.config.k;
  os << "alpha";
  for (std::size_t i = 0; i < k; ++i) os << ",E" << i;
  os << ",d1,S0,S1,C0,C1,flag\n";
  for (const SweepRecord& r : sw.records) {
    os << format_number(r.alpha);
    for (std::size_t i = 0; i < k; ++i) {
      os << ',' << format_number(i < r.eigenvalues.size() ? r.eigenvalues[i] : std::nan(""));
    }
    os << ',' << std::to_string(r.d1) << ',' << format_spins(r.spins0) << ',' << format_spins(r.spins1) << ','
       << format_number(r.c0) << ',' << format_number(r.c1) << ',' << flag_name(r.flag) << '\n';
  }
}

inline std::string sweep_to_string(const SweepResult& sw) {
  std::ostringstream os;
  write_sweep(os, sw);
  return os.str();
}

/// Inverse of write_sweep. The model is not part of the file; `config` supplies it.
inline SweepResult read_sweep(std::istream& is, const SweepConfig& config = {}) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("csv: empty input");
  const auto header = split(line);
  if (header.size() < 7 || header.front() != "alpha") throw DataError("csv: unrecognised header");
  const std::size_t k = header.size() - 7;
  for (std::size_t i = 0; i < k; ++i) {
    if (header[1 + i] != "E" + std::to_string(i)) throw DataError("csv: unexpected column " + std::string(header[1 + i]));
  }
  SweepResult sw;
  sw.config = config;
  sw.config.k = k;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) throw DataError("csv: wrong field count on line " + std::to_string(line_no));
    SweepRecord r;
    r.alpha = parse_number(f[0]);
    for (std::size_t i = 0; i < k; ++i) {
      const double e = parse_number(f[1 + i]);
      if (!std::isnan(e)) r.eigenvalues.push_back(e);
    }
    r.d1 = static_cast<std::size_t>(parse_number(f[1 + k]));
    r.spins0 = parse_spins(f[2 + k]);
    r.spins1 = parse_spins(f[3 + k]);
    r.c0 = parse_number(f[4 + k]);
    r.c1 = parse_number(f[5 + k]);
    r.flag = parse_flag(f[6 + k]);
    sw.alphas.push_back(r.alpha);
    sw.records.push_back(std::move(r));
  }
  return sw;
}

inline SweepResult sweep_from_string(const std::string& text, const SweepConfig& config = {}) {
  std::istringstream is(text);
  return read_sweep(is, config);
}

/// Level curves: `alpha,L0,...,L{m-1},D0,...,D{m-1},flag`, m the largest level count seen.
inline void write_levels(std::ostream& os, const LevelDiagram& diagram) {
  std::size_t m = 0;
  for (const auto& p : diagram.points) m = std::max(m, p.levels.size());
  os << "alpha";
  for (std::size_t i = 0; i < m; ++i) os << ",L" << i;
  for (std::size_t i = 0; i < m; ++i) os << ",D" << i;
  os << ",flag\n";
  for (const auto& p : diagram.points) {
    os << format_number(p.alpha);
    for (std::size_t i = 0; i < m; ++i) {
      os << ',' << format_number(i < p.levels.size() ? p.levels[i].energy : std::nan(""));
    }
    for (std::size_t i = 0; i < m; ++i) {
      os << ',' << std::to_string(i < p.levels.size() ? p.levels[i].degeneracy : std::size_t{0});
    }
    os << ',' << flag_name(p.flag) << '\n';
  }
}

/// Crossing list: `alpha,lo,hi,ambiguous,gap_diff_lo,gap_diff_hi`.
inline void write_crossings(std::ostream& os, const LevelDiagram& diagram) {
  os << "alpha,lo,hi,ambiguous,gap_diff_lo,gap_diff_hi\n";
  for (const auto& c : diagram.crossings) {
    os << format_number(c.alpha) << ',' << format_number(c.lo) << ',' << format_number(c.hi) << ','
       << (c.ambiguous ? 1 : 0) << ',' << format_number(c.gap_difference_lo) << ','
       << format_number(c.gap_difference_hi) << '\n';
  }
}

}  // namespace spinent::csv
