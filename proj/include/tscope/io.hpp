/**
 * @file io.hpp
 * @brief CSV emission helpers. All floating-point values are written with 17
 *        significant digits so a re-parse recovers the exact binary64 bits.
 */
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tscope/core.hpp"

namespace tscope {

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  return os;
}

/// Trajectory CSV: header `t,x1..xn,v,delta_v`, one row per step. The last row
/// has no delta and leaves the field empty.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  const std::size_t n = tr.states.empty() ? 0 : tr.states.front().size();
  os << "t";
  for (std::size_t i = 1; i <= n; ++i) os << ",x" << i;
  os << ",v,delta_v\n";
  for (std::size_t t = 0; t < tr.states.size(); ++t) {
    os << t;
    for (std::size_t i = 0; i < n; ++i) os << ',' << fmt_g17(tr.states[t][i]);
    os << ',' << fmt_g17(tr.observable_values[t]) << ',';
    if (t < tr.deltas.size()) os << fmt_g17(tr.deltas[t]);
    os << '\n';
  }
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& tr) {
  auto os = open_out(path);
  write_trajectory_csv(os, tr);
}

template <typename EscapeProfileT>
void write_escape_csv(std::ostream& os, const EscapeProfileT& prof) {
  os << "radius,escape_sup\n";
  for (std::size_t i = 0; i < prof.radii.size(); ++i)
    os << fmt_g17(prof.radii[i]) << ',' << fmt_g17(prof.escape_sup[i]) << '\n';
}

template <typename HoneymoonRowT>
void write_honeymoon_csv(std::ostream& os, const std::vector<HoneymoonRowT>& rows) {
  os << "epsilon,status,time\n";
  for (const auto& row : rows) {
    os << fmt_g17(row.epsilon) << ',' << to_string(row.result.status) << ',';
    if (row.result.status == TransientStatus::Finite) os << row.result.time;
    os << '\n';
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace tscope
