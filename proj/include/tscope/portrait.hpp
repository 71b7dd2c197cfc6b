/**
 * @file portrait.hpp
 * @brief Augmented phase portraits for planar maps: nullclines and
 *        next-iterate root curves traced by cell-edge sign changes with
 *        bisection refinement, per-cell operator sign fields, direction
 *        fields, and the CSV/SVG export.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tscope/core.hpp"
#include "tscope/io.hpp"
#include "tscope/svg.hpp"

namespace tscope {

using Polyline = std::vector<std::array<double, 2>>;

struct LabeledCurve {
  std::string id;
  Polyline points;
};

struct SignCell {
  std::size_t i = 0, j = 0;   // cell indices
  double cx = 0.0, cy = 0.0;  // cell center
  int sign_l = 1, sign_j = 1; // operator signs at the center (>= 0 maps to +1)
};

struct ArrowNode {
  double x = 0.0, y = 0.0;
  double dx = 0.0, dy = 0.0;  // raw one-step increments
  int sx = 1, sy = 1;         // display signs, zero treated as positive
};

struct PortraitData {
  Box region;
  std::array<std::size_t, 2> grid{2, 2};
  std::vector<LabeledCurve> nullclines;
  std::vector<LabeledCurve> root_curves;
  std::vector<SignCell> sign_field;
  std::vector<ArrowNode> direction_field;
  std::vector<LabeledCurve> guard_curves;
};

namespace detail {

struct Segment {
  std::array<double, 2> a, b;
};

inline std::array<double, 2> bisect_edge(const std::function<double(double, double)>& field,
                                         std::array<double, 2> p, double fp,
                                         std::array<double, 2> q, double fq) {
  // Invariant: field changes sign (or hits zero) between p and q.
  for (int it = 0; it < 60; ++it) {
    const std::array<double, 2> m{0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])};
    const double fm = field(m[0], m[1]);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fp < 0.0)) {
      p = m;
      fp = fm;
    } else {
      q = m;
      fq = fm;
    }
  }
  (void)fq;
  return {0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])};
}

inline std::vector<Polyline> link_segments(std::vector<Segment> segs, double quantum) {
  auto key = [quantum](const std::array<double, 2>& p) {
    return std::pair<long long, long long>(static_cast<long long>(std::llround(p[0] / quantum)),
                                           static_cast<long long>(std::llround(p[1] / quantum)));
  };
  // A crossing that lands exactly on a grid node can be emitted by several
  // cells; drop duplicate and zero-length segments before chaining.
  {
    using K = std::pair<std::pair<long long, long long>, std::pair<long long, long long>>;
    std::vector<std::pair<K, Segment>> keyed;
    keyed.reserve(segs.size());
    for (const Segment& s : segs) {
      const auto ka = key(s.a), kb = key(s.b);
      if (ka == kb) continue;
      keyed.emplace_back(ka < kb ? K{ka, kb} : K{kb, ka}, s);
    }
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    segs.clear();
    for (std::size_t i = 0; i < keyed.size(); ++i) {
      if (i > 0 && keyed[i].first == keyed[i - 1].first) continue;
      segs.push_back(keyed[i].second);
    }
  }
  std::multimap<std::pair<long long, long long>, std::size_t> by_end;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    by_end.emplace(key(segs[s].a), s);
    by_end.emplace(key(segs[s].b), s);
  }
  std::vector<bool> used(segs.size(), false);
  std::vector<Polyline> out;
  for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
    if (used[s0]) continue;
    used[s0] = true;
    Polyline line{segs[s0].a, segs[s0].b};
    for (int dir = 0; dir < 2; ++dir) {
      bool extended = true;
      while (extended) {
        extended = false;
        const std::array<double, 2>& tip = dir == 0 ? line.back() : line.front();
        auto range = by_end.equal_range(key(tip));
        for (auto it = range.first; it != range.second; ++it) {
          const std::size_t s = it->second;
          if (used[s]) continue;
          const bool tip_is_a =
              key(segs[s].a) == key(tip);
          const std::array<double, 2>& next = tip_is_a ? segs[s].b : segs[s].a;
          used[s] = true;
          if (dir == 0)
            line.push_back(next);
          else
            line.insert(line.begin(), next);
          extended = true;
          break;
        }
      }
    }
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace detail

/// Traces the zero set of a scalar field over a rectangular grid: cell-edge
/// sign changes localized by bisection (<= 60 halvings) and linked into
/// polylines. Edges along which the field is identically zero are emitted as
/// segments themselves. Cells touching non-finite nodes are masked out.
inline std::vector<Polyline> trace_zero_set(const std::function<double(double, double)>& field,
                                            const Box& region,
                                            std::array<std::size_t, 2> grid) {
  const std::size_t nx = std::max<std::size_t>(grid[0], 2);
  const std::size_t ny = std::max<std::size_t>(grid[1], 2);
  const double x0 = region.lo[0], x1 = region.hi[0];
  const double y0 = region.lo[1], y1 = region.hi[1];
  auto gx = [&](std::size_t i) { return x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(nx - 1); };
  auto gy = [&](std::size_t j) { return y0 + (y1 - y0) * static_cast<double>(j) / static_cast<double>(ny - 1); };

  std::vector<double> val(nx * ny);
  std::vector<char> ok(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double v = field(gx(i), gy(j));
      val[j * nx + i] = v;
      ok[j * nx + i] = std::isfinite(v) ? 1 : 0;
    }
  }

  std::vector<detail::Segment> segs;
  auto crossing = [&](std::size_t ia, std::size_t ja, std::size_t ib, std::size_t jb,
                      std::array<double, 2>* out) -> bool {
    const double va = val[ja * nx + ia], vb = val[jb * nx + ib];
    if (va == 0.0 && vb == 0.0) return false;  // handled by the degenerate rule
    if ((va < 0.0) == (vb < 0.0)) return false;
    *out = detail::bisect_edge(field, {gx(ia), gy(ja)}, va, {gx(ib), gy(jb)}, vb);
    return true;
  };

  for (std::size_t j = 0; j + 1 < ny; ++j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      if (!(ok[j * nx + i] && ok[j * nx + i + 1] && ok[(j + 1) * nx + i] &&
            ok[(j + 1) * nx + i + 1]))
        continue;

      // Degenerate: whole edge identically zero (bottom and left of each cell,
      // plus the far edges on the boundary rows/columns).
      auto edge_zero = [&](std::size_t ia, std::size_t ja, std::size_t ib, std::size_t jb) {
        if (val[ja * nx + ia] == 0.0 && val[jb * nx + ib] == 0.0)
          segs.push_back({{gx(ia), gy(ja)}, {gx(ib), gy(jb)}});
      };
      edge_zero(i, j, i + 1, j);
      edge_zero(i, j, i, j + 1);
      if (j + 2 == ny) edge_zero(i, j + 1, i + 1, j + 1);
      if (i + 2 == nx) edge_zero(i + 1, j, i + 1, j + 1);

      std::array<double, 2> pts[4];
      int count = 0;
      int edges[4];
      std::array<double, 2> p;
      if (crossing(i, j, i + 1, j, &p)) { pts[count] = p; edges[count++] = 0; }          // bottom
      if (crossing(i + 1, j, i + 1, j + 1, &p)) { pts[count] = p; edges[count++] = 1; }  // right
      if (crossing(i, j + 1, i + 1, j + 1, &p)) { pts[count] = p; edges[count++] = 2; }  // top
      if (crossing(i, j, i, j + 1, &p)) { pts[count] = p; edges[count++] = 3; }          // left

      if (count == 2) {
        segs.push_back({pts[0], pts[1]});
      } else if (count == 4) {
        // Saddle cell: orient by the center sign so segments do not cross.
        const double fc = field(0.5 * (gx(i) + gx(i + 1)), 0.5 * (gy(j) + gy(j + 1)));
        const double vbl = val[j * nx + i];
        const bool same = (fc < 0.0) == (vbl < 0.0);
        if (same) {
          segs.push_back({pts[0], pts[1]});  // bottom-right
          segs.push_back({pts[2], pts[3]});  // top-left
        } else {
          segs.push_back({pts[0], pts[3]});  // bottom-left
          segs.push_back({pts[1], pts[2]});  // top-right
        }
      }
      (void)edges;
    }
  }

  const double quantum = 1e-9 * std::max(std::fabs(x1 - x0), std::fabs(y1 - y0)) + 1e-300;
  return detail::link_segments(std::move(segs), quantum);
}

enum class NullclineKind { PreyN, PredatorD, SusceptibleH, InfectedLine };

namespace detail {

inline double param(const MapSystem& map, const std::string& key) {
  auto it = map.params.find(key);
  if (it == map.params.end())
    throw std::invalid_argument("map '" + map.name + "' lacks parameter '" + key + "'");
  return it->second;
}

}  // namespace detail

/// Signed next-iterate operator associated with a nullcline: positive means
/// the next iterate lies above (PreyN, SusceptibleH) or right of (PredatorD,
/// InfectedLine) the associated nullcline.
inline double next_iterate_operator(const MapSystem& map, NullclineKind kind, const State& pt) {
  State nxt(map.dim);
  map.eval(pt, nxt);
  if (!all_finite(nxt)) throw NonFiniteError("next_iterate_operator: map evaluation failed", 1);
  switch (kind) {
    case NullclineKind::PreyN: {
      // L(x, y) = y1 - N(x1) written in the expanded closed form.
      const double r = detail::param(map, "r"), k = detail::param(map, "K");
      const double al = detail::param(map, "alpha"), ga = detail::param(map, "gamma");
      const double d = detail::param(map, "d");
      const double x = pt[0], y = pt[1];
      return (1.0 + ga * x) * y / (1.0 + d) +
             r * (1.0 + r) * x / (al * k * (1.0 + (r / k) * x + al * y)) - r / al;
    }
    case NullclineKind::PredatorD: {
      const double ga = detail::param(map, "gamma"), d = detail::param(map, "d");
      return nxt[0] - d / ga;  // J(x, y) = x1 - D
    }
    case NullclineKind::SusceptibleH: {
      const double b = detail::param(map, "b"), p = detail::param(map, "p");
      const double al = detail::param(map, "alpha");
      return nxt[1] - (b - p * nxt[0]) / (al * nxt[0]);  // I1 - h(S1)
    }
    case NullclineKind::InfectedLine: {
      const double al = detail::param(map, "alpha");
      return nxt[0] - 1.0 / al;  // S1 - 1/alpha
    }
  }
  throw std::logic_error("unknown nullcline kind");
}

/// The two next-iterate operators drawn in a model's augmented portrait, in
/// (L, J) order. Empty when the model has no registered operators.
inline std::vector<NullclineKind> portrait_operators(const MapSystem& map) {
  if (map.name == "streipert_pp") return {NullclineKind::PreyN, NullclineKind::PredatorD};
  if (map.name == "epidemic") return {NullclineKind::SusceptibleH, NullclineKind::InfectedLine};
  return {};
}

/// sign(dx), sign(dy) of one map step at each grid node. Zero increments are
/// displayed as positive; the raw values stay in the data.
inline std::vector<ArrowNode> direction_field(const MapSystem& map, const Box& region,
                                              std::array<std::size_t, 2> grid) {
  const std::size_t nx = std::max<std::size_t>(grid[0], 2);
  const std::size_t ny = std::max<std::size_t>(grid[1], 2);
  std::vector<ArrowNode> out;
  State x(2), nxt(2);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      ArrowNode node;
      node.x = region.lo[0] + (region.hi[0] - region.lo[0]) * static_cast<double>(i) /
                                  static_cast<double>(nx - 1);
      node.y = region.lo[1] + (region.hi[1] - region.lo[1]) * static_cast<double>(j) /
                                  static_cast<double>(ny - 1);
      x[0] = node.x;
      x[1] = node.y;
      map.eval(x, nxt);
      if (!all_finite(nxt)) continue;
      node.dx = nxt[0] - x[0];
      node.dy = nxt[1] - x[1];
      node.sx = node.dx >= 0.0 ? 1 : -1;
      node.sy = node.dy >= 0.0 ? 1 : -1;
      out.push_back(node);
    }
  }
  return out;
}

/// Builds the full augmented portrait of a planar map over a region:
/// component nullclines, next-iterate root curves and signs when the model has
/// registered operators, the direction field, and the epidemic guard curve
/// above which the susceptible count would turn negative.
inline PortraitData compute_portrait(const MapSystem& map, Box region,
                                     std::array<std::size_t, 2> grid,
                                     std::array<std::size_t, 2> coarse = {24, 18}) {
  if (map.dim != 2) throw std::invalid_argument("portrait requires a planar map (n = 2)");
  if (map.name == "epidemic") {
    // The susceptible nullcline has a pole at S = 0.
    const double b = detail::param(map, "b"), p = detail::param(map, "p");
    if (p > 0.0) region.lo[0] = std::max(region.lo[0], 1e-6 * (b / p));
  }

  PortraitData data;
  data.region = region;
  data.grid = grid;

  auto dxf = [&](double x, double y) {
    State s{x, y}, n2(2);
    map.eval(s, n2);
    return all_finite(n2) ? n2[0] - x : std::nan("");
  };
  auto dyf = [&](double x, double y) {
    State s{x, y}, n2(2);
    map.eval(s, n2);
    return all_finite(n2) ? n2[1] - y : std::nan("");
  };
  int cid = 0;
  for (auto& pl : trace_zero_set(dxf, region, grid))
    data.nullclines.push_back({"nullcline_x_" + std::to_string(cid++), std::move(pl)});
  cid = 0;
  for (auto& pl : trace_zero_set(dyf, region, grid))
    data.nullclines.push_back({"nullcline_y_" + std::to_string(cid++), std::move(pl)});

  const std::vector<NullclineKind> ops = portrait_operators(map);
  if (ops.size() == 2) {
    const char* names[2] = {"root_L", "root_J"};
    for (int k = 0; k < 2; ++k) {
      auto opf = [&, k](double x, double y) {
        State s{x, y};
        try {
          return next_iterate_operator(map, ops[static_cast<std::size_t>(k)], s);
        } catch (const NonFiniteError&) {
          return std::nan("");
        }
      };
      cid = 0;
      for (auto& pl : trace_zero_set(opf, region, grid))
        data.root_curves.push_back({std::string(names[k]) + "_" + std::to_string(cid++), std::move(pl)});
    }

    // Operator signs at the centers of a coarse display grid.
    const std::size_t cx = std::max<std::size_t>(coarse[0], 1);
    const std::size_t cy = std::max<std::size_t>(coarse[1], 1);
    for (std::size_t j = 0; j < cy; ++j) {
      for (std::size_t i = 0; i < cx; ++i) {
        SignCell cell;
        cell.i = i;
        cell.j = j;
        cell.cx = region.lo[0] + (region.hi[0] - region.lo[0]) * (static_cast<double>(i) + 0.5) /
                                     static_cast<double>(cx);
        cell.cy = region.lo[1] + (region.hi[1] - region.lo[1]) * (static_cast<double>(j) + 0.5) /
                                     static_cast<double>(cy);
        State c{cell.cx, cell.cy};
        try {
          cell.sign_l = next_iterate_operator(map, ops[0], c) >= 0.0 ? 1 : -1;
          cell.sign_j = next_iterate_operator(map, ops[1], c) >= 0.0 ? 1 : -1;
        } catch (const NonFiniteError&) {
          continue;
        }
        data.sign_field.push_back(cell);
      }
    }
  }

  data.direction_field = direction_field(map, region, {16, 12});

  if (map.name == "epidemic") {
    const double b = detail::param(map, "b"), p = detail::param(map, "p");
    const double al = detail::param(map, "alpha");
    auto guard = [&](double s, double i) { return (1.0 - p) * s - al * s * i + b; };
    cid = 0;
    for (auto& pl : trace_zero_set(guard, region, grid))
      data.guard_curves.push_back({"guard_g_" + std::to_string(cid++), std::move(pl)});
  }
  return data;
}

/// Writes `<base>.nullclines.csv`, `<base>.rootcurves.csv`, `<base>.signs.csv`,
/// `<base>.arrows.csv` and a self-contained `<base>.svg` overlay with legend.
/// The SVG maps the region linearly onto a 800x600 viewport.
inline void export_portrait(const PortraitData& data, const std::string& basename) {
  {
    auto os = open_out(basename + ".nullclines.csv");
    os << "curve_id,x,y\n";
    for (const auto& c : data.nullclines)
      for (const auto& p : c.points) os << c.id << ',' << fmt_g17(p[0]) << ',' << fmt_g17(p[1]) << '\n';
  }
  {
    auto os = open_out(basename + ".rootcurves.csv");
    os << "curve_id,x,y\n";
    for (const auto& c : data.root_curves)
      for (const auto& p : c.points) os << c.id << ',' << fmt_g17(p[0]) << ',' << fmt_g17(p[1]) << '\n';
  }
  {
    auto os = open_out(basename + ".signs.csv");
    os << "i,j,cx,cy,sign_L,sign_J\n";
    for (const auto& s : data.sign_field)
      os << s.i << ',' << s.j << ',' << fmt_g17(s.cx) << ',' << fmt_g17(s.cy) << ','
         << (s.sign_l > 0 ? "+1" : "-1") << ',' << (s.sign_j > 0 ? "+1" : "-1") << '\n';
  }
  {
    auto os = open_out(basename + ".arrows.csv");
    os << "x,y,sx,sy\n";
    for (const auto& a : data.direction_field)
      os << fmt_g17(a.x) << ',' << fmt_g17(a.y) << ',' << a.sx << ',' << a.sy << '\n';
  }

  SvgCanvas canvas(data.region.lo[0], data.region.hi[0], data.region.lo[1], data.region.hi[1]);
  canvas.axes("x", "y");
  const SvgStyle null_x{"#d62728", 1.6, "7,4"};
  const SvgStyle null_y{"#1f77b4", 1.6, "7,4"};
  const SvgStyle root_l{"#d62728", 1.6, ""};
  const SvgStyle root_j{"#1f77b4", 1.6, ""};
  const SvgStyle guard{"#ff7f0e", 1.6, "3,3"};
  auto draw = [&](const std::vector<LabeledCurve>& curves, const std::string& prefix,
                  const SvgStyle& st) {
    for (const auto& c : curves) {
      if (c.id.rfind(prefix, 0) != 0) continue;
      std::vector<std::pair<double, double>> pts;
      pts.reserve(c.points.size());
      for (const auto& p : c.points) pts.emplace_back(p[0], p[1]);
      canvas.polyline(pts, st);
    }
  };
  draw(data.nullclines, "nullcline_x", null_x);
  draw(data.nullclines, "nullcline_y", null_y);
  draw(data.root_curves, "root_L", root_l);
  draw(data.root_curves, "root_J", root_j);
  draw(data.guard_curves, "guard_g", guard);
  for (const auto& s : data.sign_field) {
    canvas.text(s.cx, s.cy, s.sign_l > 0 ? "+" : "-", "#d62728", 11);
    canvas.text(s.cx, s.cy - (data.region.hi[1] - data.region.lo[1]) * 0.018,
                s.sign_j > 0 ? "+" : "-", "#1f77b4", 11);
  }
  for (const auto& a : data.direction_field) canvas.arrow(a.x, a.y, a.sx, a.sy, "#333");
  canvas.legend({{"x-nullcline", null_x},
                 {"y-nullcline", null_y},
                 {"L = 0", root_l},
                 {"J = 0", root_j},
                 {"guard g = 0", guard}});
  canvas.write(basename + ".svg");
}

}  // namespace tscope
