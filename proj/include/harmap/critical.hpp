#pragma once

// Critical set S = {J_f = 0} by marching squares, and its image f(S).

#include "harmap/field.hpp"
#include "harmap/geometry.hpp"
#include "harmap/parallel.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace harmap {

enum class Source { critical_contour, image_of_critical, cluster_estimate };

inline const char* to_string(Source s) {
  switch (s) {
    case Source::critical_contour: return "critical-contour";
    case Source::image_of_critical: return "image-of-critical";
    case Source::cluster_estimate: return "cluster-estimate";
  }
  return "?";
}

struct Polyline {
  std::vector<Point> points;
  Source source = Source::critical_contour;
};

/// Polylines plus, for point clouds, isolated samples in `points`.
struct PolylineSet {
  std::vector<Polyline> lines;
  std::vector<Point> points;
  Source source = Source::critical_contour;

  bool empty() const { return lines.empty() && points.empty(); }
  std::size_t vertex_count() const {
    std::size_t n = points.size();
    for (const auto& l : lines) n += l.points.size();
    return n;
  }
  template <class Fn>
  void for_each_vertex(Fn&& fn) const {
    for (const auto& l : lines)
      for (const auto& p : l.points) fn(p);
    for (const auto& p : points) fn(p);
  }
  template <class Fn>
  void for_each_segment(Fn&& fn) const {
    for (const auto& l : lines)
      for (std::size_t i = 1; i < l.points.size(); ++i) fn(l.points[i - 1], l.points[i]);
  }
};

struct ContourOptions {
  int threads = 1;
  int max_refine_iterations = 80;
};

namespace critical_detail {

inline double jacobian_at(const PlanarMap& f, const Point& z) { return f.jet(z).jacobian(); }

/// Zero of J on the segment a->b given opposite signs at the ends
/// (ja >= 0 > jb or vice versa). Illinois false position until the bracket
/// collapses; always returns a point on the segment.
inline Point refine_on_edge(const PlanarMap& f, Point a, Point b, double ja, double jb, double eps_j,
                            int max_iter) {
  double t0 = 0, t1 = 1, f0 = ja, f1 = jb;
  int side = 0;
  double t = f0 / (f0 - f1);
  for (int it = 0; it < max_iter; ++it) {
    t = t0 + (t1 - t0) * (f0 / (f0 - f1));
    if (!(t > t0 && t < t1)) t = 0.5 * (t0 + t1);
    Point p = a + t * (b - a);
    double jt = jacobian_at(f, p);
    if (jt == 0) return p;
    if ((jt >= 0) == (f0 >= 0)) {
      t0 = t;
      f0 = jt;
      if (side == -1) f1 *= 0.5;
      side = -1;
    } else {
      t1 = t;
      f1 = jt;
      if (side == 1) f0 *= 0.5;
      side = 1;
    }
    double width = (t1 - t0) * distance(a, b);
    double scale = std::max({1.0, std::abs(a.x), std::abs(a.y)});
    if (width <= 4 * std::numeric_limits<double>::epsilon() * scale && std::abs(jt) <= eps_j) break;
  }
  t = std::abs(f0) <= std::abs(f1) ? t0 : t1;
  return a + t * (b - a);
}

}  // namespace critical_detail

/// Grid samples of J_f on the window nodes, row-major (j * nx + i).
inline std::vector<double> jacobian_grid(const PlanarMap& f, const Window& w, int threads = 1) {
  w.validate();
  std::vector<double> jg(static_cast<std::size_t>(w.nx) * w.ny);
  parallel_for(static_cast<std::size_t>(w.ny), threads, [&](std::size_t j) {
    for (int i = 0; i < w.nx; ++i) {
      Point z = w.node(i, static_cast<int>(j));
      try {
        jg[j * w.nx + i] = critical_detail::jacobian_at(f, z);
      } catch (const DomainFault& e) {
        char buf[96];
        std::snprintf(buf, sizeof buf, " at grid node (%.17g, %.17g)", z.x, z.y);
        throw DomainFault(std::string(e.what()) + buf);
      }
    }
  });
  return jg;
}

inline PolylineSet critical_contours(const PlanarMap& f, const Window& w, const ContourOptions& opt = {}) {
  const int nx = w.nx, ny = w.ny;
  auto jg = jacobian_grid(f, w, opt.threads);
  auto J = [&](int i, int j) { return jg[static_cast<std::size_t>(j) * nx + i]; };
  auto pos = [](double v) { return v >= 0; };

  double jmax = 0;
  for (double v : jg) jmax = std::max(jmax, std::abs(v));
  const double eps_j = 1e-6 * jmax;

  // Edge ids: horizontal (i,j)-(i+1,j) first, then vertical (i,j)-(i,j+1).
  const std::size_t nh = static_cast<std::size_t>(nx - 1) * ny;
  const std::size_t nv = static_cast<std::size_t>(nx) * (ny - 1);
  auto hid = [&](int i, int j) { return static_cast<std::size_t>(j) * (nx - 1) + i; };
  auto vid = [&](int i, int j) { return nh + static_cast<std::size_t>(j) * nx + i; };

  std::vector<Point> vert(nh + nv);
  std::vector<char> has(nh + nv, 0);
  parallel_for(static_cast<std::size_t>(ny), opt.threads, [&](std::size_t jj) {
    int j = static_cast<int>(jj);
    for (int i = 0; i < nx; ++i) {
      if (i + 1 < nx && pos(J(i, j)) != pos(J(i + 1, j))) {
        auto id = hid(i, j);
        vert[id] = critical_detail::refine_on_edge(f, w.node(i, j), w.node(i + 1, j), J(i, j), J(i + 1, j),
                                                   eps_j, opt.max_refine_iterations);
        has[id] = 1;
      }
      if (j + 1 < ny && pos(J(i, j)) != pos(J(i, j + 1))) {
        auto id = vid(i, j);
        vert[id] = critical_detail::refine_on_edge(f, w.node(i, j), w.node(i, j + 1), J(i, j), J(i, j + 1),
                                                   eps_j, opt.max_refine_iterations);
        has[id] = 1;
      }
    }
  });

  // Cell segments. Corners c0..c3 counter-clockwise from bottom-left; edges
  // e0 bottom, e1 right, e2 top, e3 left.
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::array<std::size_t, 2>> nbr(nh + nv, {none, none});
  auto link = [&](std::size_t a, std::size_t b) {
    auto add = [&](std::size_t from, std::size_t to) {
      if (nbr[from][0] == none) nbr[from][0] = to;
      else nbr[from][1] = to;
    };
    add(a, b);
    add(b, a);
  };
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      bool s0 = pos(J(i, j)), s1 = pos(J(i + 1, j)), s2 = pos(J(i + 1, j + 1)), s3 = pos(J(i, j + 1));
      std::size_t e[4] = {hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)};
      bool c[4] = {s0 != s1, s1 != s2, s3 != s2, s0 != s3};
      int count = c[0] + c[1] + c[2] + c[3];
      if (count == 2) {
        std::size_t ends[2];
        int k = 0;
        for (int q = 0; q < 4; ++q)
          if (c[q]) ends[k++] = e[q];
        link(ends[0], ends[1]);
      } else if (count == 4) {
        Point mid = w.node(i, j) + Point{0.5 * w.dx(), 0.5 * w.dy()};
        bool sc = pos(critical_detail::jacobian_at(f, mid));
        if (sc == s0) {
          link(e[0], e[1]);  // isolate c1
          link(e[2], e[3]);  // isolate c3
        } else {
          link(e[0], e[3]);  // isolate c0
          link(e[1], e[2]);  // isolate c2
        }
      }
    }
  }

  PolylineSet out;
  out.source = Source::critical_contour;
  std::vector<char> seen(nh + nv, 0);
  auto emit = [&](std::size_t start) {
    Polyline pl;
    pl.source = Source::critical_contour;
    std::size_t prev = none, cur = start;
    while (cur != none && !seen[cur]) {
      seen[cur] = 1;
      if (pl.points.empty() || !(pl.points.back() == vert[cur])) pl.points.push_back(vert[cur]);
      std::size_t next = nbr[cur][0] != prev ? nbr[cur][0] : nbr[cur][1];
      if (next == prev) next = none;
      prev = cur;
      cur = next;
    }
    // Closed loop: return to the start.
    if (cur == start && pl.points.size() > 2 && !(pl.points.back() == vert[start])) pl.points.push_back(vert[start]);
    if (pl.points.size() >= 2) out.lines.push_back(std::move(pl));
  };
  for (std::size_t id = 0; id < nh + nv; ++id) {
    if (has[id] && !seen[id] && (nbr[id][1] == none)) emit(id);
  }
  for (std::size_t id = 0; id < nh + nv; ++id) {
    if (has[id] && !seen[id]) emit(id);
  }
  return out;
}

/// Vertex-wise image of polylines; a polyline is split wherever consecutive
/// images are more than `jump` apart.
inline PolylineSet image_of_critical(const PlanarMap& f, const PolylineSet& s, double jump = 1.0) {
  PolylineSet out;
  out.source = Source::image_of_critical;
  for (const auto& line : s.lines) {
    Polyline cur;
    cur.source = Source::image_of_critical;
    auto flush = [&] {
      if (cur.points.size() >= 2) out.lines.push_back(cur);
      else if (cur.points.size() == 1) out.points.push_back(cur.points[0]);
      cur.points.clear();
    };
    for (const auto& z : line.points) {
      Point wz = f(z);
      if (!cur.points.empty()) {
        if (distance(cur.points.back(), wz) > jump) flush();
        else if (cur.points.back() == wz) continue;
      }
      cur.points.push_back(wz);
    }
    flush();
  }
  for (const auto& z : s.points) out.points.push_back(f(z));
  return out;
}

/// Distance from z to the nearest vertex or segment of s; +inf when s is empty.
inline double nearest_distance(const PolylineSet& s, const Point& z) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& l : s.lines)
    for (std::size_t i = 1; i < l.points.size(); ++i)
      best = std::min(best, point_segment_distance(z, l.points[i - 1], l.points[i]));
  for (const auto& p : s.points) best = std::min(best, distance(z, p));
  return best;
}

inline double nearest_critical_distance(const PlanarMap& f, const Point& z, const Window& w,
                                        const ContourOptions& opt = {}) {
  return nearest_distance(critical_contours(f, w, opt), z);
}

}  // namespace harmap
