#pragma once

// Window-limited valence counts and constant-valence partitions of an
// image-plane window.

#include "harmap/critical.hpp"
#include "harmap/lift.hpp"
#include "harmap/parallel.hpp"
#include "harmap/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace harmap {

struct ValenceOptions {
  double tol = 1e-10;
  int cap = 64;
  bool jitter = true;
  int threads = 1;
  /// valence_map: per-cell seed budget after merging near-duplicates.
  std::size_t max_seeds_per_cell = 512;
};

struct ValenceCount {
  int count = 0;
  /// Count above the cap and still growing when the window doubles.
  bool infinite = false;
  int grown_count = -1;  // count in the doubled window, when it was probed
  std::vector<Point> roots;
};

namespace valence_detail {

inline void merge_roots(const PlanarMap& f, std::vector<Point>& into, const std::vector<Point>& extra, double tol) {
  into.insert(into.end(), extra.begin(), extra.end());
  dedup_roots(f, into, tol);
}

/// Newton from each warm seed, keeping roots inside the window.
inline std::vector<Point> polish_seeds(const PlanarMap& f, const Point& w, const Window& zwin,
                                       const std::vector<Point>& seeds, double tol) {
  std::vector<Point> out;
  for (const auto& s : seeds) {
    auto z = newton_solve<double>(f, s, w, tol);
    if (z && zwin.contains(*z)) out.push_back(*z);
  }
  return out;
}

}  // namespace valence_detail

inline ValenceCount valence_at(const PlanarMap& f, const Point& w, const Window& zwindow, const ValenceOptions& opt = {},
                               const std::vector<Point>& warm = {}) {
  PreimageOptions po;
  po.tol = opt.tol;
  po.jitter = opt.jitter;
  po.threads = opt.threads;
  ValenceCount out;
  out.roots = preimages(f, w, zwindow, po).points;
  if (!warm.empty()) valence_detail::merge_roots(f, out.roots, valence_detail::polish_seeds(f, w, zwindow, warm, opt.tol), opt.tol);
  out.count = static_cast<int>(out.roots.size());
  if (out.count > opt.cap) {
    // Same seed density over twice the extent; the smaller root set is kept
    // so growth is never an artifact of reseeding.
    Window big = zwindow.scaled(2.0);
    big.nx = 2 * zwindow.nx;
    big.ny = 2 * zwindow.ny;
    auto grown = preimages(f, w, big, po).points;
    valence_detail::merge_roots(f, grown, out.roots, opt.tol);
    out.grown_count = static_cast<int>(grown.size());
    out.infinite = out.grown_count > out.count;
  }
  return out;
}

/// Per-cell valence over an image window of nx by ny cells (cell centres,
/// not nodes). Cells with a 4-neighbour of different valence are marked.
struct ValenceGrid {
  static constexpr int infinite_valence = -1;

  Window wwindow;
  Window zwindow;
  int seeds_per_cell = 0;
  std::vector<int> valence;        // row-major, j * nx + i; infinite_valence for confirmed growth
  std::vector<std::uint8_t> boundary;

  int nx() const { return wwindow.nx; }
  int ny() const { return wwindow.ny; }
  double cell_w() const { return (wwindow.xmax - wwindow.xmin) / wwindow.nx; }
  double cell_h() const { return (wwindow.ymax - wwindow.ymin) / wwindow.ny; }
  double cell_diagonal() const { return std::hypot(cell_w(), cell_h()); }
  Point center(int i, int j) const {
    return {wwindow.xmin + (i + 0.5) * cell_w(), wwindow.ymin + (j + 0.5) * cell_h()};
  }
  int at(int i, int j) const { return valence[static_cast<std::size_t>(j) * nx() + i]; }
  bool is_boundary(int i, int j) const { return boundary[static_cast<std::size_t>(j) * nx() + i] != 0; }
};

inline void mark_boundaries(ValenceGrid& g) {
  const int nx = g.nx(), ny = g.ny();
  g.boundary.assign(static_cast<std::size_t>(nx) * ny, 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int v = g.at(i, j);
      bool b = (i > 0 && g.at(i - 1, j) != v) || (i + 1 < nx && g.at(i + 1, j) != v) ||
               (j > 0 && g.at(i, j - 1) != v) || (j + 1 < ny && g.at(i, j + 1) != v);
      g.boundary[static_cast<std::size_t>(j) * nx + i] = b;
    }
}

namespace valence_detail {

struct Seed {
  std::size_t cell;
  Point z;
};

inline constexpr int max_depth = 7;

/// Rasterises the image of one z-triangle into the cell grid. The linear
/// image is widened by twice the midpoint deviation of f from its linear
/// interpolant, so folded triangles whose vertices collapse still reach the
/// cells their true image covers. Large or strongly curved images recurse.
inline void raster_triangle(const PlanarMap& f, const ValenceGrid& g, const Point (&z)[3], const Point (&w)[3],
                            int depth, std::vector<Seed>& out) {
  for (const auto& p : w)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return;
  const Point zm[3] = {0.5 * (z[0] + z[1]), 0.5 * (z[1] + z[2]), 0.5 * (z[2] + z[0])};
  Point wm[3];
  double dev = 0;
  for (int k = 0; k < 3; ++k) {
    try {
      wm[k] = f(zm[k]);
    } catch (const DomainFault&) {
      return;
    }
    if (!std::isfinite(wm[k].x) || !std::isfinite(wm[k].y)) return;
    dev = std::max(dev, distance(wm[k], 0.5 * (w[k] + w[(k + 1) % 3])));
  }
  const double cw = g.cell_w(), ch = g.cell_h();
  const double slack = 2 * dev;
  double x0 = std::min({w[0].x, w[1].x, w[2].x}) - slack, x1 = std::max({w[0].x, w[1].x, w[2].x}) + slack;
  double y0 = std::min({w[0].y, w[1].y, w[2].y}) - slack, y1 = std::max({w[0].y, w[1].y, w[2].y}) + slack;
  if (x1 < g.wwindow.xmin || x0 > g.wwindow.xmax || y1 < g.wwindow.ymin || y0 > g.wwindow.ymax) return;
  int i0 = std::max(0, static_cast<int>(std::ceil((x0 - g.wwindow.xmin) / cw - 0.5)));
  int i1 = std::min(g.nx() - 1, static_cast<int>(std::floor((x1 - g.wwindow.xmin) / cw - 0.5)));
  int j0 = std::max(0, static_cast<int>(std::ceil((y0 - g.wwindow.ymin) / ch - 0.5)));
  int j1 = std::min(g.ny() - 1, static_cast<int>(std::floor((y1 - g.wwindow.ymin) / ch - 0.5)));
  if (i0 > i1 || j0 > j1) return;
  // Wild triangles are not seeded: those still strongly curved after full
  // subdivision (deviation shrinks 4x per level), whose linear pull-back
  // seeds are meaningless, and those whose leaves would still span
  // thousands of cells.
  const double levels = std::ldexp(1.0, 2 * (max_depth - depth));
  if (dev / levels > 4 * std::max(cw, ch)) return;
  const double span = ((x1 - x0) / cw + 1) * ((y1 - y0) / ch + 1);
  if (span / levels > 4096) return;
  const bool big = static_cast<double>(i1 - i0 + 1) * (j1 - j0 + 1) > 16;
  const bool curved = dev > 0.5 * std::min(cw, ch);
  if ((big || curved) && depth < max_depth) {
    const Point za[4][3] = {{z[0], zm[0], zm[2]}, {zm[0], z[1], zm[1]}, {zm[2], zm[1], z[2]}, {zm[0], zm[1], zm[2]}};
    const Point wa[4][3] = {{w[0], wm[0], wm[2]}, {wm[0], w[1], wm[1]}, {wm[2], wm[1], w[2]}, {wm[0], wm[1], wm[2]}};
    for (int k = 0; k < 4; ++k) raster_triangle(f, g, za[k], wa[k], depth + 1, out);
    return;
  }
  const double det = cross(w[1] - w[0], w[2] - w[0]);
  const double tiny = 1e-12 * std::max(1.0, distance(w[1], w[0]) * distance(w[2], w[0]));
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      Point c = g.center(i, j);
      double b[3] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
      double gap = std::min({point_segment_distance(c, w[0], w[1]), point_segment_distance(c, w[1], w[2]),
                             point_segment_distance(c, w[2], w[0])});
      if (std::abs(det) > tiny) {
        b[1] = cross(c - w[0], w[2] - w[0]) / det;
        b[2] = cross(w[1] - w[0], c - w[0]) / det;
        b[0] = 1 - b[1] - b[2];
        if (b[0] >= 0 && b[1] >= 0 && b[2] >= 0) gap = 0;
        double sum = 0;
        for (double& v : b) sum += v = std::max(v, 0.0);
        for (double& v : b) v /= sum;
      }
      if (gap > slack + 0.5 * std::hypot(cw, ch) * (depth >= max_depth)) continue;
      out.push_back({static_cast<std::size_t>(j) * g.nx() + i, b[0] * z[0] + b[1] * z[1] + b[2] * z[2]});
    }
}

/// Drops seeds on the same `q`-lattice site, then keeps an evenly strided
/// subset if more than `budget` remain. Order-preserving and deterministic.
inline void thin_seeds(std::vector<Point>& seeds, double q, std::size_t budget) {
  std::vector<std::pair<std::pair<long long, long long>, std::size_t>> keys;
  keys.reserve(seeds.size());
  for (std::size_t k = 0; k < seeds.size(); ++k)
    keys.push_back({{std::llround(seeds[k].x / q), std::llround(seeds[k].y / q)}, k});
  std::sort(keys.begin(), keys.end());
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < keys.size(); ++k)
    if (k == 0 || keys[k].first != keys[k - 1].first) keep.push_back(keys[k].second);
  std::sort(keep.begin(), keep.end());
  std::vector<Point> out;
  const std::size_t stride = keep.size() > budget ? (keep.size() + budget - 1) / budget : 1;
  for (std::size_t k = 0; k < keep.size(); k += stride) out.push_back(seeds[keep[k]]);
  seeds = std::move(out);
}

}  // namespace valence_detail

/// Seeds come from rasterising the images of the zwindow grid triangles, so
/// every cell centre is tried from each triangle whose image covers it.
/// Counts above the cap are confirmed by valence_at's window doubling.
inline ValenceGrid valence_map(const PlanarMap& f, const Window& wwindow, const Window& zwindow,
                               const ValenceOptions& opt = {}) {
  using valence_detail::Seed;
  wwindow.validate();
  zwindow.validate();
  ValenceGrid g;
  g.wwindow = wwindow;
  g.zwindow = zwindow;
  g.seeds_per_cell = 0;
  const std::size_t ncell = static_cast<std::size_t>(wwindow.nx) * wwindow.ny;
  g.valence.assign(ncell, 0);

  const int zx = zwindow.nx, zy = zwindow.ny;
  std::vector<Point> img(static_cast<std::size_t>(zx) * zy);
  parallel_for(static_cast<std::size_t>(zy), opt.threads, [&](std::size_t j) {
    for (int i = 0; i < zx; ++i) {
      try {
        img[j * zx + i] = f(zwindow.node(i, static_cast<int>(j)));
      } catch (const DomainFault&) {
        img[j * zx + i] = {std::numeric_limits<double>::quiet_NaN(), 0};
      }
    }
  });
  std::vector<std::vector<Seed>> rows(static_cast<std::size_t>(zy - 1));
  parallel_for(rows.size(), opt.threads, [&](std::size_t j) {
    for (int i = 0; i + 1 < zx; ++i) {
      int jj = static_cast<int>(j);
      Point z00 = zwindow.node(i, jj), z10 = zwindow.node(i + 1, jj);
      Point z01 = zwindow.node(i, jj + 1), z11 = zwindow.node(i + 1, jj + 1);
      auto W = [&](int a, int b) { return img[static_cast<std::size_t>(b) * zx + a]; };
      const Point za[3] = {z00, z10, z11}, wa[3] = {W(i, jj), W(i + 1, jj), W(i + 1, jj + 1)};
      const Point zb[3] = {z00, z11, z01}, wb[3] = {W(i, jj), W(i + 1, jj + 1), W(i, jj + 1)};
      valence_detail::raster_triangle(f, g, za, wa, 0, rows[j]);
      valence_detail::raster_triangle(f, g, zb, wb, 0, rows[j]);
    }
  });
  std::vector<std::vector<Point>> per_cell(ncell);
  for (const auto& r : rows)
    for (const auto& s : r) per_cell[s.cell].push_back(s.z);
  rows.clear();

  ValenceOptions cell = opt;
  cell.threads = 1;
  std::vector<std::size_t> seeds(ncell);
  parallel_for(static_cast<std::size_t>(wwindow.ny), opt.threads, [&](std::size_t j) {
    for (int i = 0; i < wwindow.nx; ++i) {
      std::size_t id = j * wwindow.nx + i;
      Point w = g.center(i, static_cast<int>(j));
      auto& cand = per_cell[id];
      valence_detail::thin_seeds(cand, 0.03 * std::min(zwindow.dx(), zwindow.dy()), opt.max_seeds_per_cell);
      auto roots = valence_detail::polish_seeds(f, w, zwindow, cand, opt.tol);
      dedup_roots(f, roots, opt.tol);
      seeds[id] = per_cell[id].size();
      int count = static_cast<int>(roots.size());
      if (count > opt.cap) {
        auto c = valence_at(f, w, zwindow, cell, roots);
        count = c.infinite ? ValenceGrid::infinite_valence : c.count;
      }
      g.valence[id] = count;
    }
  });
  std::size_t total = 0;
  for (auto s : seeds) total += s;
  g.seeds_per_cell = static_cast<int>(total / std::max<std::size_t>(1, ncell));
  mark_boundaries(g);
  return g;
}

struct PartitionReport {
  std::size_t boundary_cells = 0;
  std::size_t near_cells = 0;  // within 2 cell diagonals of f(S) or the cluster estimate
  double fraction = 1.0;
  std::vector<double> distances;  // per boundary cell, row-major order
};

inline PartitionReport partition_overlay(const ValenceGrid& g, const PolylineSet& fs, const PolylineSet& cluster) {
  PartitionReport rep;
  const double cell = g.cell_diagonal();
  SegmentIndex fs_seg(fs, cell), cl_seg(cluster, cell);
  PointIndex fs_pts(fs.points, cell), cl_pts(cluster.points, cell);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (!g.is_boundary(i, j)) continue;
      Point c = g.center(i, j);
      double d = std::min({fs_seg.nearest(c), cl_seg.nearest(c), fs_pts.nearest(c), cl_pts.nearest(c)});
      rep.distances.push_back(d);
      ++rep.boundary_cells;
      if (d <= 2 * cell) ++rep.near_cells;
    }
  rep.fraction = rep.boundary_cells ? static_cast<double>(rep.near_cells) / rep.boundary_cells : 1.0;
  return rep;
}

}  // namespace harmap
