#pragma once

// Polygonal path constructions: simplification, region-constrained
// connection, detours around an existing path, and end-cuts converging to a
// boundary point of a region.

#include "harmap/field.hpp"
#include "harmap/geometry.hpp"
#include "harmap/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <unordered_map>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace harmap {

class PathError : public std::runtime_error {
 public:
  enum class Kind { degenerate, precondition, no_path_found, construction_failure };
  PathError(Kind k, const std::string& what) : std::runtime_error(what), kind_(k) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Open set given by a pure membership predicate, with a bounding window and
/// a probe resolution for sampled tests.
struct RegionOracle {
  std::function<bool(const Point&)> contains;
  Window bounds;
  double h = 1e-2;
  /// Optional exact test that a whole segment lies in the region; needed
  /// when the complement has measure zero (slits), which sampling misses.
  std::function<bool(const Point&, const Point&)> segment{};

  bool operator()(const Point& p) const { return contains(p); }
};

namespace regions {

inline RegionOracle plane(double h = 1e-2) {
  return {[](const Point&) { return true; }, square_window(1e6), h};
}

inline RegionOracle disk(Point c, double r, double h = 1e-2) {
  return {[=](const Point& p) { return distance(p, c) < r; }, {c.x - r, c.x + r, c.y - r, c.y + r}, h};
}

inline RegionOracle annulus(Point c, double r0, double r1, double h = 1e-2) {
  return {[=](const Point& p) {
            double d = distance(p, c);
            return d > r0 && d < r1;
          },
          {c.x - r1, c.x + r1, c.y - r1, c.y + r1},
          h};
}

/// Disk of radius r about c with the ray {c + t*(cos a, sin a): t >= 0}
/// removed.
inline RegionOracle slit_disk(Point c, double r, double slit_angle = M_PI, double h = 1e-2) {
  Point dir{std::cos(slit_angle), std::sin(slit_angle)};
  Point tip = c + (2 * r) * dir;
  auto inside = [=](const Point& p) {
    Point q = p - c;
    double d = norm(q);
    if (!(d < r) || d == 0) return false;
    // on the slit ray: collinear with dir and pointing the same way
    return !(std::abs(cross(dir, q)) <= 1e-15 * d && dot(dir, q) > 0);
  };
  return {inside, {c.x - r, c.x + r, c.y - r, c.y + r}, h, [=](const Point& p, const Point& q) {
            return inside(p) && inside(q) && !segments_intersect(p, q, c, tip);
          }};
}

/// Punctured disk about c intersected with the open angular sector
/// (a0, a1) measured from c (a1 - a0 <= 2 pi).
inline RegionOracle sector(Point c, double r, double a0, double a1, double h = 1e-2) {
  return {[=](const Point& p) {
            Point q = p - c;
            double d = norm(q);
            if (!(d < r) || d == 0) return false;
            double a = std::atan2(q.y, q.x);
            while (a <= a0) a += 2 * M_PI;
            while (a > a0 + 2 * M_PI) a -= 2 * M_PI;
            return a < a1;
          },
          {c.x - r, c.x + r, c.y - r, c.y + r},
          h};
}

inline RegionOracle disks(std::vector<Disk> ds, double h = 1e-2) {
  Window w{1e300, -1e300, 1e300, -1e300, 2, 2};
  for (const auto& d : ds) {
    w.xmin = std::min(w.xmin, d.center.x - d.radius);
    w.xmax = std::max(w.xmax, d.center.x + d.radius);
    w.ymin = std::min(w.ymin, d.center.y - d.radius);
    w.ymax = std::max(w.ymax, d.center.y + d.radius);
  }
  return {[ds](const Point& p) {
            for (const auto& d : ds)
              if (d.contains(p)) return true;
            return false;
          },
          w, h};
}

}  // namespace regions

/// Every point of segment pq sampled at spacing at most h lies in the region.
inline bool segment_in_region(const Point& p, const Point& q, const RegionOracle& region, double h) {
  if (region.segment) return region.segment(p, q);
  double len = distance(p, q);
  int n = std::max(1, static_cast<int>(std::ceil(len / h)));
  for (int k = 0; k <= n; ++k) {
    Point s = k == n ? q : p + (static_cast<double>(k) / n) * (q - p);
    if (!region(s)) return false;
  }
  return true;
}

inline PolyPath make_simple(const PolyPath& p) {
  if (p.vertices.size() < 2) throw PathError(PathError::Kind::degenerate, "path needs at least two vertices");
  if (p.front() == p.back()) throw PathError(PathError::Kind::degenerate, "path starts and ends at the same point");
  std::vector<Point> out{p.front()};
  for (std::size_t i = 1; i < p.vertices.size(); ++i) {
    const Point v = p.vertices[i];
    for (int guard = 0; guard < 100000; ++guard) {
      Point cur = out.back();
      if (cur == v) break;
      std::size_t m = out.size() - 1;  // number of output segments
      std::size_t hit_k = m;
      double hit_t = 0;
      for (std::size_t k = 0; k < m; ++k) {
        auto h = segment_hit(cur, v, out[k], out[k + 1]);
        if (!h) continue;
        if (k + 1 == m && h->t1 <= 0) continue;  // adjacent: meets only at cur
        hit_k = k;
        hit_t = h->t1;
        break;
      }
      if (hit_k == m) {
        out.push_back(v);
        break;
      }
      Point q = hit_t >= 1 ? v : lerp(cur, v, hit_t);
      out.resize(hit_k + 1);
      if (!(out.back() == q)) out.push_back(q);
      if (hit_t >= 1) break;
    }
  }
  if (out.size() < 2) throw PathError(PathError::Kind::degenerate, "path collapses to a point");
  if (!(out.back() == p.back())) out.push_back(p.back());
  return PolyPath{std::move(out)};
}

namespace paths_detail {

/// BFS over the lattice origin + h*(i, j), |i|, |j| <= radius. Returns the
/// lattice points from the origin to the first node accepted by `goal`.
/// Visited nodes are kept sparsely, so thin admissible sets can use a
/// large radius.
template <class NodeOk, class EdgeOk, class Goal>
std::optional<std::vector<Point>> grid_bfs(const Point& origin, double h, int radius, NodeOk&& node_ok,
                                           EdgeOk&& edge_ok, Goal&& goal) {
  auto key = [](int i, int j) { return (static_cast<std::int64_t>(i) << 32) ^ static_cast<std::uint32_t>(j); };
  auto at = [&](int i, int j) { return Point{origin.x + i * h, origin.y + j * h}; };
  std::unordered_map<std::int64_t, std::pair<int, int>> parent;  // node -> predecessor
  std::deque<std::pair<int, int>> queue;
  parent.emplace(key(0, 0), std::make_pair(0, 0));
  queue.emplace_back(0, 0);
  static constexpr int di[8] = {1, 0, -1, 0, 1, -1, -1, 1};
  static constexpr int dj[8] = {0, 1, 0, -1, 1, 1, -1, -1};
  while (!queue.empty()) {
    auto [i, j] = queue.front();
    queue.pop_front();
    Point p = at(i, j);
    if (goal(p)) {
      std::vector<Point> path;
      std::pair<int, int> cur{i, j};
      while (true) {
        path.push_back(at(cur.first, cur.second));
        if (cur.first == 0 && cur.second == 0) break;
        cur = parent.at(key(cur.first, cur.second));
      }
      std::reverse(path.begin(), path.end());
      path.front() = origin;
      return path;
    }
    for (int k = 0; k < 8; ++k) {
      int ni = i + di[k], nj = j + dj[k];
      if (std::abs(ni) > radius || std::abs(nj) > radius) continue;
      if (parent.count(key(ni, nj))) continue;
      Point q = at(ni, nj);
      if (!node_ok(q) || !edge_ok(p, q)) continue;
      parent.emplace(key(ni, nj), std::make_pair(i, j));
      queue.emplace_back(ni, nj);
    }
  }
  return std::nullopt;
}

/// Greedy visibility shortcut: from each kept vertex jump to the farthest
/// later vertex reachable by an admissible segment.
template <class SegOk>
std::vector<Point> shortcut(const std::vector<Point>& v, SegOk&& ok) {
  if (v.size() <= 2) return v;
  std::vector<Point> out{v.front()};
  std::size_t i = 0;
  while (i + 1 < v.size()) {
    std::size_t j = v.size() - 1;
    while (j > i + 1 && !ok(v[i], v[j])) --j;
    out.push_back(v[j]);
    i = j;
  }
  return out;
}

}  // namespace paths_detail

struct ConnectOptions {
  /// Lattice spacing; 0 picks budget / 64 (or the region's h if smaller).
  double h = 0.0;
  int max_radius = 600;
};

/// Simple polygonal path from a to b inside the region with diameter below
/// the budget: the straight segment if admissible, else BFS on an h-lattice
/// confined to the disk of diameter `budget` centred between a and b.
inline PolyPath polygonal_connect(const Point& a, const Point& b, const RegionOracle& region, double budget,
                                  const ConnectOptions& opt = {}) {
  if (!region(a) || !region(b)) throw PathError(PathError::Kind::precondition, "endpoints must lie in the region");
  if (a == b) throw PathError(PathError::Kind::degenerate, "endpoints coincide");
  const double len = distance(a, b);
  double h = opt.h > 0 ? opt.h : std::min(region.h, budget / 64);
  h = std::min(h, len / 2);
  if (len < budget && segment_in_region(a, b, region, h)) return PolyPath{{a, b}};
  if (!(len < budget)) throw PathError(PathError::Kind::no_path_found, "endpoints farther apart than the budget");

  const Point mid = 0.5 * (a + b);
  const double rad = 0.5 * budget * (1 - 1e-9);
  int radius = static_cast<int>(std::ceil(budget / h)) + 2;
  if (radius > opt.max_radius) {
    radius = opt.max_radius;
    h = budget / (radius - 2);
  }
  auto node_ok = [&](const Point& q) { return distance(q, mid) < rad && region(q); };
  auto seg_ok = [&](const Point& p, const Point& q) {
    return distance(p, mid) < rad && distance(q, mid) < rad && segment_in_region(p, q, region, h);
  };
  auto goal = [&](const Point& q) { return distance(q, b) <= 1.5 * h && seg_ok(q, b); };
  auto found = paths_detail::grid_bfs(a, h, radius, node_ok, seg_ok, goal);
  if (!found) throw PathError(PathError::Kind::no_path_found, "no lattice path between the endpoints");
  found->push_back(b);
  std::vector<Point> v;
  for (const auto& q : *found)
    if (v.empty() || !(v.back() == q)) v.push_back(q);
  auto simple = make_simple(PolyPath{v});
  auto cut = paths_detail::shortcut(simple.vertices, seg_ok);
  auto result = make_simple(PolyPath{cut});
  if (!is_simple(result)) throw PathError(PathError::Kind::construction_failure, "connection is not simple");
  return result;
}

/// Path from zeta to gamma.back() meeting gamma only at its last point,
/// inside the delta-neighbourhood of gamma (delta < delta0).
inline PolyPath tube_detour(const PolyPath& gamma, const Point& zeta, double delta0, const RegionOracle& region,
                            const ConnectOptions& opt = {}) {
  if (gamma.size() < 2 || !is_simple(gamma))
    throw PathError(PathError::Kind::precondition, "tube_detour needs a simple path");
  const Point b = gamma.back();
  const double dz = min_distance_to(gamma, zeta);
  if (dz == 0 || gamma.vertices.end() != std::find(gamma.vertices.begin(), gamma.vertices.end(), zeta))
    throw PathError(PathError::Kind::precondition, "zeta lies on gamma");
  for (std::size_t i = 1; i < gamma.size(); ++i)
    if (orientation(gamma.vertices[i - 1], gamma.vertices[i], zeta) == 0 &&
        segments_intersect(gamma.vertices[i - 1], gamma.vertices[i], zeta, zeta))
      throw PathError(PathError::Kind::precondition, "zeta lies on gamma");
  if (!(dz < delta0)) throw PathError(PathError::Kind::precondition, "zeta is not within delta0 of gamma");
  if (!region(zeta)) throw PathError(PathError::Kind::precondition, "zeta outside the region");

  const double delta = 0.5 * (dz + delta0);
  const double extent = diameter(gamma) + 2 * delta;
  double h = opt.h > 0 ? opt.h : std::min({region.h, (delta - dz) / 4, delta / 8});
  // Only tube nodes are visited, so the cap scales with the tube's area
  // rather than its bounding square.
  const int cap = opt.max_radius * 16;
  int radius = static_cast<int>(std::ceil(extent / h)) + 2;
  if (radius > cap) {
    radius = cap;
    h = extent / (radius - 2);
  }
  const double cell = std::max(h, diameter(gamma) / 64);
  PolylineSet gs;
  gs.lines.push_back({gamma.vertices, Source::critical_contour});
  SegmentIndex gidx(gs, cell);
  const Point last_a = gamma.vertices[gamma.size() - 2];

  auto in_tube = [&](const Point& q) { return gidx.nearest_within(q, delta) < delta; };
  auto node_ok = [&](const Point& q) { return in_tube(q) && region(q) && !gidx.crosses(q, q); };
  // The whole segment stays in the tube G, sampled at spacing h.
  auto seg_in_tube = [&](const Point& p, const Point& q) {
    int n = std::max(1, static_cast<int>(std::ceil(distance(p, q) / h)));
    for (int k = 0; k <= n; ++k)
      if (!in_tube(k == n ? q : p + (static_cast<double>(k) / n) * (q - p))) return false;
    return true;
  };
  auto seg_ok = [&](const Point& p, const Point& q) {
    return seg_in_tube(p, q) && !gidx.crosses(p, q) && segment_in_region(p, q, region, h);
  };
  // Last link xi -> b: touches gamma only at b.
  auto final_ok = [&](const Point& xi) {
    if (xi == b || !region(xi) || !seg_in_tube(xi, b)) return false;
    if (!segment_in_region(xi, b, region, h)) return false;
    for (std::size_t i = 1; i + 1 < gamma.size(); ++i)
      if (segments_intersect(xi, b, gamma.vertices[i - 1], gamma.vertices[i])) return false;
    auto hit = segment_hit(xi, b, last_a, b);
    return hit && hit->t0 >= 1 - 1e-9 && !adjacent_overlap(xi, b, last_a);
  };
  auto goal = [&](const Point& q) { return distance(q, b) <= 3 * h && final_ok(q); };
  auto found = paths_detail::grid_bfs(zeta, h, radius, node_ok, seg_ok, goal);
  if (!found) throw PathError(PathError::Kind::construction_failure, "no detour at this resolution");
  found->push_back(b);
  std::vector<Point> v;
  for (const auto& q : *found)
    if (v.empty() || !(v.back() == q)) v.push_back(q);
  auto any_ok = [&](const Point& p, const Point& q) { return q == b ? final_ok(p) : seg_ok(p, q); };
  auto simple = make_simple(PolyPath{v});
  auto result = make_simple(PolyPath{paths_detail::shortcut(simple.vertices, any_ok)});

  // Exact audit: only the final vertex touches gamma.
  for (std::size_t i = 1; i < result.size(); ++i)
    for (std::size_t k = 1; k < gamma.size(); ++k) {
      auto hit = segment_hit(result.vertices[i - 1], result.vertices[i], gamma.vertices[k - 1], gamma.vertices[k]);
      if (!hit) continue;
      bool at_b = i + 1 == result.size() && hit->t0 >= 1 - 1e-9;
      if (!at_b) throw PathError(PathError::Kind::construction_failure, "detour touches gamma");
    }
  if (!is_simple(result)) throw PathError(PathError::Kind::construction_failure, "detour is not simple");
  return result;
}

/// Bookkeeping of the inductive end-cut. rho[k] holds rho_{k+1} and d[k]
/// holds d_{k+2}, so d_{n+1} = min(eps0 / 2^{n+1}, rho_n / 4) reads
/// d[n-1] == min(eps0 / 2^{n+1}, rho[n-1] / 4).
struct EndCutSchedule {
  double eps0 = 0.0;
  double delta0 = 0.0;
  std::vector<double> rho;
  std::vector<double> d;

  double rho_n(std::size_t n) const { return rho.at(n - 1); }
  double d_n(std::size_t n) const { return d.at(n - 2); }
};

inline double schedule_d(double eps0, std::size_t n_plus_1, double rho_n) {
  return std::min(eps0 / std::ldexp(1.0, static_cast<int>(n_plus_1)), rho_n / 4);
}

struct EndCutOptions {
  Point zeta0{0, 0};
  std::size_t max_stages = 12;
  /// ulac constant: points closer than delta0 join by a path of diameter
  /// below eps0 / 2. Zero picks eps0 / 2, right for convex pieces.
  double delta0 = 0.0;
  /// Lattice spacing per stage as a fraction of the stage budget.
  double h_fraction = 1.0 / 48;
  int max_radius = 400;
};

struct EndCutResult {
  PolyPath path;
  EndCutSchedule schedule;
  std::vector<std::size_t> kept_indices;          // indices into seq, in path order
  std::vector<std::size_t> piece_end;             // path vertex index of each kept point
  std::vector<PolyPath> pieces;                   // gamma_{n,n+1}
  bool stalled = false;
  std::string diagnostic;
};

namespace paths_detail {

inline double distance_to_path(const std::vector<Point>& v, const Point& c) {
  return min_distance_to(PolyPath{v}, c);
}

inline bool touches_only_at_start(const PolyPath& piece, const std::vector<Point>& prior) {
  for (std::size_t i = 1; i < piece.size(); ++i)
    for (std::size_t k = 1; k < prior.size(); ++k) {
      auto hit = segment_hit(piece.vertices[i - 1], piece.vertices[i], prior[k - 1], prior[k]);
      if (!hit) continue;
      // Allowed: first segment of the piece touching the final prior vertex at t = 0.
      if (i == 1 && k + 1 == prior.size() && hit->t1 <= 0) continue;
      return false;
    }
  return true;
}

}  // namespace paths_detail

/// Inductive end-cut through a subsequence of seq converging to zeta0.
inline EndCutResult end_cut(const std::vector<Point>& seq, const RegionOracle& region, double eps0,
                            const EndCutOptions& opt = {}) {
  EndCutResult res;
  const Point w0 = opt.zeta0;
  const double delta0 = opt.delta0 > 0 ? opt.delta0 : eps0 / 2;
  res.schedule.eps0 = eps0;
  res.schedule.delta0 = delta0;
  if (!(eps0 > 0)) throw PathError(PathError::Kind::precondition, "eps0 must be positive");
  for (const auto& p : seq)
    if (!region(p)) throw PathError(PathError::Kind::precondition, "sequence point outside the region");

  // Subsequence with |z_1 - w0| < delta0 / 2 and halving distances.
  std::vector<std::size_t> sub;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    double r = distance(seq[i], w0);
    if (r == 0) continue;
    if (sub.empty() ? r < delta0 / 2 : r < 0.5 * distance(seq[sub.back()], w0)) sub.push_back(i);
  }
  if (sub.size() < 2) {
    res.stalled = true;
    res.diagnostic = "sequence does not approach the declared limit";
    if (!sub.empty()) {
      res.kept_indices.push_back(sub[0]);
      res.path.vertices.push_back(seq[sub[0]]);
    }
    return res;
  }

  auto connect = [&](const Point& a, const Point& b, double budget) {
    ConnectOptions co;
    co.h = std::min(region.h, budget * opt.h_fraction);
    co.max_radius = opt.max_radius;
    return polygonal_connect(a, b, region, budget, co);
  };

  std::vector<Point> gamma{seq[sub[0]]};  // Gamma_n as a vertex list
  res.kept_indices.push_back(sub[0]);
  res.piece_end.push_back(0);
  res.schedule.rho.push_back(eps0);                    // rho_1
  res.schedule.d.push_back(schedule_d(eps0, 2, eps0));  // d_2
  std::size_t pos = 1;                                // next candidate in sub
  std::size_t prev_piece_start = 0;                   // gamma index where gamma_{n-1,n} starts

  for (std::size_t n = 1; n <= opt.max_stages; ++n) {
    const double rho_n = res.schedule.rho_n(n);
    const double d_next = n == 1 ? res.schedule.d_n(2) : schedule_d(eps0, n + 1, rho_n);
    const double d_cur = n == 1 ? eps0 / 2 : res.schedule.d_n(n);
    const Point wn = gamma.back();

    // Candidate: (a) closer than rho_n / 4 and, standing in for (b), close
    // enough that the next connection fits in d_{n+1}.
    std::optional<std::size_t> pick;
    for (; pos < sub.size(); ++pos) {
      double r = distance(seq[sub[pos]], w0);
      bool cond_a = n == 1 ? r < 0.25 * distance(wn, w0) : r < rho_n / 4;
      if (cond_a && r < d_next / 2) {
        pick = pos++;
        break;
      }
    }
    if (!pick) {
      res.stalled = true;
      res.diagnostic = "no sequence point satisfies the stage conditions at stage " + std::to_string(n);
      break;
    }
    const Point wn1 = seq[sub[*pick]];

    PolyPath piece;
    try {
      PolyPath eta = connect(wn, wn1, d_cur);
      std::vector<Point> prior_piece(gamma.begin() + static_cast<std::ptrdiff_t>(prev_piece_start), gamma.end());
      bool clean = n == 1 || paths_detail::touches_only_at_start(eta, prior_piece);
      if (clean) {
        piece = eta;
      } else {
        // First contact c with gamma_{n-1,n} walking from w_{n+1} back to w_n.
        PolyPath rev{std::vector<Point>(eta.vertices.rbegin(), eta.vertices.rend())};
        PolyPath prev{prior_piece};
        std::optional<std::pair<std::size_t, double>> first;
        for (std::size_t i = 1; i < rev.size() && !first; ++i) {
          double best = 2;
          for (std::size_t k = 1; k < prev.size(); ++k) {
            auto hit = segment_hit(rev.vertices[i - 1], rev.vertices[i], prev.vertices[k - 1], prev.vertices[k]);
            if (hit) best = std::min(best, hit->t0);
          }
          if (best <= 1) first = std::make_pair(i, best);
        }
        if (!first) throw PathError(PathError::Kind::construction_failure, "inconsistent contact search");
        const double tube = d_next / 2;
        // zeta: on eta before c, within tube / 2 of c.
        auto [seg, t] = *first;
        Point a = rev.vertices[seg - 1], bpt = rev.vertices[seg];
        Point c = lerp(a, bpt, t);
        double back_len = std::min(tube / 2, t * distance(a, bpt) * 0.5);
        Point zeta = back_len > 0 ? c + (back_len / distance(a, bpt)) * (a - bpt) : a;
        std::vector<Point> eta_prime(rev.vertices.begin(), rev.vertices.begin() + static_cast<std::ptrdiff_t>(seg));
        if (!(eta_prime.back() == zeta)) eta_prime.push_back(zeta);
        ConnectOptions co;
        co.h = std::min(region.h, tube * opt.h_fraction);
        co.max_radius = opt.max_radius;
        PolyPath tilde = tube_detour(prev, zeta, tube, region, co);
        std::vector<Point> joined = eta_prime;
        joined.insert(joined.end(), tilde.vertices.begin() + 1, tilde.vertices.end());
        std::reverse(joined.begin(), joined.end());  // w_n -> w_{n+1}
        piece = make_simple(PolyPath{joined});
      }
    } catch (const PathError& e) {
      res.stalled = true;
      res.diagnostic = std::string("stage ") + std::to_string(n) + ": " + e.what();
      break;
    }

    // Audits: simplicity of the union and the containment law.
    if (n >= 2) {
      double bound = 0.875 * res.schedule.rho_n(n - 1);
      if (!(max_distance_from(piece, w0) < bound)) {
        res.stalled = true;
        res.diagnostic = "stage " + std::to_string(n) + ": containment in B(w0, 7/8 rho_{n-1}) fails";
        break;
      }
    }
    if (!paths_detail::touches_only_at_start(piece, gamma)) {
      res.stalled = true;
      res.diagnostic = "stage " + std::to_string(n) + ": new piece meets the path built so far";
      break;
    }

    prev_piece_start = gamma.size() - 1;
    gamma.insert(gamma.end(), piece.vertices.begin() + 1, piece.vertices.end());
    res.pieces.push_back(piece);
    res.kept_indices.push_back(sub[*pick]);
    res.piece_end.push_back(gamma.size() - 1);
    double rho_next = std::min(rho_n, paths_detail::distance_to_path(gamma, w0));
    if (n == 1) rho_next = paths_detail::distance_to_path(gamma, w0);
    res.schedule.rho.push_back(rho_next);                                // rho_{n+1}
    res.schedule.d.push_back(schedule_d(eps0, n + 2, rho_next));         // d_{n+2}
  }
  res.path = PolyPath{gamma};
  return res;
}

struct UlacProbe {
  double score = 0.0;  // fraction of sampled pairs joined within the budget
  int pairs = 0;
  int joined = 0;
};

/// Heuristic ulac probe: sample pairs of region points in B(center, radius)
/// closer than delta and try to join each by a path of diameter below eps.
inline UlacProbe ulac_probe(const RegionOracle& region, const Point& center, double radius, double delta, double eps,
                            int samples = 64, std::uint64_t seed = 1) {
  UlacProbe out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  int attempts = 0;
  while (out.pairs < samples && attempts < 50 * samples) {
    ++attempts;
    Point p{center.x + radius * u(rng), center.y + radius * u(rng)};
    if (distance(p, center) >= radius || !region(p)) continue;
    Point q{p.x + delta * u(rng), p.y + delta * u(rng)};
    if (!(distance(p, q) < delta) || distance(q, center) >= radius || !region(q) || p == q) continue;
    ++out.pairs;
    try {
      ConnectOptions co;
      co.h = std::min(region.h, eps / 48);
      co.max_radius = 200;
      polygonal_connect(p, q, region, eps, co);
      ++out.joined;
    } catch (const PathError&) {
    }
  }
  out.score = out.pairs ? static_cast<double>(out.joined) / out.pairs : 0.0;
  return out;
}

}  // namespace harmap
