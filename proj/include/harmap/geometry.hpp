#pragma once

// Segment predicates and polygonal paths.
//
// Orientation tests are exact sign tests on the cross product with a relative
// collinearity tolerance of 1e-12; touching counts as intersecting. A path is
// simple when non-adjacent segments are disjoint and adjacent segments share
// only their common vertex.

#include "harmap/real.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace harmap {

inline constexpr double collinear_eps = 1e-12;

template <class Real>
int orientation(const Vec2<Real>& a, const Vec2<Real>& b, const Vec2<Real>& c) {
  Vec2<Real> ab = b - a, ac = c - a;
  Real cr = cross(ab, ac);
  Real scale = norm(ab) * norm(ac);
  if (scale == 0) return 0;
  Real tol = scale * Real(collinear_eps);
  if (cr > tol) return 1;
  if (cr < -tol) return -1;
  return 0;
}

/// Parameter of the projection of p onto the line through a, b.
template <class Real>
Real project_param(const Vec2<Real>& a, const Vec2<Real>& b, const Vec2<Real>& p) {
  Vec2<Real> ab = b - a;
  return dot(p - a, ab) / dot(ab, ab);
}

template <class Real>
struct SegmentHit {
  Real t0;  // first contact, as a parameter along the first segment
  Real t1;  // last contact (equal to t0 unless the segments overlap)
};

/// Contact set of segment ab with segment cd, reported as a parameter range
/// along ab. Empty optional when the closed segments are disjoint.
template <class Real>
std::optional<SegmentHit<Real>> segment_hit(const Vec2<Real>& a, const Vec2<Real>& b,
                                            const Vec2<Real>& c, const Vec2<Real>& d) {
  const Real lo = -Real(collinear_eps), hi = Real(1) + Real(collinear_eps);
  auto clamp01 = [](Real t) { return t < 0 ? Real(0) : (t > 1 ? Real(1) : t); };

  // Cheap bounding-box rejection.
  using std::max;
  using std::min;
  if (max(a.x, b.x) < min(c.x, d.x) || max(c.x, d.x) < min(a.x, b.x) ||
      max(a.y, b.y) < min(c.y, d.y) || max(c.y, d.y) < min(a.y, b.y))
    return std::nullopt;

  // A point against a segment.
  if (a == b) {
    if (c == d) return a == c ? std::optional(SegmentHit<Real>{Real(0), Real(0)}) : std::nullopt;
    Real s = project_param(c, d, a);
    if (orientation(c, d, a) != 0 || s < lo || s > hi) return std::nullopt;
    return SegmentHit<Real>{Real(0), Real(0)};
  }

  int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
  int o3 = orientation(c, d, a), o4 = orientation(c, d, b);

  if (o1 == 0 && o2 == 0) {
    if (c == d) {
      Real t = project_param(a, b, c);
      if (t < lo || t > hi) return std::nullopt;
      return SegmentHit<Real>{clamp01(t), clamp01(t)};
    }
    Real tc = project_param(a, b, c), td = project_param(a, b, d);
    Real s0 = min(tc, td), s1 = max(tc, td);
    if (s1 < lo || s0 > hi) return std::nullopt;
    return SegmentHit<Real>{clamp01(max(s0, Real(0))), clamp01(min(s1, Real(1)))};
  }

  std::vector<Real> ts;
  auto on_cd = [&](const Vec2<Real>& p) {
    Real s = project_param(c, d, p);
    return s >= lo && s <= hi;
  };
  if (o1 == 0) {
    Real t = project_param(a, b, c);
    if (t >= lo && t <= hi) ts.push_back(clamp01(t));
  }
  if (o2 == 0) {
    Real t = project_param(a, b, d);
    if (t >= lo && t <= hi) ts.push_back(clamp01(t));
  }
  if (o3 == 0 && on_cd(a)) ts.push_back(Real(0));
  if (o4 == 0 && on_cd(b)) ts.push_back(Real(1));
  if (ts.empty() && o1 * o2 < 0 && o3 * o4 < 0) {
    Vec2<Real> r = b - a, s = d - c;
    Real t = cross(c - a, s) / cross(r, s);
    ts.push_back(clamp01(t));
  }
  if (ts.empty()) return std::nullopt;
  auto [mn, mx] = std::minmax_element(ts.begin(), ts.end());
  return SegmentHit<Real>{*mn, *mx};
}

template <class Real>
bool segments_intersect(const Vec2<Real>& a, const Vec2<Real>& b, const Vec2<Real>& c,
                        const Vec2<Real>& d) {
  return segment_hit(a, b, c, d).has_value();
}

template <class Real>
Vec2<Real> lerp(const Vec2<Real>& a, const Vec2<Real>& b, const Real& t) {
  if (t == 1) return b;
  return a + t * (b - a);
}

template <class Real>
Real point_segment_distance(const Vec2<Real>& p, const Vec2<Real>& a, const Vec2<Real>& b) {
  Vec2<Real> ab = b - a;
  Real len2 = dot(ab, ab);
  if (len2 == 0) return distance(p, a);
  Real t = dot(p - a, ab) / len2;
  if (t <= 0) return distance(p, a);
  if (t >= 1) return distance(p, b);
  return distance(p, a + t * ab);
}

/// Ordered polygonal path. Always open.
template <class Real>
struct BasicPolyPath {
  std::vector<Vec2<Real>> vertices;
  bool closed = false;

  std::size_t size() const { return vertices.size(); }
  std::size_t segments() const { return vertices.empty() ? 0 : vertices.size() - 1; }
  const Vec2<Real>& front() const { return vertices.front(); }
  const Vec2<Real>& back() const { return vertices.back(); }
};

using PolyPath = BasicPolyPath<double>;

template <class Real>
bool consecutive_distinct(const BasicPolyPath<Real>& p) {
  for (std::size_t i = 1; i < p.vertices.size(); ++i)
    if (p.vertices[i] == p.vertices[i - 1]) return false;
  return true;
}

/// Adjacent segments (a,b), (b,c) touch somewhere other than b.
template <class Real>
bool adjacent_overlap(const Vec2<Real>& a, const Vec2<Real>& b, const Vec2<Real>& c) {
  if (orientation(a, b, c) != 0) return false;
  return dot(b - a, c - b) < 0;
}

template <class Real>
bool is_simple(const BasicPolyPath<Real>& p) {
  const auto& v = p.vertices;
  if (v.size() < 2 || !consecutive_distinct(p)) return false;
  std::size_t n = v.size() - 1;
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (adjacent_overlap(v[i], v[i + 1], v[i + 2])) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (segments_intersect(v[i], v[i + 1], v[j], v[j + 1])) return false;
    }
  }
  return true;
}

template <class Real>
Real path_length(const BasicPolyPath<Real>& p) {
  Real total(0);
  for (std::size_t i = 1; i < p.vertices.size(); ++i) total += distance(p.vertices[i - 1], p.vertices[i]);
  return total;
}

/// Convex hull by monotone chain; returns hull vertices counter-clockwise.
template <class Real>
std::vector<Vec2<Real>> convex_hull(std::vector<Vec2<Real>> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return lex_less(a, b); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2<Real>> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

/// Diameter of the vertex set (equal to the diameter of the polygonal path).
template <class Real>
Real diameter(const std::vector<Vec2<Real>>& pts) {
  auto hull = convex_hull(pts);
  Real best(0);
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) {
      Real d = distance(hull[i], hull[j]);
      if (d > best) best = d;
    }
  return best;
}

template <class Real>
Real diameter(const BasicPolyPath<Real>& p) {
  return diameter(p.vertices);
}

/// Largest distance from c to any point of the path (attained at a vertex).
template <class Real>
Real max_distance_from(const BasicPolyPath<Real>& p, const Vec2<Real>& c) {
  Real best(0);
  for (const auto& v : p.vertices) {
    Real d = distance(v, c);
    if (d > best) best = d;
  }
  return best;
}

/// Distance from c to the nearest point of the path.
template <class Real>
Real min_distance_to(const BasicPolyPath<Real>& p, const Vec2<Real>& c) {
  if (p.vertices.size() == 1) return distance(p.vertices[0], c);
  Real best = distance(p.vertices[0], c);
  for (std::size_t i = 1; i < p.vertices.size(); ++i) {
    Real d = point_segment_distance(c, p.vertices[i - 1], p.vertices[i]);
    if (d < best) best = d;
  }
  return best;
}

}  // namespace harmap
