#pragma once

// Uniform bucket grids for nearest-point and nearest-segment queries.

#include "harmap/critical.hpp"
#include "harmap/geometry.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

namespace harmap {

class BucketGrid {
 public:
  explicit BucketGrid(double cell) : cell_(cell) {}

  double cell() const { return cell_; }
  std::int64_t key(std::int64_t i, std::int64_t j) const { return (i << 32) ^ (j & 0xffffffff); }
  std::int64_t coord(double v) const { return static_cast<std::int64_t>(std::floor(v / cell_)); }

  void insert_box(double x0, double y0, double x1, double y1, std::size_t id) {
    double span = (std::floor(x1 / cell_) - std::floor(x0 / cell_) + 1) * (std::floor(y1 / cell_) - std::floor(y0 / cell_) + 1);
    if (!(span <= 4096)) {
      overflow_.push_back(id);
      return;
    }
    for (auto i = coord(x0); i <= coord(x1); ++i)
      for (auto j = coord(y0); j <= coord(y1); ++j) buckets_[key(i, j)].push_back(id);
  }

  /// Visits ids in buckets overlapping the square of half-width r around p.
  /// An id may be visited more than once.
  template <class Fn>
  void visit(const Point& p, double r, Fn&& fn) const {
    for (auto id : overflow_) fn(id);
    for (auto i = coord(p.x - r); i <= coord(p.x + r); ++i)
      for (auto j = coord(p.y - r); j <= coord(p.y + r); ++j) {
        auto it = buckets_.find(key(i, j));
        if (it == buckets_.end()) continue;
        for (auto id : it->second) fn(id);
      }
  }

 private:
  double cell_;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> buckets_;
  std::vector<std::size_t> overflow_;
};

/// Nearest-point queries over a fixed point set.
class PointIndex {
 public:
  PointIndex(std::vector<Point> pts, double cell) : pts_(std::move(pts)), grid_(cell) {
    for (std::size_t k = 0; k < pts_.size(); ++k) grid_.insert_box(pts_[k].x, pts_[k].y, pts_[k].x, pts_[k].y, k);
  }

  const std::vector<Point>& points() const { return pts_; }
  bool empty() const { return pts_.empty(); }

  /// Distance to the nearest point, or +inf if none lies within r.
  double nearest_within(const Point& p, double r) const {
    double best = std::numeric_limits<double>::infinity();
    grid_.visit(p, r, [&](std::size_t k) {
      double d = distance(p, pts_[k]);
      if (d <= r && d < best) best = d;
    });
    return best;
  }

  /// Distance to the nearest point; grows the search radius until found.
  double nearest(const Point& p) const {
    if (pts_.empty()) return std::numeric_limits<double>::infinity();
    for (double r = grid_.cell(); r <= 64 * grid_.cell(); r *= 2) {
      double d = nearest_within(p, r);
      if (std::isfinite(d)) return d;
    }
    return brute(p);
  }

  template <class Fn>
  void within(const Point& p, double r, Fn&& fn) const {
    grid_.visit(p, r, [&](std::size_t k) {
      if (distance(p, pts_[k]) <= r) fn(k);
    });
  }

 private:
  double brute(const Point& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : pts_) best = std::min(best, distance(p, q));
    return best;
  }

  std::vector<Point> pts_;
  BucketGrid grid_;
};

/// Nearest-distance queries against the segments and isolated points of a
/// PolylineSet.
class SegmentIndex {
 public:
  SegmentIndex(const PolylineSet& s, double cell) : grid_(cell) {
    s.for_each_segment([&](const Point& a, const Point& b) { add(a, b); });
    for (const auto& p : s.points) add(p, p);
  }
  SegmentIndex(const std::vector<std::pair<Point, Point>>& segs, double cell) : grid_(cell) {
    for (const auto& [a, b] : segs) add(a, b);
  }

  bool empty() const { return segs_.empty(); }
  std::size_t size() const { return segs_.size(); }

  double nearest_within(const Point& p, double r) const {
    double best = std::numeric_limits<double>::infinity();
    grid_.visit(p, r, [&](std::size_t k) {
      double d = point_segment_distance(p, segs_[k].first, segs_[k].second);
      if (d <= r && d < best) best = d;
    });
    return best;
  }

  double nearest(const Point& p) const {
    if (segs_.empty()) return std::numeric_limits<double>::infinity();
    for (double r = grid_.cell(); r <= 64 * grid_.cell(); r *= 2) {
      double d = nearest_within(p, r);
      if (std::isfinite(d)) return d;
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : segs_) best = std::min(best, point_segment_distance(p, a, b));
    return best;
  }

  /// True when segment pq touches any indexed segment.
  bool crosses(const Point& p, const Point& q) const {
    bool hit = false;
    double x0 = std::min(p.x, q.x), x1 = std::max(p.x, q.x);
    double y0 = std::min(p.y, q.y), y1 = std::max(p.y, q.y);
    Point c{0.5 * (x0 + x1), 0.5 * (y0 + y1)};
    double r = 0.5 * std::max(x1 - x0, y1 - y0);
    grid_.visit(c, r, [&](std::size_t k) {
      if (!hit && segments_intersect(p, q, segs_[k].first, segs_[k].second)) hit = true;
    });
    return hit;
  }

 private:
  void add(const Point& a, const Point& b) {
    std::size_t id = segs_.size();
    segs_.emplace_back(a, b);
    grid_.insert_box(std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y), id);
  }

  std::vector<std::pair<Point, Point>> segs_;
  BucketGrid grid_;
};

}  // namespace harmap
