#pragma once

// Cluster values at infinity: persistent circle-image samples, sequences
// z_n -> infinity with f(z_n) -> w0, and their refinement off the
// partitioning set.

#include "harmap/critical.hpp"
#include "harmap/lift.hpp"
#include "harmap/parallel.hpp"
#include "harmap/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace harmap {

class ClusterError : public std::runtime_error {
 public:
  enum class Kind { precondition, not_a_cluster_point, refinement_failure };
  ClusterError(Kind k, const std::string& what) : std::runtime_error(what), kind_(k) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

inline const char* to_string(ClusterError::Kind k) {
  switch (k) {
    case ClusterError::Kind::precondition: return "precondition";
    case ClusterError::Kind::not_a_cluster_point: return "not-a-cluster-point-at-this-scale";
    case ClusterError::Kind::refinement_failure: return "refinement-failure";
  }
  return "?";
}

template <class Real>
struct Box {
  Real xmin, xmax, ymin, ymax;

  bool contains(const Vec2<Real>& p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
  /// Bounding box of a, b, grown by pad, meets the box.
  bool meets(const Vec2<Real>& a, const Vec2<Real>& b, const Real& pad) const {
    using std::max;
    using std::min;
    return !(max(a.x, b.x) + pad < xmin || min(a.x, b.x) - pad > xmax || max(a.y, b.y) + pad < ymin ||
             min(a.y, b.y) - pad > ymax);
  }
};

namespace cluster_detail {

template <class Real>
struct CircleSample {
  Real theta;
  Vec2<Real> w;
  bool finite = false;
};

template <class Real>
CircleSample<Real> sample_circle(const PlanarMap& f, const Real& R, const Real& theta) {
  using std::cos;
  using std::sin;
  CircleSample<Real> s{theta, {}, false};
  try {
    s.w = f(Vec2<Real>(R * cos(theta), R * sin(theta)));
    s.finite = is_finite(s.w.x) && is_finite(s.w.y);
  } catch (const DomainFault&) {
  }
  return s;
}

/// Adaptive scan of |z| = R. Arcs are bisected while their image jumps by
/// more than `jump` and the image bounding box meets the target box (or one
/// end is not finite). `emit(sample, leaf)` receives, in angle order, every
/// sample inside the box and, with leaf = true, the midpoint of every arc
/// that hit the depth limit still meeting the box.
template <class Real, class Emit>
void scan_circle(const PlanarMap& f, const Real& R, int n, const Box<Real>& box, const Real& jump, int max_depth,
                 Emit&& emit) {
  const Real two_pi = 2 * pi_value<Real>();
  std::function<void(const CircleSample<Real>&, const CircleSample<Real>&, int)> arc;
  arc = [&](const CircleSample<Real>& a, const CircleSample<Real>& b, int depth) {
    bool split;
    if (a.finite && b.finite) {
      split = distance(a.w, b.w) > jump && box.meets(a.w, b.w, jump);
    } else {
      split = a.finite != b.finite && depth < std::min(max_depth, 48);
    }
    if (!split) return;
    Real mid = (a.theta + b.theta) / 2;
    if (depth >= max_depth || mid == a.theta || mid == b.theta) {
      if (a.finite && b.finite) emit(sample_circle(f, R, mid), true);
      return;
    }
    auto m = sample_circle(f, R, mid);
    arc(a, m, depth + 1);
    if (m.finite && box.contains(m.w)) emit(m, false);
    arc(m, b, depth + 1);
  };
  auto first = sample_circle(f, R, Real(0));
  auto prev = first;
  if (prev.finite && box.contains(prev.w)) emit(prev, false);
  for (int k = 1; k <= n; ++k) {
    auto cur = k == n ? CircleSample<Real>{two_pi, first.w, first.finite} : sample_circle(f, R, two_pi * k / n);
    arc(prev, cur, 0);
    if (k < n && cur.finite && box.contains(cur.w)) emit(cur, false);
    prev = cur;
  }
}

}  // namespace cluster_detail

struct ClusterOptions {
  int samples = 4096;          // per listed radius
  int between_samples = 1024;  // per densifying circle
  /// Densifying circles between consecutive listed radii of the top half,
  /// 2^k - 1 of them with spacing at most max_dr.
  double max_dr = 0.1;
  /// 0 picks 2x the image cell size.
  double eps_persist = 0.0;
  int max_depth = 40;
  int threads = 1;
};

struct ClusterSamples {
  PolylineSet cloud;  // persistent points, source cluster_estimate
  std::vector<double> circles;
  std::size_t raw_points = 0;
  double eps_persist = 0.0;
};

/// Radii actually scanned: the top half of the list (index >= n/2) with
/// densifying circles between consecutive entries.
inline std::vector<double> cluster_circles(const std::vector<double>& radii, double max_dr) {
  std::vector<double> out;
  for (std::size_t k = radii.size() / 2; k < radii.size(); ++k) {
    if (!out.empty()) {
      double a = radii[k - 1], b = radii[k];
      std::size_t m = 1;
      while ((b - a) / static_cast<double>(m) > max_dr && m < (std::size_t{1} << 24)) m *= 2;
      for (std::size_t i = 1; i < m; ++i) out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(m));
    }
    out.push_back(radii[k]);
  }
  return out;
}

/// Points of f on circles |z| = R inside wwindow that persist: a point
/// counts when some point from a different circle lies within eps_persist.
/// Samples are merged on an eps/4 lattice; a lattice cell keeps its first
/// point (circle order, then angle) and remembers whether a second circle
/// reached it.
inline ClusterSamples cluster_samples(const PlanarMap& f, const std::vector<double>& radii, const Window& wwindow,
                                      const ClusterOptions& opt = {}) {
  if (radii.size() < 3) throw ClusterError(ClusterError::Kind::precondition, "need at least three radii");
  for (std::size_t k = 0; k < radii.size(); ++k)
    if (!(radii[k] > 0) || (k > 0 && !(radii[k] > radii[k - 1])))
      throw ClusterError(ClusterError::Kind::precondition, "radii must be positive and strictly increasing");
  wwindow.validate();

  ClusterSamples out;
  out.eps_persist = opt.eps_persist > 0 ? opt.eps_persist : 2 * std::max(wwindow.dx(), wwindow.dy());
  out.circles = cluster_circles(radii, opt.max_dr);
  const double eps = out.eps_persist, q = eps / 4;
  const Box<double> box{wwindow.xmin, wwindow.xmax, wwindow.ymin, wwindow.ymax};

  struct Cell {
    Point rep;
    std::size_t circle;
    bool multi;
  };
  auto key_of = [&](long long i, long long j) { return (i << 32) ^ (j & 0xffffffffLL); };
  std::unordered_map<long long, std::size_t> where;
  std::vector<std::pair<long long, long long>> order;
  std::vector<Cell> cells;

  const std::size_t batch = 64;
  for (std::size_t start = 0; start < out.circles.size(); start += batch) {
    std::size_t stop = std::min(out.circles.size(), start + batch);
    std::vector<std::vector<Point>> found(stop - start);
    parallel_for(stop - start, opt.threads, [&](std::size_t b) {
      std::size_t c = start + b;
      bool listed = std::find(radii.begin(), radii.end(), out.circles[c]) != radii.end();
      cluster_detail::scan_circle<double>(f, out.circles[c], listed ? opt.samples : opt.between_samples, box, eps / 2,
                                          opt.max_depth, [&](const cluster_detail::CircleSample<double>& s, bool leaf) {
                                            if (!leaf) found[b].push_back(s.w);
                                          });
    });
    for (std::size_t b = 0; b < found.size(); ++b) {
      out.raw_points += found[b].size();
      for (const auto& p : found[b]) {
        long long i = std::llround(std::floor((p.x - wwindow.xmin) / q));
        long long j = std::llround(std::floor((p.y - wwindow.ymin) / q));
        auto [it, fresh] = where.try_emplace(key_of(i, j), cells.size());
        if (fresh) {
          cells.push_back({p, start + b, false});
          order.emplace_back(i, j);
        } else if (cells[it->second].circle != start + b) {
          cells[it->second].multi = true;
        }
      }
    }
  }

  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Cell& c = cells[k];
    bool persistent = c.multi;
    for (long long di = -4; di <= 4 && !persistent; ++di)
      for (long long dj = -4; dj <= 4 && !persistent; ++dj) {
        auto it = where.find(key_of(order[k].first + di, order[k].second + dj));
        if (it == where.end() || it->second == k) continue;
        const Cell& o = cells[it->second];
        if ((o.multi || o.circle != c.circle) && distance(o.rep, c.rep) <= eps) persistent = true;
      }
    if (persistent) out.cloud.points.push_back(c.rep);
  }
  out.cloud.source = Source::cluster_estimate;
  return out;
}

// ---------------------------------------------------------------------------
// Sequences tending to infinity with images converging to w0.

template <class Real>
struct ClusterSequence {
  std::vector<Vec2<Real>> points;
  std::vector<Vec2<Real>> images;
  std::vector<Real> distances;  // |f(z_k) - w0|
  std::vector<bool> exact;      // z_k solved f(z) = w0 outright
  std::string strategy;
};

struct SequenceOptions {
  int n = 12;
  double r0 = 4.0;
  double ratio = 2.0;
  int samples = 4096;
  int max_depth = 220;
  /// Half-width of the square around w0 that circle images are scanned in.
  double box = 1.0;
  int max_candidates = 32;
};

namespace cluster_detail {

/// Gauss-Newton on the angle: minimises |f(R e^{i theta}) - w0|^2.
template <class Real>
std::pair<Real, Real> circle_gauss_newton(const PlanarMap& f, const Real& R, Real theta, const Vec2<Real>& w0) {
  using std::abs;
  using std::cos;
  using std::sin;
  auto eval = [&](const Real& t) -> std::optional<std::pair<MapJet<Real>, Vec2<Real>>> {
    try {
      Vec2<Real> z(R * cos(t), R * sin(t));
      auto j = f.jet(z);
      if (!is_finite(j.value.x) || !is_finite(j.value.y)) return std::nullopt;
      return std::make_pair(j, Vec2<Real>(-z.y, z.x));
    } catch (const DomainFault&) {
      return std::nullopt;
    }
  };
  auto cur = eval(theta);
  if (!cur) return {theta, Real(std::numeric_limits<double>::infinity())};
  Real d = distance(cur->first.value, w0);
  for (int it = 0; it < 400; ++it) {
    const auto& [j, dz] = *cur;
    Vec2<Real> ft(j.ux * dz.x + j.uy * dz.y, j.vx * dz.x + j.vy * dz.y);
    Real n2 = dot(ft, ft);
    if (n2 == 0) break;
    Real step = -dot(j.value - w0, ft) / n2;
    bool moved = false;
    for (int ls = 0; ls < 80; ++ls) {
      Real t = theta + step;
      if (t == theta) break;
      auto nx = eval(t);
      if (nx) {
        Real dn = distance(nx->first.value, w0);
        if (dn < d) {
          theta = t;
          cur = nx;
          d = dn;
          moved = true;
          break;
        }
      }
      step /= 2;
    }
    if (!moved) break;
  }
  return {theta, d};
}

/// Residual below which |f(z) - w0| is rounding noise: a few ulps of
/// max(1, |w0|, Lambda(z) |z|).
template <class Real>
Real distance_floor(const PlanarMap& f, const Vec2<Real>& z, const Vec2<Real>& w0) {
  using std::max;
  using std::pow;
  Real scale = max(Real(1), norm(w0));
  try {
    scale = max(scale, big_lambda(f.jet(z)) * norm(z));
  } catch (const DomainFault&) {
  }
  return scale * pow(Real(10), Real(2 - working_digits<Real>()));
}

template <class Real>
void check_monotone(const PlanarMap& f, const ClusterSequence<Real>& s, const Vec2<Real>& w0) {
  for (std::size_t k = 1; k < s.points.size(); ++k) {
    if (!(norm(s.points[k]) > norm(s.points[k - 1])))
      throw ClusterError(ClusterError::Kind::not_a_cluster_point, "sequence moduli are not increasing");
    if (s.distances[k] > s.distances[k - 1] && s.distances[k] > distance_floor(f, s.points[k], w0))
      throw ClusterError(ClusterError::Kind::not_a_cluster_point,
                         "distances to w0 stop decreasing at index " + std::to_string(k));
  }
}

}  // namespace cluster_detail

/// Circle-solve: on |z| = r0 ratio^k find the circle point whose image is
/// nearest w0, then try Newton for an exact preimage of w0 of comparable
/// modulus. Distances must decrease (down to a precision floor).
template <class Real>
ClusterSequence<Real> sequence_to_cluster(const PlanarMap& f, const Vec2<Real>& w0, const SequenceOptions& opt = {}) {
  using std::abs;
  using std::cos;
  using std::sin;
  ClusterSequence<Real> seq;
  seq.strategy = "circle-solve";
  const Real half(opt.box);
  const Box<Real> box{w0.x - half, w0.x + half, w0.y - half, w0.y + half};
  Real R(opt.r0);
  for (int k = 0; k < opt.n; ++k, R *= Real(opt.ratio)) {
    // One candidate per run of angularly adjacent hits, so a long run on one
    // branch cannot crowd out isolated crossings elsewhere.
    std::vector<std::pair<Real, Real>> cand;  // (distance, theta)
    const Real gap = 4 * pi_value<Real>() / opt.samples;
    Real last(-1);
    cluster_detail::scan_circle<Real>(f, R, opt.samples, box, half / 8, opt.max_depth,
                                      [&](const cluster_detail::CircleSample<Real>& s, bool) {
                                        Real d = distance(s.w, w0);
                                        if (cand.empty() || s.theta - last > gap)
                                          cand.emplace_back(d, s.theta);
                                        else if (d < cand.back().first)
                                          cand.back() = {d, s.theta};
                                        last = s.theta;
                                      });
    if (cand.empty())
      throw ClusterError(ClusterError::Kind::not_a_cluster_point,
                         "no image point near w0 on |z| = " + std::to_string(to_double(R)));
    std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    if (cand.size() > static_cast<std::size_t>(opt.max_candidates)) cand.resize(opt.max_candidates);
    const Real prev = seq.points.empty() ? Real(0) : norm(seq.points.back());
    Real best_d(std::numeric_limits<double>::infinity());
    Vec2<Real> z;
    bool exact = false;
    for (const auto& [d0, t0] : cand) {
      auto [t, d] = cluster_detail::circle_gauss_newton(f, R, t0, w0);
      Vec2<Real> zc(R * cos(t), R * sin(t));
      bool ex = false;
      const Real floor = cluster_detail::distance_floor(f, zc, w0);
      if (d > floor) {
        // an exact preimage of comparable modulus beats any circle point
        auto root = newton_solve<Real>(f, zc, w0, floor, 80);
        if (root && norm(*root) > R / 2 && norm(*root) < 2 * R && norm(*root) > prev) {
          zc = *root;
          d = distance(f(zc), w0);
          ex = true;
        }
      }
      if (d < best_d) {
        best_d = d;
        z = zc;
        exact = ex;
      }
    }
    if (!is_finite(best_d))
      throw ClusterError(ClusterError::Kind::not_a_cluster_point,
                         "no finite image near w0 on |z| = " + std::to_string(to_double(R)));
    Vec2<Real> w = f(z);
    seq.points.push_back(z);
    seq.images.push_back(w);
    seq.distances.push_back(distance(w, w0));
    seq.exact.push_back(exact);
  }
  cluster_detail::check_monotone(f, seq, w0);
  return seq;
}

/// User-curve strategy: z_k = curve(t_k).
template <class Real>
ClusterSequence<Real> sequence_from_curve(const PlanarMap& f, const Vec2<Real>& w0,
                                          const std::function<Vec2<Real>(const Real&)>& curve,
                                          const std::vector<Real>& ts) {
  ClusterSequence<Real> seq;
  seq.strategy = "user-curve";
  for (const auto& t : ts) {
    Vec2<Real> z = curve(t);
    Vec2<Real> w = f(z);
    seq.points.push_back(z);
    seq.images.push_back(w);
    seq.distances.push_back(distance(w, w0));
    seq.exact.push_back(false);
  }
  if (seq.points.empty()) throw ClusterError(ClusterError::Kind::precondition, "empty curve schedule");
  cluster_detail::check_monotone(f, seq, w0);
  return seq;
}

// ---------------------------------------------------------------------------
// Moving a sequence off the partitioning set.

struct RefineOptions {
  /// Resolution of the supplied partition set. When positive, a neighbourhood
  /// whose probes all lie within it of the partition counts as filled.
  double resolution = 0.0;
  int probes = 16;
  int rings = 40;
  std::optional<double> j_min;
};

template <class Real>
struct RefinedSequence {
  std::vector<std::size_t> indices;  // n - 1 for each kept term
  std::vector<Vec2<Real>> original;
  std::vector<Vec2<Real>> points;
  std::vector<Vec2<Real>> images;
  std::vector<Vec2<Real>> targets;  // w_n = f(z_n)
  std::vector<Real> eps_n;
  std::vector<Real> shift;   // |zeta_n - z_n|
  std::vector<Real> margin;  // distance of f(zeta_n) to the partition set
  std::size_t dropped = 0;   // terms with |w_n - w0| >= eps
};

namespace cluster_detail {

template <class Real>
Real distance_to_set(const Vec2<Real>& p, const PolylineSet& s) {
  Real best(std::numeric_limits<double>::infinity());
  s.for_each_segment([&](const Point& a, const Point& b) {
    Real d = point_segment_distance(p, Vec2<Real>(a), Vec2<Real>(b));
    if (d < best) best = d;
  });
  for (const auto& q : s.points) {
    Real d = distance(p, Vec2<Real>(q));
    if (d < best) best = d;
  }
  return best;
}

}  // namespace cluster_detail

/// Replaces each z_n by a nearby zeta_n, |zeta_n - z_n| <= 1/n, with
/// f(zeta_n) in B(w_n, eps_n), eps_n = min(eps - |w_n - w0|, |w_n - w0|) / 2,
/// |J| above the lift threshold and f(zeta_n) off the partition set.
template <class Real>
RefinedSequence<Real> off_partition_refine(const PlanarMap& f, const ClusterSequence<Real>& seq,
                                           const PolylineSet& partition, const Vec2<Real>& w0, double eps,
                                           const RefineOptions& opt = {}) {
  using std::abs;
  using std::cos;
  using std::pow;
  using std::sin;
  if (!(eps > 0)) throw ClusterError(ClusterError::Kind::precondition, "eps must be positive");
  BasicLiftOptions<Real> lo;
  lo.j_min = opt.j_min;
  const Real jfac = lift_detail::j_min_factor(lo);
  const bool has_partition = !partition.empty();
  SegmentIndex seg(partition, opt.resolution > 0 ? opt.resolution : 1.0);

  RefinedSequence<Real> out;
  for (std::size_t k = 0; k < seq.points.size(); ++k) {
    const Real n(static_cast<double>(k + 1));
    const Vec2<Real>& z = seq.points[k];
    const Vec2<Real> wn = seq.images[k];
    const Real dn = distance(wn, w0);
    if (!(dn < Real(eps))) {
      ++out.dropped;
      continue;
    }
    using std::min;
    const Real en = min(Real(eps) - dn, dn) / 2;
    if (!(en > 0))
      throw ClusterError(ClusterError::Kind::refinement_failure,
                         "term " + std::to_string(k + 1) + " maps onto w0; no room to move off the partition set");
    if (opt.resolution > 0 && has_partition) {
      // Filled neighbourhood: every probe around w_n within resolution of the set.
      Point c(wn);
      double r = 1.5 * opt.resolution;
      bool filled = true;
      for (int p = 0; p < opt.probes && filled; ++p) {
        double a = 2 * M_PI * p / opt.probes;
        Point q{c.x + r * std::cos(a), c.y + r * std::sin(a)};
        filled = seg.nearest(q) < opt.resolution;
      }
      if (filled)
        throw ClusterError(ClusterError::Kind::refinement_failure,
                           "partition set fills the neighbourhood of term " + std::to_string(k + 1));
    }

    auto accept = [&](const Vec2<Real>& zeta, Vec2<Real>& img, Real& margin) {
      try {
        auto j = f.jet(zeta);
        img = j.value;
        if (!(distance(img, wn) <= en)) return false;
        Real lam = big_lambda(j);
        if (!(abs(j.jacobian()) > jfac * lam * lam)) return false;
        margin = cluster_detail::distance_to_set(img, partition);
        return margin > 0;
      } catch (const DomainFault&) {
        return false;
      }
    };
    Vec2<Real> img;
    Real margin;
    std::optional<Vec2<Real>> found;
    if (accept(z, img, margin)) found = z;
    for (int ring = 1; ring <= opt.rings && !found; ++ring) {
      Real r = Real(1) / n / pow(Real(2), Real(ring));
      for (int p = 0; p < opt.probes && !found; ++p) {
        Real a = 2 * pi_value<Real>() * Real(p) / Real(opt.probes);
        Vec2<Real> zeta(z.x + r * cos(a), z.y + r * sin(a));
        if (accept(zeta, img, margin)) found = zeta;
      }
    }
    if (!found)
      throw ClusterError(ClusterError::Kind::refinement_failure,
                         "no admissible point near term " + std::to_string(k + 1));
    out.indices.push_back(k);
    out.original.push_back(z);
    out.points.push_back(*found);
    out.images.push_back(img);
    out.targets.push_back(wn);
    out.eps_n.push_back(en);
    out.shift.push_back(distance(*found, z));
    out.margin.push_back(margin);
  }
  return out;
}

}  // namespace harmap
