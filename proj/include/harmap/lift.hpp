#pragma once

// Preimages by multi-start Newton, and lifts of image paths by
// predictor-corrector continuation.

#include "harmap/field.hpp"
#include "harmap/geometry.hpp"
#include "harmap/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace harmap {

/// Decimal digits carried by Real (16 for double).
template <class Real>
int working_digits() {
  if constexpr (is_builtin_float_v<Real>) {
    return std::numeric_limits<Real>::digits10 + 1;
  } else {
    return static_cast<int>(Real::default_precision());
  }
}

/// Newton step for f(z) = target: solves Df(z) dz = -(f(z) - target).
template <class Real>
struct NewtonStep {
  Vec2<Real> dz;
  Vec2<Real> residual;  // f(z) - target
  MapJet<Real> jet;
  bool singular = false;
};

template <class Real>
Vec2<Real> solve_jacobian(const MapJet<Real>& j, const Vec2<Real>& rhs, bool* singular = nullptr) {
  Real det = j.jacobian();
  if (det == 0) {
    if (singular) *singular = true;
    return {Real(0), Real(0)};
  }
  if (singular) *singular = false;
  return {(j.vy * rhs.x - j.uy * rhs.y) / det, (-j.vx * rhs.x + j.ux * rhs.y) / det};
}

template <class Real>
NewtonStep<Real> newton_step(const PlanarMap& f, const Vec2<Real>& z, const Vec2<Real>& target) {
  NewtonStep<Real> s;
  s.jet = f.jet(z);
  s.residual = s.jet.value - target;
  s.dz = -solve_jacobian(s.jet, s.residual, &s.singular);
  return s;
}

/// Predictor increment: the linear solve Df(z) dz = dgamma.
template <class Real>
Vec2<Real> predictor_step(const PlanarMap& f, const Vec2<Real>& z, const Vec2<Real>& dgamma) {
  return solve_jacobian(f.jet(z), dgamma);
}

/// Damped Newton for f(z) = w from a seed. Returns the converged point, or
/// nothing if the residual does not reach tol.
template <class Real>
std::optional<Vec2<Real>> newton_solve(const PlanarMap& f, Vec2<Real> z, const Vec2<Real>& w, const Real& tol,
                                       int max_iter = 60) {
  try {
    auto s = newton_step(f, z, w);
    Real r = norm(s.residual);
    for (int it = 0; it < max_iter; ++it) {
      if (r <= tol) {
        // Polish: keep stepping while the residual strictly improves.
        for (int k = 0; k < 4; ++k) {
          if (s.singular) break;
          Vec2<Real> zn = z + s.dz;
          auto sn = newton_step(f, zn, w);
          Real rn = norm(sn.residual);
          if (!(rn < r)) break;
          z = zn;
          s = sn;
          r = rn;
        }
        return z;
      }
      if (s.singular) return std::nullopt;
      Real lambda(1);
      bool moved = false;
      for (int ls = 0; ls < 30; ++ls) {
        Vec2<Real> zn = z + lambda * s.dz;
        try {
          auto sn = newton_step(f, zn, w);
          Real rn = norm(sn.residual);
          if (rn < r) {
            z = zn;
            s = sn;
            r = rn;
            moved = true;
            break;
          }
        } catch (const DomainFault&) {
        }
        lambda /= 2;
      }
      if (!moved) return r <= tol ? std::optional<Vec2<Real>>(z) : std::nullopt;
    }
    if (r <= tol) return z;
  } catch (const DomainFault&) {
  }
  return std::nullopt;
}

struct PreimageOptions {
  double tol = 1e-10;
  bool jitter = true;
  int threads = 1;
  int max_iter = 60;
};

/// Roots of f(z) = w in a window. Completeness is relative to the window and
/// the seed grid only; `window_limited` is always set.
struct PreimageSet {
  std::vector<Point> points;
  bool window_limited = true;
  int seeds = 0;
  Window window;
};

/// Merges roots closer than their error radius: 10 tol times the
/// conditioning |Df^{-1}| = Lambda / |J| at the root, so ill-conditioned
/// roots near folds are not counted twice. Output sorted lexicographically.
inline void dedup_roots(const PlanarMap& f, std::vector<Point>& roots, double tol) {
  std::vector<std::pair<Point, double>> kept;
  for (const auto& r : roots) {
    double rad = 10 * tol;
    try {
      auto j = f.jet(r);
      double jac = std::abs(j.jacobian()), lam = big_lambda(j);
      rad *= jac > 0 ? std::max(1.0, lam / jac) : 1e6;
    } catch (const DomainFault&) {
    }
    bool dup = false;
    for (const auto& [k, kr] : kept)
      if (distance(r, k) <= std::max(rad, kr)) {
        dup = true;
        break;
      }
    if (!dup) kept.emplace_back(r, rad);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return lex_less(a.first, b.first); });
  roots.clear();
  for (const auto& [k, kr] : kept) roots.push_back(k);
}

/// Seeds are the window's nx by ny nodes, plus a second pass shifted by a
/// fixed fraction of a cell when jitter is on.
inline PreimageSet preimages(const PlanarMap& f, const Point& w, const Window& win, const PreimageOptions& opt = {}) {
  win.validate();
  if (!(opt.tol > 0)) throw std::invalid_argument("preimage tolerance must be positive");
  const int passes = opt.jitter ? 2 : 1;
  const std::size_t per = static_cast<std::size_t>(win.nx) * win.ny;
  std::vector<std::optional<Point>> found(per * passes);
  parallel_for(static_cast<std::size_t>(passes * win.ny), opt.threads, [&](std::size_t row) {
    int pass = static_cast<int>(row / win.ny);
    int j = static_cast<int>(row % win.ny);
    double ox = pass ? 0.381966 * win.dx() : 0.0, oy = pass ? 0.618034 * win.dy() : 0.0;
    for (int i = 0; i < win.nx; ++i) {
      Point seed = win.node(i, j) + Point{ox, oy};
      auto z = newton_solve<double>(f, seed, w, opt.tol, opt.max_iter);
      if (z && win.contains(*z)) found[pass * per + static_cast<std::size_t>(j) * win.nx + i] = *z;
    }
  });
  PreimageSet out;
  out.seeds = static_cast<int>(per * passes);
  out.window = win;
  for (const auto& z : found)
    if (z) out.points.push_back(*z);
  dedup_roots(f, out.points, opt.tol);
  return out;
}

enum class LiftStatus { complete, hit_critical, left_window, newton_diverged };

inline const char* to_string(LiftStatus s) {
  switch (s) {
    case LiftStatus::complete: return "complete";
    case LiftStatus::hit_critical: return "hit-critical";
    case LiftStatus::left_window: return "left-window";
    case LiftStatus::newton_diverged: return "newton-diverged";
  }
  return "?";
}

template <class Real>
struct BasicLiftResult {
  BasicPolyPath<Real> lifted;
  std::vector<Vec2<Real>> targets;       // image point each lifted vertex was solved for
  std::vector<std::size_t> vertex_index;  // lifted index of each gamma vertex reached
  LiftStatus status = LiftStatus::complete;
  double max_residual = 0.0;
  double min_jacobian_ratio = std::numeric_limits<double>::infinity();  // min |J| / Lambda^2
};

using LiftResult = BasicLiftResult<double>;

template <class Real>
struct BasicLiftOptions {
  double tol = 1e-10;
  std::optional<Window> window;
  /// Critical threshold factor; |J| < j_min * Lambda^2 stops the lift. When
  /// unset it is 1e-10 in double and 10^(6 - digits) at higher precision,
  /// the same margin above unit roundoff.
  std::optional<double> j_min;
  int max_newton = 5;
  std::size_t max_steps = 2000000;
  double max_image_step = std::numeric_limits<double>::infinity();
  /// With an anchor, steps are at most anchor_fraction of the distance from
  /// the current target to the anchor, and the residual tolerance is
  /// tol * min(1, |target - anchor|).
  std::optional<Vec2<Real>> anchor;
  double anchor_fraction = 0.5;
  /// Optional wall-clock budget checked between steps.
  std::optional<double> deadline_seconds;
};

using LiftOptions = BasicLiftOptions<double>;

namespace lift_detail {

template <class Real>
Real j_min_factor(const BasicLiftOptions<Real>& opt) {
  if (opt.j_min) return Real(*opt.j_min);
  int d = working_digits<Real>();
  if (d <= 16) return Real(1e-10);
  using std::pow;
  return pow(Real(10), Real(6 - d));
}

inline double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace lift_detail

template <class Real>
BasicLiftResult<Real> lift_path(const PlanarMap& f, const BasicPolyPath<Real>& gamma, const Vec2<Real>& z0,
                                const BasicLiftOptions<Real>& opt = {}) {
  using std::abs;
  BasicLiftResult<Real> res;
  if (gamma.vertices.empty()) return res;
  const Real tol(opt.tol);
  const Real jfac = lift_detail::j_min_factor(opt);
  const double t_start = lift_detail::now_seconds();

  auto tol_at = [&](const Vec2<Real>& target) {
    if (!opt.anchor) return tol;
    Real d = distance(target, *opt.anchor);
    return d < 1 ? tol * d : tol;
  };
  auto record = [&](const Vec2<Real>& z, const Vec2<Real>& target, const Vec2<Real>& fz) {
    res.lifted.vertices.push_back(z);
    res.targets.push_back(target);
    res.max_residual = std::max(res.max_residual, to_double(distance(fz, target)));
  };
  // |J| against the largest Lambda^2 over the most recent vertices, so a
  // shrinking scale near a branch point still registers as degenerate.
  std::vector<Real> recent_l2;
  auto critical_ratio = [&](const MapJet<Real>& j) {
    Real lam = big_lambda(j);
    recent_l2.push_back(lam * lam);
    if (recent_l2.size() > 16) recent_l2.erase(recent_l2.begin());
    Real l2 = *std::max_element(recent_l2.begin(), recent_l2.end());
    return l2 == 0 ? Real(0) : abs(j.jacobian()) / l2;
  };

  MapJet<Real> jet;
  try {
    jet = f.jet(z0);
  } catch (const DomainFault&) {
    res.status = LiftStatus::newton_diverged;
    return res;
  }
  record(z0, gamma.vertices[0], jet.value);
  res.vertex_index.push_back(0);
  if (distance(jet.value, gamma.vertices[0]) > tol_at(gamma.vertices[0])) {
    res.status = LiftStatus::newton_diverged;
    return res;
  }
  {
    Real ratio = critical_ratio(jet);
    res.min_jacobian_ratio = to_double(ratio);
    if (ratio < jfac) {
      res.status = LiftStatus::hit_critical;
      return res;
    }
  }

  Vec2<Real> z = z0;
  Real jsign = jet.jacobian();
  Real step_len(-1);  // image-plane step carried across segments
  std::size_t steps = 0;

  for (std::size_t i = 0; i + 1 < gamma.vertices.size(); ++i) {
    const Vec2<Real>& a = gamma.vertices[i];
    const Vec2<Real>& b = gamma.vertices[i + 1];
    const Vec2<Real> back = a - b;
    const Real seg_len = norm(back);
    if (seg_len == 0) {
      res.vertex_index.push_back(res.lifted.size() - 1);
      continue;
    }
    Real r(1);  // remaining fraction: target = b + r * (a - b)
    Vec2<Real> current_target = a;
    if (step_len < 0) step_len = seg_len;
    while (r > 0) {
      if (++steps > opt.max_steps ||
          (opt.deadline_seconds && lift_detail::now_seconds() - t_start > *opt.deadline_seconds)) {
        res.status = LiftStatus::newton_diverged;
        return res;
      }
      Real len = step_len;
      if (std::isfinite(opt.max_image_step) && len > Real(opt.max_image_step)) len = Real(opt.max_image_step);
      if (opt.anchor) {
        Real cap = Real(opt.anchor_fraction) * distance(current_target, *opt.anchor);
        if (len > cap) len = cap;
      }
      Real h = len / seg_len;
      bool accepted = false;
      for (int attempt = 0; attempt < 200 && !accepted; ++attempt) {
        Real r_new = h >= r ? Real(0) : r - h;
        Vec2<Real> target = r_new == 0 ? b : b + r_new * back;
        Real tl = tol_at(target);
        Vec2<Real> zt = z;
        bool ok = false;
        int iters = 0;
        try {
          Real prev_dz(-1);
          for (iters = 1; iters <= opt.max_newton; ++iters) {
            auto s = newton_step(f, zt, target);
            if (s.singular) break;
            Real dzn = norm(s.dz);
            // Contraction guard against drifting to another sheet.
            if (prev_dz >= 0 && dzn > prev_dz / 2 && dzn > 0) break;
            prev_dz = dzn;
            zt = zt + s.dz;
            MapJet<Real> jt = f.jet(zt);
            if (distance(jt.value, target) <= tl) {
              jet = jt;
              ok = true;
              break;
            }
          }
        } catch (const DomainFault&) {
          ok = false;
        }
        if (ok && jet.jacobian() * jsign < 0) ok = false;  // crossed a fold
        if (!ok) {
          h /= 2;
          if (h * seg_len == 0) break;
          continue;
        }
        accepted = true;
        z = zt;
        r = r_new;
        current_target = target;
        record(z, target, jet.value);
        Real ratio = critical_ratio(jet);
        double rd = to_double(ratio);
        if (rd < res.min_jacobian_ratio) res.min_jacobian_ratio = rd;
        if (ratio < jfac) {
          res.status = LiftStatus::hit_critical;
          return res;
        }
        if (opt.window && !opt.window->contains(Point(z))) {
          res.status = LiftStatus::left_window;
          return res;
        }
        step_len = h * seg_len;
        if (iters <= 2) step_len *= 2;
      }
      if (!accepted) {
        // Step collapse: classify by the conditioning at the last good point.
        res.status = critical_ratio(f.jet(z)) < jfac * Real(1e6) ? LiftStatus::hit_critical
                                                                  : LiftStatus::newton_diverged;
        return res;
      }
    }
    res.vertex_index.push_back(res.lifted.size() - 1);
  }
  res.status = LiftStatus::complete;
  return res;
}

template <class Real>
struct BasicLiftSet {
  std::vector<BasicLiftResult<Real>> lifts;
  double min_separation = std::numeric_limits<double>::infinity();  // over matched gamma vertices
  PreimageSet starts;
};

using LiftSet = BasicLiftSet<double>;

/// Minimum distance between two lifts at the gamma vertices both reached.
template <class Real>
double matched_separation(const BasicLiftResult<Real>& a, const BasicLiftResult<Real>& b) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t n = std::min(a.vertex_index.size(), b.vertex_index.size());
  for (std::size_t k = 0; k < n; ++k)
    best = std::min(best, to_double(distance(a.lifted.vertices[a.vertex_index[k]], b.lifted.vertices[b.vertex_index[k]])));
  return best;
}

/// One lift per preimage of gamma's first point in the window, ordered by
/// start point. Starts are found in double and polished in Real.
template <class Real>
BasicLiftSet<Real> lift_all(const PlanarMap& f, const BasicPolyPath<Real>& gamma, const Window& win,
                            const BasicLiftOptions<Real>& opt = {}, int threads = 1) {
  BasicLiftSet<Real> out;
  if (gamma.vertices.empty()) return out;
  PreimageOptions po;
  po.tol = std::max(opt.tol, 1e-10);
  po.threads = threads;
  out.starts = preimages(f, Point(gamma.vertices[0]), win, po);
  std::vector<Vec2<Real>> starts;
  for (const auto& p : out.starts.points) {
    if constexpr (is_builtin_float_v<Real>) {
      starts.push_back(p);
    } else {
      auto z = newton_solve<Real>(f, Vec2<Real>(p), gamma.vertices[0], Real(opt.tol) * Real(1e-3), 80);
      starts.push_back(z ? *z : Vec2<Real>(p));
    }
  }
  out.lifts.resize(starts.size());
  auto digits = working_digits<Real>();
  parallel_for(starts.size(), threads, [&](std::size_t k) {
    if constexpr (is_builtin_float_v<Real>) {
      out.lifts[k] = lift_path(f, gamma, starts[k], opt);
    } else {
      PrecisionGuard guard(static_cast<unsigned>(digits));
      out.lifts[k] = lift_path(f, gamma, starts[k], opt);
    }
  });
  for (std::size_t a = 0; a < out.lifts.size(); ++a)
    for (std::size_t b = a + 1; b < out.lifts.size(); ++b)
      out.min_separation = std::min(out.min_separation, matched_separation(out.lifts[a], out.lifts[b]));
  return out;
}

}  // namespace harmap
