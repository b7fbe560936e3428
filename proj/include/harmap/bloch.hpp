#pragma once

// Bloch-type certificates for sequences z_n -> infinity: ball-sampled
// dilatation and Jacobian ratios, the derived schlicht radii, Newton checks
// that f(B(z_n, rho)) covers B(f(z_n), r1), and the four-way dichotomy
// diagnostics for a sequence with converging images.

#include "harmap/critical.hpp"
#include "harmap/lift.hpp"
#include "harmap/parallel.hpp"
#include "harmap/spatial.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace harmap {

class BlochError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// CGH radii for a bound Lambda >= 1 on the stretch of a normalised map.
inline std::pair<double, double> cgh_radii(double Lambda) {
  if (!(Lambda >= 1)) throw BlochError("Lambda must be at least 1");
  double rho0 = M_PI / (4 * (1 + Lambda));
  return {rho0, rho0 / 2};
}

inline double bloch_radius_k(double K) {
  if (!(K >= 1)) throw BlochError("K must be at least 1");
  return M_PI / (8 * std::sqrt(2.0) * std::sqrt(K) * (1 + 2 * K));
}

/// What to do with terms where J_f(z_n) <= 0.
enum class SignFix { none, conjugate, subsequence };

struct CertifyOptions {
  int radial = 24;
  int angular = 24;
  /// Ratios J(z)/J(z_n) at or above this count as unbounded.
  double j_ratio_cap = 1e12;
  SignFix sign_fix = SignFix::none;
  int threads = 1;
};

struct SequenceCertificate {
  double delta = 0;       // grid-limited distance from the terms to S
  double delta_floor = 0;  // critical-window cell diagonal; delta below it is not resolved
  double eta_sq = 0;
  double rho = 0;
  double M = 0;
  double K = std::numeric_limits<double>::infinity();
  double j_ratio_sup = 0;
  /// K sqrt(j_ratio_sup): bounds the stretch of each normalised map.
  double Lambda = std::numeric_limits<double>::infinity();
  /// K^2 j_ratio_sup: the bound on the squared stretch, kept alongside.
  double Lambda_sq = std::numeric_limits<double>::infinity();
  double r0 = 0;
  double r1 = 0;
  bool pass = false;
  std::vector<std::string> violations;
  std::vector<double> jacobians;  // J_f(z_n), after any sign fix
  std::vector<std::size_t> used;  // indices of the terms certified
  bool conjugated = false;
  int radial = 0, angular = 0;
};

namespace bloch_detail {

struct BallStats {
  double mu_sup = 0;
  double j_ratio_sup = 0;
  bool finite = true;
};

/// Closed ball sampled at the centre and on radial x angular polar nodes.
template <class Fn>
void for_ball(const Point& c, double rho, int radial, int angular, Fn&& fn) {
  fn(c);
  for (int i = 1; i <= radial; ++i) {
    double r = rho * i / radial;
    for (int j = 0; j < angular; ++j) {
      double a = 2 * M_PI * j / angular;
      fn(Point{c.x + r * std::cos(a), c.y + r * std::sin(a)});
    }
  }
}

inline BallStats ball_stats(const PlanarMap& f, const Point& zn, double jn, double rho, const CertifyOptions& opt) {
  BallStats s;
  for_ball(zn, rho, opt.radial, opt.angular, [&](const Point& z) {
    try {
      auto w = wirtinger(f, z);
      if (!std::isfinite(w.jacobian)) {
        s.finite = false;
        return;
      }
      double m = w.mu ? std::abs(*w.mu) : std::numeric_limits<double>::infinity();
      s.mu_sup = std::max(s.mu_sup, m);
      s.j_ratio_sup = std::max(s.j_ratio_sup, w.jacobian / jn);
    } catch (const DomainFault&) {
      s.finite = false;
    }
  });
  if (!s.finite) s.mu_sup = s.j_ratio_sup = std::numeric_limits<double>::infinity();
  return s;
}

/// Grid-limited distances from each term to the critical contours.
inline std::vector<double> distances_to_critical(const PlanarMap& f, const std::vector<Point>& seq,
                                                 const Window& critical_window, int threads) {
  ContourOptions co;
  co.threads = threads;
  auto S = critical_contours(f, critical_window, co);
  std::vector<double> d(seq.size(), std::numeric_limits<double>::infinity());
  if (S.empty()) return d;
  SegmentIndex idx(S, std::max(critical_window.dx(), critical_window.dy()) * 4);
  for (std::size_t k = 0; k < seq.size(); ++k) d[k] = idx.nearest(seq[k]);
  return d;
}

}  // namespace bloch_detail

inline SequenceCertificate check_conditions(const PlanarMap& map, const std::vector<Point>& seq, double rho,
                                            const Window& critical_window, const CertifyOptions& opt = {}) {
  if (!(rho > 0)) throw BlochError("rho must be positive");
  if (seq.empty()) throw BlochError("empty sequence");
  critical_window.validate();

  SequenceCertificate c;
  c.rho = rho;
  c.radial = opt.radial;
  c.angular = opt.angular;
  c.delta_floor = critical_window.cell_diagonal();

  const PlanarMap* f = &map;
  PlanarMap flipped = map;
  std::vector<double> J(seq.size());
  for (std::size_t k = 0; k < seq.size(); ++k) J[k] = map.jet(seq[k]).jacobian();
  bool any_neg = std::any_of(J.begin(), J.end(), [](double j) { return !(j > 0); });
  if (any_neg && opt.sign_fix == SignFix::conjugate) {
    flipped = map.conjugate();
    f = &flipped;
    c.conjugated = true;
    for (auto& j : J) j = -j;
  }
  for (std::size_t k = 0; k < seq.size(); ++k) {
    if (J[k] > 0 || opt.sign_fix == SignFix::none || opt.sign_fix == SignFix::conjugate) c.used.push_back(k);
  }
  for (std::size_t k : c.used)
    if (!(J[k] > 0)) c.violations.push_back("J_f(z_" + std::to_string(k + 1) + ") <= 0");

  std::vector<Point> pts;
  for (std::size_t k : c.used) {
    pts.push_back(seq[k]);
    c.jacobians.push_back(J[k]);
  }
  if (pts.empty()) {
    c.violations.push_back("no term with positive Jacobian");
    c.eta_sq = 0;
    return c;
  }

  auto dist = bloch_detail::distances_to_critical(*f, pts, critical_window, opt.threads);
  c.delta = *std::min_element(dist.begin(), dist.end());
  c.eta_sq = *std::min_element(c.jacobians.begin(), c.jacobians.end());

  std::vector<bloch_detail::BallStats> stats(pts.size());
  parallel_for(pts.size(), opt.threads, [&](std::size_t k) {
    if (c.jacobians[k] > 0) stats[k] = bloch_detail::ball_stats(*f, pts[k], c.jacobians[k], rho, opt);
    else stats[k] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), false};
  });
  for (const auto& s : stats) {
    c.M = std::max(c.M, s.mu_sup);
    c.j_ratio_sup = std::max(c.j_ratio_sup, s.j_ratio_sup);
  }

  if (c.M < 1) c.K = (1 + c.M) / (1 - c.M);
  bool ratio_ok = c.j_ratio_sup < opt.j_ratio_cap;
  if (std::isfinite(c.K) && ratio_ok) {
    c.Lambda = c.K * std::sqrt(c.j_ratio_sup);
    c.Lambda_sq = c.K * c.K * c.j_ratio_sup;
    c.r0 = M_PI / (8 * (1 + c.Lambda));
    if (c.eta_sq > 0) c.r1 = c.r0 * c.rho * std::sqrt(c.eta_sq) / std::sqrt(c.K);
  }

  if (!(c.delta > c.delta_floor)) c.violations.push_back("delta: terms within grid resolution of S");
  if (!(c.eta_sq > 0)) c.violations.push_back("eta_sq: inf J_f(z_n) is not positive");
  if (!ratio_ok) c.violations.push_back("j_ratio_sup: Jacobian ratio unbounded on the balls");
  if (!(c.M < 1)) c.violations.push_back("M: dilatation reaches 1 on the balls");
  c.pass = c.violations.empty();
  return c;
}

// ---------------------------------------------------------------------------

struct SchlichtReport {
  std::size_t hits = 0;
  std::size_t total = 0;
  double fraction = 0;
  double max_residual = 0;
  int w_grid = 0;
};

/// Solves f(zeta) = w for w on a w_grid x w_grid lattice over B(f(zn), r1),
/// requiring zeta in B(zn, rho).
inline SchlichtReport schlicht_disk_verify(const PlanarMap& f, const Point& zn, double rho, double r1, int w_grid,
                                           int threads = 1) {
  if (!(r1 > 0)) throw BlochError("r1 must be positive");
  if (w_grid < 1) throw BlochError("w_grid must be positive");
  const Point wn = f(zn);
  std::vector<Point> targets;
  for (int j = 0; j < w_grid; ++j)
    for (int i = 0; i < w_grid; ++i) {
      double s = w_grid == 1 ? 0 : -1 + 2.0 * i / (w_grid - 1);
      double t = w_grid == 1 ? 0 : -1 + 2.0 * j / (w_grid - 1);
      // lattice over the open disk, shrunk so its rim stays inside
      Point w{wn.x + 0.999 * r1 * s, wn.y + 0.999 * r1 * t};
      if (distance(w, wn) < r1) targets.push_back(w);
    }
  std::vector<double> res(targets.size(), -1);
  parallel_for(targets.size(), threads, [&](std::size_t k) {
    const Point& w = targets[k];
    double tol = 1e-11 * std::max(1.0, norm(w));
    std::vector<Point> seeds{zn};
    try {
      seeds.push_back(zn + solve_jacobian(f.jet(zn), w - wn));
    } catch (const DomainFault&) {
    }
    bloch_detail::for_ball(zn, rho * 0.95, 4, 8, [&](const Point& p) { seeds.push_back(p); });
    for (const auto& s : seeds) {
      auto z = newton_solve<double>(f, s, w, tol, 60);
      if (z && distance(*z, zn) < rho) {
        res[k] = distance(f(*z), w);
        return;
      }
    }
  });
  SchlichtReport r;
  r.w_grid = w_grid;
  r.total = targets.size();
  for (double v : res)
    if (v >= 0) {
      ++r.hits;
      r.max_residual = std::max(r.max_residual, v);
    }
  r.fraction = r.total ? static_cast<double>(r.hits) / r.total : 0;
  return r;
}

// ---------------------------------------------------------------------------

/// F(z) = (f(zn + rho z) - f(zn)) / (rho lambda_f(zn)) on the unit disk.
class NormalizedMap {
 public:
  NormalizedMap(const PlanarMap& f, Point zn, double rho) : f_(&f), zn_(zn), rho_(rho) {
    if (!(rho > 0)) throw BlochError("rho must be positive");
    auto w = wirtinger(f, zn);
    lambda_ = w.small_lambda;
    if (!(lambda_ > 1e-12 * std::max(1.0, w.big_lambda))) throw BlochError("lambda_f(zn) vanishes");
    wn_ = f(zn);
    if (norm((*this)(Point{0, 0})) > 1e-10 || std::abs(wirtinger_from_jet(jet({0, 0})).small_lambda - 1) > 1e-10)
      throw BlochError("normalisation check failed");
  }

  Point operator()(const Point& z) const { return (1 / (rho_ * lambda_)) * ((*f_)(zn_ + rho_ * z) - wn_); }

  MapJet<double> jet(const Point& z) const {
    auto j = f_->jet(zn_ + rho_ * z);
    double s = 1 / lambda_;
    return {(1 / (rho_ * lambda_)) * (j.value - wn_), s * j.ux, s * j.uy, s * j.vx, s * j.vy};
  }

  double lambda() const { return lambda_; }

 private:
  const PlanarMap* f_;
  Point zn_;
  double rho_;
  double lambda_ = 0;
  Point wn_;
};

inline NormalizedMap normalized_map(const PlanarMap& f, const Point& zn, double rho) { return {f, zn, rho}; }

// ---------------------------------------------------------------------------

struct DichotomyCondition {
  bool holds = false;
  std::string detail;
};

struct SequenceDiagnosis {
  /// (1) d(z_n, S) -> 0, (2) J_f(z_n) -> 0, (3) no rho with bounded
  /// J-ratio, (4) no rho with sup |mu| < 1.
  DichotomyCondition conditions[4];
  std::vector<SequenceCertificate> certificates;  // one per rho trial
  std::vector<double> distances;                  // grid-limited d(z_n, S)
  bool images_converge = false;
  std::vector<std::string> notes;
};

namespace bloch_detail {

/// A positive sequence tends to 0 at this truncation: its tail sits below
/// floor, or the tail is non-increasing and fell by a factor of 10.
inline bool tends_to_zero(const std::vector<double>& v, double floor) {
  if (v.empty()) return false;
  std::size_t h = v.size() / 2;
  bool below = true, falling = true;
  for (std::size_t k = h; k < v.size(); ++k) {
    below = below && v[k] <= floor;
    if (k > h) falling = falling && v[k] <= v[k - 1];
  }
  return below || (falling && std::isfinite(v[h]) && v.size() - h >= 2 && v.back() <= 0.1 * v[h]);
}

}  // namespace bloch_detail

inline SequenceDiagnosis diagnose_sequence(const PlanarMap& f, const std::vector<Point>& seq,
                                           const std::vector<double>& rho_trials, const Window& critical_window,
                                           const CertifyOptions& opt = {}) {
  if (seq.size() < 2) throw BlochError("need at least two terms");
  SequenceDiagnosis d;
  d.distances = bloch_detail::distances_to_critical(f, seq, critical_window, opt.threads);
  const double floor = 2 * critical_window.cell_diagonal();

  std::vector<Point> img;
  for (const auto& z : seq) img.push_back(f(z));
  auto spread = [&](std::size_t from) {
    double s = 0;
    for (std::size_t a = from; a < img.size(); ++a)
      for (std::size_t b = a + 1; b < img.size(); ++b) s = std::max(s, distance(img[a], img[b]));
    return s;
  };
  double wscale = 1;
  for (const auto& w : img) wscale = std::max(wscale, norm(w));
  d.images_converge = spread(img.size() / 2) <= std::max(0.25 * spread(0), 1e-9 * wscale);

  d.conditions[0].holds = bloch_detail::tends_to_zero(d.distances, floor);
  d.conditions[0].detail = "final distance to S " + std::to_string(d.distances.back()) + ", resolution " +
                           std::to_string(floor);

  std::vector<double> J, scale;
  for (const auto& z : seq) {
    auto j = f.jet(z);
    double lam = big_lambda(j);
    J.push_back(std::abs(j.jacobian()));
    scale.push_back(1e-10 * lam * lam);
  }
  bool jtail = true;
  for (std::size_t k = seq.size() / 2; k < seq.size(); ++k) jtail = jtail && J[k] <= scale[k];
  d.conditions[1].holds = jtail || bloch_detail::tends_to_zero(J, 0);
  d.conditions[1].detail = "final |J_f| " + std::to_string(J.back());

  bool bounded_ratio = false, small_mu = false;
  for (double rho : rho_trials) {
    auto c = check_conditions(f, seq, rho, critical_window, opt);
    bounded_ratio = bounded_ratio || (c.eta_sq > 0 && c.j_ratio_sup < opt.j_ratio_cap);
    small_mu = small_mu || c.M < 1;
    d.certificates.push_back(std::move(c));
  }
  d.conditions[2].holds = !bounded_ratio;
  d.conditions[2].detail = bounded_ratio ? "some trial radius bounds the Jacobian ratio" : "ratio unbounded at every trial radius";
  d.conditions[3].holds = !small_mu;
  d.conditions[3].detail = small_mu ? "some trial radius keeps |mu| below 1" : "|mu| reaches 1 at every trial radius";

  if (!d.images_converge)
    d.notes.push_back("images do not converge: no cluster value is approached and the dichotomy is vacuous");
  bool any = false;
  for (const auto& c : d.conditions) any = any || c.holds;
  if (!any && d.images_converge)
    d.notes.push_back("no condition holds at this truncation; valence is infinite near the limit value");
  return d;
}

}  // namespace harmap
