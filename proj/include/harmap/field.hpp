#pragma once

// Planar maps f = u + iv and their pointwise first-order quantities.

#include "harmap/expr.hpp"

#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace harmap {

/// Axis-aligned region with a sampling grid of nx by ny nodes.
struct Window {
  double xmin = -1.0;
  double xmax = 1.0;
  double ymin = -1.0;
  double ymax = 1.0;
  int nx = 64;
  int ny = 64;

  void validate() const {
    if (!(xmin < xmax) || !(ymin < ymax)) throw std::invalid_argument("window bounds must be increasing");
    if (nx < 2 || ny < 2) throw std::invalid_argument("window grid counts must be at least 2");
  }
  double dx() const { return (xmax - xmin) / (nx - 1); }
  double dy() const { return (ymax - ymin) / (ny - 1); }
  double cell_diagonal() const { return std::hypot(dx(), dy()); }
  Point node(int i, int j) const { return {xmin + i * dx(), ymin + j * dy()}; }
  bool contains(const Point& p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
  Window scaled(double factor) const {
    double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    double hx = 0.5 * (xmax - xmin) * factor, hy = 0.5 * (ymax - ymin) * factor;
    return {cx - hx, cx + hx, cy - hy, cy + hy, nx, ny};
  }
};

inline Window square_window(double half_width, int n = 64) {
  return {-half_width, half_width, -half_width, half_width, n, n};
}

struct Disk {
  Point center;
  double radius = 1.0;

  Disk(Point c, double r) : center(c), radius(r) {
    if (!(r > 0)) throw std::invalid_argument("disk radius must be positive");
  }
  bool contains(const Point& p) const { return distance(p, center) < radius; }
};

/// Value and real Jacobian of a map at a point.
template <class Real>
struct MapJet {
  Vec2<Real> value;
  Real ux{}, uy{}, vx{}, vy{};

  Real jacobian() const { return ux * vy - uy * vx; }
};

struct WirtingerData {
  std::complex<double> fz;
  std::complex<double> fzbar;
  double jacobian = 0.0;
  double big_lambda = 0.0;
  double small_lambda = 0.0;
  /// fzbar / fz; empty when |fz| <= 1e-14 (1 + |fzbar|).
  std::optional<std::complex<double>> mu;
};

class PlanarMap {
 public:
  PlanarMap(std::string name, Expression u, Expression v)
      : name_(std::move(name)), u_(std::move(u)), v_(std::move(v)) {}

  static PlanarMap from_text(std::string name, std::string_view u, std::string_view v) {
    return {std::move(name), Expression::parse(u), Expression::parse(v)};
  }

  const std::string& name() const noexcept { return name_; }
  const Expression& u() const noexcept { return u_; }
  const Expression& v() const noexcept { return v_; }

  template <class Real>
  Vec2<Real> operator()(const Vec2<Real>& z) const {
    return {u_.evaluate<Real>(z.x, z.y), v_.evaluate<Real>(z.x, z.y)};
  }

  template <class Real>
  MapJet<Real> jet(const Vec2<Real>& z) const {
    Dual<Real> x{z.x, Real(1), Real(0)};
    Dual<Real> y{z.y, Real(0), Real(1)};
    auto du = u_.evaluate<Dual<Real>>(x, y);
    auto dv = v_.evaluate<Dual<Real>>(x, y);
    return {{du.value, dv.value}, du.dx, du.dy, dv.dx, dv.dy};
  }

  /// Map with v replaced by -v, i.e. the complex conjugate of f.
  PlanarMap conjugate() const {
    return from_text(name_ + "-conj", u_.unparse(), "-(" + v_.unparse() + ")");
  }

 private:
  std::string name_;
  Expression u_;
  Expression v_;
};

inline Point evaluate(const PlanarMap& f, const Point& z) { return f(z); }

inline WirtingerData wirtinger_from_jet(const MapJet<double>& j) {
  WirtingerData w;
  w.fz = {0.5 * (j.ux + j.vy), 0.5 * (j.vx - j.uy)};
  w.fzbar = {0.5 * (j.ux - j.vy), 0.5 * (j.vx + j.uy)};
  double a = std::abs(w.fz), b = std::abs(w.fzbar);
  w.jacobian = j.jacobian();
  w.big_lambda = a + b;
  w.small_lambda = std::abs(a - b);
  if (a > 1e-14 * (1.0 + b)) w.mu = w.fzbar / w.fz;
  return w;
}

inline WirtingerData wirtinger(const PlanarMap& f, const Point& z) {
  return wirtinger_from_jet(f.jet(z));
}

/// |f_z| + |f_zbar| from a jet; valid for any Real.
template <class Real>
Real big_lambda(const MapJet<Real>& j) {
  using std::sqrt;
  Real ax = (j.ux + j.vy) / 2, ay = (j.vx - j.uy) / 2;
  Real bx = (j.ux - j.vy) / 2, by = (j.vx + j.uy) / 2;
  return sqrt(ax * ax + ay * ay) + sqrt(bx * bx + by * by);
}

/// Five-point finite-difference Laplacians of u and v.
struct LaplacianResidual {
  double u = 0.0;
  double v = 0.0;
};

inline LaplacianResidual laplacian_residual(const PlanarMap& f, const Point& z, double h = 1e-4) {
  auto lap = [&](const Expression& e) {
    double c = e.eval(z.x, z.y);
    return (e.eval(z.x + h, z.y) + e.eval(z.x - h, z.y) + e.eval(z.x, z.y + h) +
            e.eval(z.x, z.y - h) - 4.0 * c) /
           (h * h);
  };
  return {lap(f.u()), lap(f.v())};
}

namespace builtin_detail {

struct Definition {
  const char* name;
  const char* u;
  const char* v;
  const char* description;
};

inline const std::vector<Definition>& table() {
  static const std::vector<Definition> defs = {
      {"ex1-nono", "exp(x)*cos(y)", "x*y", "Re e^z + (i/2) Im z^2"},
      {"ex2-bloch", "exp(x)*cos(y)", "exp(x)*sin(y) + y", "e^z + i Im z"},
      {"ex3-zplusre", "x + exp(x)*cos(y)", "y", "z + Re e^z"},
      {"ex4-cubic", "2*(x^3 - 3*x*y^2) - 2*y", "2*x", "2 (Re z^3 + i z)"},
      {"ex5-quadline", "2*(x^2 - y^2)", "2*(x - y)", "2 [Re z^2 + i (Re z - Im z)]"},
      {"ex6-imexp", "exp(x^2 - y^2)*sin(2*x*y)", "2*x*y", "Im exp(z^2) + i Im z^2"},
      {"identity", "x", "y", "z"},
      {"zsquared", "x^2 - y^2", "2*x*y", "z^2"},
  };
  return defs;
}

}  // namespace builtin_detail

inline std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (const auto& d : builtin_detail::table()) names.emplace_back(d.name);
  return names;
}

inline PlanarMap builtin(std::string_view name) {
  for (const auto& d : builtin_detail::table()) {
    if (name == d.name) return PlanarMap::from_text(d.name, d.u, d.v);
  }
  throw std::invalid_argument("unknown builtin map '" + std::string(name) + "'");
}

inline std::string builtin_description(std::string_view name) {
  for (const auto& d : builtin_detail::table()) {
    if (name == d.name) return d.description;
  }
  return {};
}

}  // namespace harmap
