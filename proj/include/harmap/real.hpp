#pragma once

// Scalar and 2-vector primitives shared by every module. Algorithms that may
// need to run beyond double precision are templated on a Real type; `xreal`
// is the MPFR-backed variable precision instantiation.

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <type_traits>

namespace harmap {

using xreal = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                            boost::multiprecision::et_off>;

template <class Real>
inline constexpr bool is_builtin_float_v = std::is_floating_point_v<Real>;

template <class Real>
double to_double(const Real& r) {
  if constexpr (is_builtin_float_v<Real>) {
    return static_cast<double>(r);
  } else {
    return r.template convert_to<double>();
  }
}

template <class Real>
Real from_double(double d) {
  return Real(d);
}

template <class Real>
bool is_finite(const Real& r) {
  using std::isfinite;
  using boost::multiprecision::isfinite;
  return isfinite(r);
}

template <class Real>
Real pi_value() {
  if constexpr (is_builtin_float_v<Real>) {
    return static_cast<Real>(3.14159265358979323846264338327950288L);
  } else {
    return boost::math::constants::pi<Real>();
  }
}

/// Sets the working precision of `xreal` for the lifetime of the guard.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(unsigned digits) : saved_(xreal::default_precision()) {
    xreal::default_precision(digits);
  }
  ~PrecisionGuard() { xreal::default_precision(saved_); }
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  unsigned saved_;
};

template <class Real>
struct Vec2 {
  Real x{};
  Real y{};

  Vec2() = default;
  Vec2(Real x_, Real y_) : x(std::move(x_)), y(std::move(y_)) {}

  template <class Other>
    requires(!std::is_same_v<Other, Real>)
  explicit Vec2(const Vec2<Other>& o) {
    if constexpr (std::is_same_v<Real, double>) {
      x = to_double(o.x);
      y = to_double(o.y);
    } else {
      x = Real(o.x);
      y = Real(o.y);
    }
  }

  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend Vec2 operator*(const Real& s, const Vec2& a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(const Vec2& a, const Real& s) { return {s * a.x, s * a.y}; }
  friend Vec2 operator/(const Vec2& a, const Real& s) { return {a.x / s, a.y / s}; }
  friend bool operator==(const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }
};

using Point = Vec2<double>;

template <class Real>
Real dot(const Vec2<Real>& a, const Vec2<Real>& b) {
  return a.x * b.x + a.y * b.y;
}

template <class Real>
Real cross(const Vec2<Real>& a, const Vec2<Real>& b) {
  return a.x * b.y - a.y * b.x;
}

template <class Real>
Real norm(const Vec2<Real>& a) {
  if constexpr (is_builtin_float_v<Real>) {
    return std::hypot(a.x, a.y);
  } else {
    return sqrt(a.x * a.x + a.y * a.y);
  }
}

template <class Real>
Real distance(const Vec2<Real>& a, const Vec2<Real>& b) {
  return norm(a - b);
}

/// Lexicographic order on points, used for deterministic output ordering.
template <class Real>
bool lex_less(const Vec2<Real>& a, const Vec2<Real>& b) {
  return a.x < b.x || (a.x == b.x && a.y < b.y);
}

inline std::complex<double> to_complex(const Point& p) { return {p.x, p.y}; }

}  // namespace harmap
