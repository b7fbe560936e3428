#pragma once

// Real-valued expressions in the variables x and y.
//
// Grammar (whitespace insignificant):
//
//   expr    := term  (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' ['+' | '-'] integer)*
//   primary := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func    := 'exp' | 'sin' | 'cos' | 'tan' | 'log'
//
// so `-x^2` reads as -(x^2) and `a - b - c` as (a - b) - c. Exponents are
// integer literals only; Euler's number is written exp(1).
//
// An Expression is immutable after parsing and owns a compiled postfix program
// that can be evaluated on doubles, on xreal, or on forward-mode duals of
// either. Evaluation never returns a non-finite value: division by zero, log
// of a non-positive number, tan at a pole and overflow raise DomainFault.

#include "harmap/real.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace harmap {

class ParseError : public std::runtime_error {
 public:
  enum class Kind { syntax, unknown_identifier, non_integer_exponent };

  ParseError(Kind kind, std::size_t offset, const std::string& what)
      : std::runtime_error(what + " at offset " + std::to_string(offset)),
        kind_(kind),
        offset_(offset) {}

  Kind kind() const noexcept { return kind_; }
  /// 0-based character offset into the parsed text.
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

class DomainFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Forward-mode dual number carrying both first partials.
template <class T>
struct Dual {
  T value{};
  T dx{};
  T dy{};
};

using DualValue = Dual<double>;

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  return {a.value + b.value, a.dx + b.dx, a.dy + b.dy};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
  return {a.value - b.value, a.dx - b.dx, a.dy - b.dy};
}
template <class T>
Dual<T> operator-(const Dual<T>& a) {
  return {-a.value, -a.dx, -a.dy};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.value * b.value, a.dx * b.value + a.value * b.dx, a.dy * b.value + a.value * b.dy};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T q = a.value / b.value;
  return {q, (a.dx - q * b.dx) / b.value, (a.dy - q * b.dy) / b.value};
}

namespace expr_detail {

enum class Op : std::uint8_t {
  constant, var_x, var_y, pi, neg, add, sub, mul, div, pow, exp, sin, cos, tan, log
};

struct Node {
  Op op = Op::constant;
  double value = 0.0;
  int exponent = 0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

using NodePtr = std::shared_ptr<const Node>;

struct Instr {
  Op op;
  double value;
  int exponent;
};

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

template <class T>
const auto& primal(const T& t) {
  if constexpr (is_dual<T>::value) {
    return t.value;
  } else {
    return t;
  }
}

template <class R>
R ipow(R base, int n) {
  bool invert = n < 0;
  unsigned long long e = invert ? -static_cast<long long>(n) : n;
  R result(1);
  while (e != 0) {
    if (e & 1ULL) result *= base;
    e >>= 1;
    if (e != 0) base *= base;
  }
  return invert ? R(1) / result : result;
}

template <class R>
Dual<R> scale(const Dual<R>& a, const R& value, const R& deriv) {
  return {value, deriv * a.dx, deriv * a.dy};
}

template <class T>
T make_constant(double v) {
  if constexpr (is_dual<T>::value) {
    using R = decltype(T{}.value);
    return T{R(v), R(0), R(0)};
  } else {
    return T(v);
  }
}

template <class T>
T make_pi() {
  if constexpr (is_dual<T>::value) {
    using R = decltype(T{}.value);
    return T{pi_value<R>(), R(0), R(0)};
  } else {
    return pi_value<T>();
  }
}

template <class T>
T apply_pow(const T& a, int n) {
  if (n < 0 && primal(a) == 0) throw DomainFault("zero raised to a negative power");
  if constexpr (is_dual<T>::value) {
    using R = decltype(a.value);
    if (n == 0) return T{R(1), R(0), R(0)};
    R value = ipow(a.value, n);
    R deriv = R(n) * ipow(a.value, n - 1);
    return scale(a, value, deriv);
  } else {
    return ipow(a, n);
  }
}

template <class T>
T apply_func(Op op, const T& a) {
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::tan;
  using boost::multiprecision::cos;
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  using boost::multiprecision::sin;
  using boost::multiprecision::tan;
  const auto& v = primal(a);
  switch (op) {
    case Op::exp:
      if constexpr (is_dual<T>::value) {
        auto e = exp(v);
        return scale(a, e, e);
      } else {
        return exp(a);
      }
    case Op::sin:
      if constexpr (is_dual<T>::value) {
        return scale(a, sin(v), cos(v));
      } else {
        return sin(a);
      }
    case Op::cos:
      if constexpr (is_dual<T>::value) {
        return scale(a, cos(v), -sin(v));
      } else {
        return cos(a);
      }
    case Op::tan: {
      if (cos(v) == 0) throw DomainFault("tan evaluated at a pole");
      if constexpr (is_dual<T>::value) {
        auto t = tan(v);
        decltype(t) one(1);
        return scale(a, t, one + t * t);
      } else {
        return tan(a);
      }
    }
    case Op::log:
      if (!(v > 0)) throw DomainFault("log of a non-positive value");
      if constexpr (is_dual<T>::value) {
        decltype(log(v)) one(1);
        return scale(a, log(v), one / v);
      } else {
        return log(a);
      }
    default:
      throw std::logic_error("not a function opcode");
  }
}

inline const char* func_name(Op op) {
  switch (op) {
    case Op::exp: return "exp";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::tan: return "tan";
    case Op::log: return "log";
    default: return nullptr;
  }
}

inline bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  NodePtr parse_all() {
    skip_ws();
    if (pos_ >= s_.size()) syntax("empty expression");
    NodePtr n = parse_expr();
    skip_ws();
    if (pos_ != s_.size()) syntax("unexpected character");
    return n;
  }

 private:
  static constexpr int max_depth = 200;

  std::string_view s_;
  std::size_t pos_ = 0;
  int depth_ = 0;

  [[noreturn]] void syntax(const std::string& msg) {
    throw ParseError(ParseError::Kind::syntax, pos_, msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' ||
                                s_[pos_] == '\r'))
      ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  static NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > max_depth) p.syntax("expression nested too deeply");
    }
    ~DepthGuard() { --p.depth_; }
  };

  NodePtr parse_expr() {
    DepthGuard guard(*this);
    NodePtr lhs = parse_term();
    while (true) {
      if (peek('+')) {
        ++pos_;
        lhs = make(Op::add, lhs, parse_term());
      } else if (peek('-')) {
        ++pos_;
        lhs = make(Op::sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    while (true) {
      if (peek('*')) {
        ++pos_;
        lhs = make(Op::mul, lhs, parse_unary());
      } else if (peek('/')) {
        ++pos_;
        lhs = make(Op::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    DepthGuard guard(*this);
    if (peek('-')) {
      ++pos_;
      return make(Op::neg, parse_unary());
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    while (peek('^')) {
      ++pos_;
      skip_ws();
      std::size_t start = pos_;
      bool negative = false;
      if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
        negative = s_[pos_] == '-';
        ++pos_;
      }
      std::size_t digits_start = pos_;
      while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
      bool fractional = pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E');
      if (pos_ == digits_start || fractional) {
        throw ParseError(ParseError::Kind::non_integer_exponent, start,
                         "exponent must be an integer literal");
      }
      long long magnitude = 0;
      auto [ptr, ec] = std::from_chars(s_.data() + digits_start, s_.data() + pos_, magnitude);
      if (ec != std::errc() || magnitude > 100000) {
        throw ParseError(ParseError::Kind::non_integer_exponent, start, "exponent out of range");
      }
      auto n = std::make_shared<Node>();
      n->op = Op::pow;
      n->lhs = base;
      n->exponent = static_cast<int>(negative ? -magnitude : magnitude);
      base = n;
    }
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) syntax("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (!peek(')')) syntax("expected ')'");
      ++pos_;
      return inner;
    }
    if (is_digit(c) || c == '.') return parse_number();
    if (is_ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
      std::string_view id = s_.substr(start, pos_ - start);
      if (id == "x") return make(Op::var_x);
      if (id == "y") return make(Op::var_y);
      if (id == "pi") return make(Op::pi);
      Op fn;
      if (id == "exp") fn = Op::exp;
      else if (id == "sin") fn = Op::sin;
      else if (id == "cos") fn = Op::cos;
      else if (id == "tan") fn = Op::tan;
      else if (id == "log") fn = Op::log;
      else
        throw ParseError(ParseError::Kind::unknown_identifier, start,
                         "unknown identifier '" + std::string(id) + "'");
      if (!peek('(')) syntax("expected '(' after function name");
      ++pos_;
      NodePtr arg = parse_expr();
      if (!peek(')')) syntax("expected ')'");
      ++pos_;
      return make(fn, arg);
    }
    syntax("unexpected character");
  }

  NodePtr parse_number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
    }
    if (pos_ - start == 1 && s_[start] == '.') {
      pos_ = start;
      syntax("malformed number");
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      std::size_t exp_digits = pos_;
      while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
      if (pos_ == exp_digits) {
        pos_ = save;
        syntax("malformed number exponent");
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, value);
    if (ec != std::errc() || ptr != s_.data() + pos_ || !std::isfinite(value)) {
      pos_ = start;
      syntax("malformed number");
    }
    auto n = std::make_shared<Node>();
    n->op = Op::constant;
    n->value = value;
    return n;
  }
};

inline void compile(const NodePtr& n, std::vector<Instr>& out, std::size_t depth,
                    std::size_t& max_depth) {
  switch (n->op) {
    case Op::constant:
    case Op::var_x:
    case Op::var_y:
    case Op::pi:
      out.push_back({n->op, n->value, 0});
      max_depth = std::max(max_depth, depth + 1);
      return;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
      compile(n->lhs, out, depth, max_depth);
      compile(n->rhs, out, depth + 1, max_depth);
      out.push_back({n->op, 0.0, 0});
      return;
    default:
      compile(n->lhs, out, depth, max_depth);
      out.push_back({n->op, 0.0, n->exponent});
      return;
  }
}

inline std::string format_constant(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void unparse(const NodePtr& n, std::string& out) {
  switch (n->op) {
    case Op::constant: out += format_constant(n->value); return;
    case Op::var_x: out += 'x'; return;
    case Op::var_y: out += 'y'; return;
    case Op::pi: out += "pi"; return;
    case Op::neg:
      out += "(-";
      unparse(n->lhs, out);
      out += ')';
      return;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div: {
      const char* sym = n->op == Op::add ? " + " : n->op == Op::sub ? " - " : n->op == Op::mul ? " * " : " / ";
      out += '(';
      unparse(n->lhs, out);
      out += sym;
      unparse(n->rhs, out);
      out += ')';
      return;
    }
    case Op::pow:
      out += '(';
      unparse(n->lhs, out);
      out += ")^";
      out += std::to_string(n->exponent);
      return;
    default:
      out += func_name(n->op);
      out += '(';
      unparse(n->lhs, out);
      out += ')';
      return;
  }
}

inline bool same_tree(const NodePtr& a, const NodePtr& b) {
  if (!a || !b) return !a && !b;
  if (a->op != b->op || a->exponent != b->exponent) return false;
  if (a->op == Op::constant && !(a->value == b->value)) return false;
  return same_tree(a->lhs, b->lhs) && same_tree(a->rhs, b->rhs);
}

}  // namespace expr_detail

class Expression {
 public:
  static Expression parse(std::string_view text) {
    expr_detail::Parser parser(text);
    Expression e;
    e.root_ = parser.parse_all();
    expr_detail::compile(e.root_, e.program_, 0, e.max_depth_);
    e.source_ = std::string(text);
    return e;
  }

  /// Fully parenthesised text that parses back to an identical tree.
  std::string unparse() const {
    std::string out;
    expr_detail::unparse(root_, out);
    return out;
  }

  /// Text as originally supplied to parse().
  const std::string& source() const noexcept { return source_; }

  bool structurally_equal(const Expression& other) const {
    return expr_detail::same_tree(root_, other.root_);
  }

  /// Evaluates on any scalar type (double, xreal) or on Dual<scalar>.
  template <class T>
  T evaluate(const T& x, const T& y) const {
    if constexpr (std::is_same_v<T, double> || std::is_same_v<T, Dual<double>>) {
      if (max_depth_ <= 32) {
        std::array<T, 32> stack;
        return run(x, y, stack.data());
      }
    }
    std::vector<T> stack(max_depth_);
    return run(x, y, stack.data());
  }

  double eval(double x, double y) const { return evaluate<double>(x, y); }

  DualValue eval_dual(double x, double y) const {
    return evaluate<DualValue>(DualValue{x, 1.0, 0.0}, DualValue{y, 0.0, 1.0});
  }

 private:
  template <class T>
  T run(const T& x, const T& y, T* stack) const {
    using expr_detail::Op;
    std::size_t top = 0;
    for (const auto& ins : program_) {
      switch (ins.op) {
        case Op::constant: stack[top++] = expr_detail::make_constant<T>(ins.value); break;
        case Op::var_x: stack[top++] = x; break;
        case Op::var_y: stack[top++] = y; break;
        case Op::pi: stack[top++] = expr_detail::make_pi<T>(); break;
        case Op::neg: stack[top - 1] = -stack[top - 1]; break;
        case Op::add:
          stack[top - 2] = stack[top - 2] + stack[top - 1];
          --top;
          break;
        case Op::sub:
          stack[top - 2] = stack[top - 2] - stack[top - 1];
          --top;
          break;
        case Op::mul:
          stack[top - 2] = stack[top - 2] * stack[top - 1];
          --top;
          break;
        case Op::div:
          if (expr_detail::primal(stack[top - 1]) == 0) throw DomainFault("division by zero");
          stack[top - 2] = stack[top - 2] / stack[top - 1];
          --top;
          break;
        case Op::pow: stack[top - 1] = expr_detail::apply_pow(stack[top - 1], ins.exponent); break;
        default: stack[top - 1] = expr_detail::apply_func(ins.op, stack[top - 1]); break;
      }
    }
    const T& result = stack[0];
    if constexpr (expr_detail::is_dual<T>::value) {
      if (!is_finite(result.value) || !is_finite(result.dx) || !is_finite(result.dy))
        throw DomainFault("non-finite result");
    } else {
      if (!is_finite(result)) throw DomainFault("non-finite result");
    }
    return result;
  }

  expr_detail::NodePtr root_;
  std::vector<expr_detail::Instr> program_;
  std::size_t max_depth_ = 0;
  std::string source_;
};

inline Expression parse(std::string_view text) { return Expression::parse(text); }

inline DualValue eval_dual(const Expression& e, double x, double y) { return e.eval_dual(x, y); }

}  // namespace harmap
