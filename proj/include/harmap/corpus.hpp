#pragma once

// Per-map pipeline setups and the worked-example regression table.

#include "harmap/io.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace harmap {

struct TraceSetup {
  unsigned digits = 0;  // 0: double
  AsymptoteConfig cfg;
};

/// Tuned setups. Working precision follows |J| / Lambda^2 along the
/// sequence: ex4 decays like 1/(9R^4), ex5 suffers cancellation in u, and
/// ex3's distances fall like x e^{-x}.
inline TraceSetup trace_setup(const std::string& map) {
  TraceSetup s;
  if (map == "ex1-nono") {
    s.cfg.scan.valence_window = Window{-6, 6, -4, 236, 24, 700};
  } else if (map == "ex3-zplusre") {
    s.digits = 130;
    s.cfg.sequence.n = 6;
  } else if (map == "ex4-cubic") {
    s.cfg.sequence.n = 6;
  } else if (map == "ex5-quadline") {
    s.digits = 30;
    s.cfg.sequence.n = 8;
    s.cfg.sequence.ratio = 4;
  } else if (map == "ex6-imexp") {
    s.cfg.cluster_in_partition = false;
  }
  return s;
}

/// w0 coordinates are expressions, evaluated in the working precision.
inline AsymptoteReport run_trace(const PlanarMap& f, const std::string& w0x, const std::string& w0y,
                                 const TraceSetup& s) {
  auto ex = Expression::parse(w0x), ey = Expression::parse(w0y);
  if (s.digits == 0) return trace_asymptote<double>(f, Point{ex.eval(0, 0), ey.eval(0, 0)}, s.cfg);
  PrecisionGuard g(s.digits);
  Vec2<xreal> w0(ex.evaluate<xreal>(xreal(0), xreal(0)), ey.evaluate<xreal>(xreal(0), xreal(0)));
  return trace_asymptote<xreal>(f, w0, s.cfg);
}

/// y = (4k + 3) pi / 2, x = log y: zeros of ex2 where J = y^2.
inline std::vector<Point> ex2_sequence(int n) {
  std::vector<Point> z;
  for (int k = 1; k <= n; ++k) {
    double y = (4 * k + 3) * pi_value<double>() / 2;
    z.push_back({std::log(y), y});
  }
  return z;
}

struct CorpusRow {
  std::string id;
  std::string map;
  bool pass = false;
  std::string detail;
  io::Json data;
};

namespace corpus_detail {

inline CorpusRow trace_row(std::string id, const std::string& map, const std::string& x, const std::string& y,
                           Verdict want, std::optional<CurveSpec> curve = {}) {
  TraceSetup s = trace_setup(map);
  s.cfg.curve = std::move(curve);
  auto r = run_trace(builtin(map), x, y, s);
  CorpusRow row{std::move(id), map, r.verdict == want, std::string(to_string(r.verdict)) + ": " + r.reason,
                io::to_json(r)};
  if (want == Verdict::asymptotic_evidence && !(r.final_modulus > 100)) row.pass = false;
  return row;
}

}  // namespace corpus_detail

/// The six worked examples, one or more rows each.
inline std::vector<CorpusRow> run_corpus(int threads = 1) {
  std::vector<CorpusRow> rows;
  using io::Json;

  {  // ex1: S = {x = -y tan y}
    auto f = builtin("ex1-nono");
    Window win{-4, 4, -4, 4, 200, 200};
    ContourOptions co;
    co.threads = threads;
    auto s = critical_contours(f, win, co);
    std::vector<Point> curve;
    for (int k = 0; k <= 4000; ++k) {
      double y = -4 + 8.0 * k / 4000;
      double x = -y * std::tan(y);
      if (std::abs(std::cos(y)) > 1e-3 && std::abs(x) <= 4) curve.push_back({x, y});
    }
    double tol = 2 * win.cell_diagonal();
    double fwd = 0, back = 0;
    SegmentIndex si(s, 0.1);
    for (const auto& p : curve) back = std::max(back, si.nearest(p));
    PointIndex ci(curve, 0.1);
    s.for_each_vertex([&](const Point& p) { fwd = std::max(fwd, ci.nearest(p)); });
    rows.push_back({"ex1-critical", "ex1-nono", fwd <= tol && back <= tol,
                    "hausdorff " + io::num(std::max(fwd, back)) + " <= " + io::num(tol),
                    Json{{"contour_to_curve", fwd}, {"curve_to_contour", back}, {"tolerance", tol}}});
  }
  {
    auto f = builtin("ex1-nono");
    auto a = valence_at(f, {2, 0}, square_window(6));
    auto b = valence_at(f, {-2, 0}, square_window(6));
    bool ok = a.count == 1 && distance(a.roots[0], Point{std::log(2.0), 0}) <= 1e-8 && b.count == 0;
    rows.push_back({"ex1-valence", "ex1-nono", ok,
                    "Val(2) = " + std::to_string(a.count) + ", Val(-2) = " + std::to_string(b.count),
                    Json{{"val_2", a.count}, {"val_minus_2", b.count}, {"roots_2", io::to_json(a.roots)}}});
  }
  rows.push_back(corpus_detail::trace_row("ex1-trace", "ex1-nono", "1", "0.5", Verdict::precondition_failed));

  {  // ex2: quasiregular sequence on the zeros
    auto f = builtin("ex2-bloch");
    auto z = ex2_sequence(5);
    CertifyOptions o;
    o.threads = threads;
    auto c = check_conditions(f, z, std::log(2.0) / 2, Window{-1, 6, 0, 40, 141, 801}, o);
    auto sd = schlicht_disk_verify(f, z[0], c.rho, c.r1, 15, threads);
    bool ok = c.pass && sd.fraction == 1.0;
    rows.push_back({"ex2-certificate", "ex2-bloch", ok,
                    "M " + io::num(c.M) + ", K " + io::num(c.K) + ", schlicht " + io::num(sd.fraction),
                    Json{{"certificate", io::to_json(c)}, {"schlicht", io::to_json(sd)}}});
  }

  rows.push_back(corpus_detail::trace_row("ex3-trace", "ex3-zplusre", "0", "pi/2", Verdict::asymptotic_evidence));
  rows.push_back(corpus_detail::trace_row("ex4-trace", "ex4-cubic", "1", "0", Verdict::asymptotic_evidence));
  rows.push_back(corpus_detail::trace_row("ex5-trace", "ex5-quadline", "3", "0", Verdict::asymptotic_evidence));

  {  // ex6: f(S) sits on the points i k pi
    auto f = builtin("ex6-imexp");
    ContourOptions co;
    co.threads = threads;
    auto fs = image_of_critical(f, critical_contours(f, square_window(3, 301), co));
    double worst = 0;
    fs.for_each_vertex([&](const Point& w) {
      double k = std::round(w.y / pi_value<double>());
      worst = std::max(worst, std::hypot(w.x, w.y - k * pi_value<double>()));
    });
    rows.push_back({"ex6-fS", "ex6-imexp", !fs.empty() && worst <= 1e-2, "max distance " + io::num(worst),
                    Json{{"vertices", fs.vertex_count()}, {"max_distance", worst}}});
  }
  rows.push_back(corpus_detail::trace_row("ex6-trace-1", "ex6-imexp", "1", "0", Verdict::asymptotic_evidence,
                                          CurveSpec{"t", "exp(-t^2)/(2*t)", {"2", "3", "4", "5", "6"}}));
  rows.push_back(corpus_detail::trace_row("ex6-trace-i", "ex6-imexp", "0", "1", Verdict::asymptotic_evidence,
                                          CurveSpec{"t", "1/(2*t)", {"0.5", "0.1", "0.02", "0.005"}}));
  return rows;
}

}  // namespace harmap
