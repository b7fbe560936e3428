// harmap command-line front end.

#include "harmap/corpus.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <random>

using namespace harmap;
using io::Json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Args {
  std::string map, u, v;
  std::string window, wwindow, w0, radii, out = "out";
  std::string points, path, curve_x, curve_y, curve_t;
  int grid = 0;
  double tol = 1e-8;
  std::optional<double> rho;
  int threads = 1;
  unsigned seed = 0;
  std::optional<unsigned> digits;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double eval_expr(const std::string& s) { return Expression::parse(s).eval(0, 0); }

Window parse_window(const std::string& s, int grid, const Window& fallback) {
  Window w = fallback;
  if (!s.empty()) {
    auto p = split(s, ':');
    if (p.size() != 4) throw UsageError("window must be x0:x1:y0:y1, got '" + s + "'");
    w.xmin = eval_expr(p[0]);
    w.xmax = eval_expr(p[1]);
    w.ymin = eval_expr(p[2]);
    w.ymax = eval_expr(p[3]);
  }
  if (grid > 0) w.nx = w.ny = grid;
  w.validate();
  return w;
}

std::pair<std::string, std::string> parse_pair(const std::string& s) {
  auto p = split(s, ',');
  if (p.size() != 2) throw UsageError("expected a,b, got '" + s + "'");
  return {p[0], p[1]};
}

std::vector<Point> parse_points(const std::string& s) {
  std::vector<Point> out;
  for (const auto& item : split(s, ';')) {
    auto [a, b] = parse_pair(item);
    out.push_back({eval_expr(a), eval_expr(b)});
  }
  return out;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split(s, ',')) out.push_back(eval_expr(t));
  return out;
}

PlanarMap resolve_map(const Args& a) {
  if (!a.u.empty() || !a.v.empty()) {
    if (a.u.empty() || a.v.empty()) throw UsageError("--u and --v go together");
    return PlanarMap::from_text(a.map.empty() ? "inline" : a.map, a.u, a.v);
  }
  if (a.map.empty()) throw UsageError("a map is required: --map NAME|FILE.json or --u/--v");
  for (const auto& n : builtin_names())
    if (n == a.map) return builtin(a.map);
  std::ifstream in(a.map);
  if (!in) throw UsageError("unknown map '" + a.map + "' (not a builtin, not a readable file)");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw UsageError(std::string("map file: ") + e.what());
  }
  if (!j.contains("u") || !j.contains("v")) throw UsageError("map file needs \"u\" and \"v\"");
  return PlanarMap::from_text(j.value("name", std::string("file")), j["u"].get<std::string>(),
                              j["v"].get<std::string>());
}

std::filesystem::path out_path(const Args& a, const char* file) { return std::filesystem::path(a.out) / file; }

void emit(const Args& a, const char* file, const std::string& text) { io::write_file(out_path(a, file), text); }

Json map_json(const PlanarMap& f) { return Json{{"name", f.name()}, {"u", f.u().unparse()}, {"v", f.v().unparse()}}; }

void print_summary(const Json& j) { std::cout << io::dump(j); }

// ---------------------------------------------------------------------------

int cmd_analyze(const Args& a) {
  auto f = resolve_map(a);
  Window w = parse_window(a.window, a.grid > 0 ? a.grid : 5, square_window(2, 5));
  Json spots = Json::array();
  double lap = 0;
  for (int j = 0; j < w.ny; ++j)
    for (int i = 0; i < w.nx; ++i) {
      Point z = w.node(i, j);
      auto wd = wirtinger(f, z);
      auto lr = laplacian_residual(f, z);
      lap = std::max({lap, std::abs(lr.u), std::abs(lr.v)});
      Json mu = wd.mu ? Json::array({wd.mu->real(), wd.mu->imag()}) : Json();
      spots.push_back(Json{{"z", io::to_json(z)},
                           {"f", io::to_json(f(z))},
                           {"fz", {wd.fz.real(), wd.fz.imag()}},
                           {"fzbar", {wd.fzbar.real(), wd.fzbar.imag()}},
                           {"jacobian", wd.jacobian},
                           {"big_lambda", wd.big_lambda},
                           {"small_lambda", wd.small_lambda},
                           {"mu", mu},
                           {"laplacian", {lr.u, lr.v}}});
    }
  Json out = io::with_schema(Json{{"command", "analyze"},
                                  {"map", map_json(f)},
                                  {"window", io::to_json(w)},
                                  {"max_laplacian_residual", lap},
                                  {"spot_checks", spots}});
  emit(a, "summary.json", io::dump(out));
  print_summary(io::with_schema(Json{{"command", "analyze"}, {"max_laplacian_residual", lap}, {"out", a.out}}));
  return 0;
}

int cmd_critical(const Args& a) {
  auto f = resolve_map(a);
  Window w = parse_window(a.window, a.grid > 0 ? a.grid : 400, square_window(4, 400));
  ContourOptions co;
  co.threads = a.threads;
  auto s = critical_contours(f, w, co);
  auto fs = image_of_critical(f, s);
  emit(a, "S.csv", io::polylines_csv(s));
  emit(a, "fS.csv", io::polylines_csv(fs));
  io::Svg ss(w);
  ss.polylines(s, "#b2182b");
  emit(a, "S.svg", ss.str());
  std::vector<Point> all;
  fs.for_each_vertex([&](const Point& p) { all.push_back(p); });
  Window fw = a.wwindow.empty() ? io::bounds_of(all) : parse_window(a.wwindow, 2, {});
  io::Svg fsvg(fw);
  fsvg.polylines(fs, "#2166ac");
  emit(a, "fS.svg", fsvg.str());
  print_summary(io::with_schema(Json{{"command", "critical"},
                                     {"map", map_json(f)},
                                     {"S_polylines", s.lines.size()},
                                     {"S_vertices", s.vertex_count()},
                                     {"fS_vertices", fs.vertex_count()},
                                     {"out", a.out}}));
  return 0;
}

int cmd_valence(const Args& a) {
  auto f = resolve_map(a);
  Window ww = parse_window(a.wwindow, a.grid > 0 ? a.grid : 100, square_window(3, 100));
  Window zw = parse_window(a.window, 0, square_window(6, 120));
  ValenceOptions vo;
  vo.threads = a.threads;
  auto g = valence_map(f, ww, zw, vo);
  emit(a, "valence.csv", io::valence_csv(g));
  emit(a, "valence.svg", io::valence_svg(g));
  std::map<int, std::size_t> hist;
  for (int v : g.valence) ++hist[v];
  Json h = Json::object();
  for (auto [v, n] : hist) h[v == ValenceGrid::infinite_valence ? "inf" : std::to_string(v)] = n;
  Json out = io::with_schema(Json{{"command", "valence-map"},
                                  {"map", map_json(f)},
                                  {"wwindow", io::to_json(ww)},
                                  {"zwindow", io::to_json(zw)},
                                  {"histogram", h},
                                  {"ramp", "0..7+ blues to reds; black = confirmed infinite"}});
  emit(a, "valence.json", io::dump(out));
  print_summary(out);
  return 0;
}

int cmd_cluster(const Args& a) {
  auto f = resolve_map(a);
  Window ww = parse_window(a.wwindow, a.grid > 0 ? a.grid : 64, square_window(3, 64));
  std::vector<double> radii = a.radii.empty() ? std::vector<double>{10, 100, 1000} : parse_list(a.radii);
  ClusterOptions co;
  co.threads = a.threads;
  auto cs = cluster_samples(f, radii, ww, co);
  emit(a, "cluster.csv", io::points_csv(cs.cloud.points));
  io::Svg svg(ww);
  for (const auto& p : cs.cloud.points) svg.circle(p, "#000000");
  emit(a, "cluster.svg", svg.str());
  Json out = io::with_schema(Json{{"command", "cluster"},
                                  {"map", map_json(f)},
                                  {"wwindow", io::to_json(ww)},
                                  {"radii", radii},
                                  {"circles", cs.circles},
                                  {"raw_points", cs.raw_points},
                                  {"persistent_points", cs.cloud.points.size()},
                                  {"eps_persist", cs.eps_persist}});
  emit(a, "cluster.json", io::dump(out));
  print_summary(out);
  return 0;
}

int cmd_lift(const Args& a) {
  auto f = resolve_map(a);
  Window zw = parse_window(a.window, a.grid > 0 ? a.grid : 0, square_window(3, 60));
  PolyPath gamma;
  if (!a.path.empty()) {
    gamma.vertices = parse_points(a.path);
  } else {
    // random walk from the seed, inside [-1, 1]^2
    std::mt19937_64 rng(a.seed);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 5; ++k) gamma.vertices.push_back({u(rng), u(rng)});
  }
  if (gamma.vertices.size() < 2) throw UsageError("--path needs at least two points");
  LiftOptions lo;
  lo.tol = a.tol;
  auto set = lift_all<double>(f, gamma, zw, lo, a.threads);
  io::Csv c{"lift", "index", "x", "y"};
  Json lifts = Json::array();
  io::Svg svg(zw);
  for (std::size_t k = 0; k < set.lifts.size(); ++k) {
    const auto& l = set.lifts[k];
    for (std::size_t i = 0; i < l.lifted.vertices.size(); ++i) c.row(k, i, l.lifted.vertices[i].x, l.lifted.vertices[i].y);
    lifts.push_back(io::to_json(l));
    svg.polyline(l.lifted.vertices, "#1b7837");
  }
  emit(a, "lift.csv", c.str());
  emit(a, "lift.svg", svg.str());
  emit(a, "gamma.csv", io::points_csv(gamma.vertices));
  Json out = io::with_schema(Json{{"command", "lift"},
                                  {"map", map_json(f)},
                                  {"gamma", io::to_json(gamma.vertices)},
                                  {"window", io::to_json(zw)},
                                  {"starts", set.starts.points.size()},
                                  {"min_separation", set.min_separation},
                                  {"lifts", lifts}});
  emit(a, "lift.json", io::dump(out));
  print_summary(io::with_schema(Json{{"command", "lift"}, {"lifts", set.lifts.size()}, {"out", a.out}}));
  return 0;
}

int cmd_bloch(const Args& a) {
  auto f = resolve_map(a);
  std::vector<Point> z;
  if (!a.points.empty()) z = parse_points(a.points);
  else if (f.name() == "ex2-bloch") z = ex2_sequence(5);
  else throw UsageError("--points x,y;x,y;... is required for this map");
  double rho = a.rho ? *a.rho : std::log(2.0) / 2;
  Window cw = parse_window(a.window, a.grid, f.name() == "ex2-bloch" && a.window.empty()
                                                 ? Window{-1, 6, 0, 40, 141, 801}
                                                 : square_window(8, 321));
  CertifyOptions co;
  co.threads = a.threads;
  auto c = check_conditions(f, z, rho, cw, co);
  auto sd = schlicht_disk_verify(f, z[0], c.rho, c.r1, 15, a.threads);
  auto d = diagnose_sequence(f, z, {rho}, cw, co);
  Json out = io::with_schema(Json{{"command", "bloch-check"},
                                  {"map", map_json(f)},
                                  {"points", io::to_json(z)},
                                  {"critical_window", io::to_json(cw)},
                                  {"certificate", io::to_json(c)},
                                  {"schlicht", io::to_json(sd)},
                                  {"diagnosis", io::to_json(d)}});
  emit(a, "certificate.json", io::dump(out));
  print_summary(io::with_schema(Json{{"command", "bloch-check"}, {"pass", c.pass}, {"out", a.out}}));
  return c.pass ? 0 : 1;
}

int cmd_trace(const Args& a) {
  auto f = resolve_map(a);
  if (a.w0.empty()) throw UsageError("--w0 a,b is required");
  auto [wx, wy] = parse_pair(a.w0);
  TraceSetup s = trace_setup(f.name());
  if (a.digits) s.digits = *a.digits;
  if (!a.radii.empty()) s.cfg.scan.cluster_radii = parse_list(a.radii);
  if (!a.window.empty()) s.cfg.scan.valence_window = parse_window(a.window, a.grid, s.cfg.scan.valence_window);
  s.cfg.tol = std::min(s.cfg.tol, a.tol);
  s.cfg.scan.threads = a.threads;
  if (!a.curve_x.empty() || !a.curve_y.empty() || !a.curve_t.empty()) {
    if (a.curve_x.empty() || a.curve_y.empty() || a.curve_t.empty())
      throw UsageError("--curve-x, --curve-y and --curve-t go together");
    s.cfg.curve = CurveSpec{a.curve_x, a.curve_y, split(a.curve_t, ',')};
  }
  auto r = run_trace(f, wx, wy, s);
  Json rep = io::with_schema(Json{{"command", "trace"}, {"map", map_json(f)}, {"report", io::to_json(r)}});
  emit(a, "report.json", io::dump(rep));

  const auto& g = r.end_cut.path.vertices;
  io::Csv ec{"index", "xi_x", "xi_y"};
  for (std::size_t k = 0; k < g.size(); ++k) ec.row(k, g[k].x, g[k].y);
  emit(a, "endcut.csv", ec.str());
  {
    // image plane relative to w0, scaled to the first end-cut point
    double half = 0;
    for (const auto& p : g) half = std::max({half, std::abs(p.x), std::abs(p.y)});
    if (half == 0) half = 1;
    io::Svg svg(-1.05 * half, 1.05 * half, -1.05 * half, 1.05 * half);
    svg.polyline(g, "#2166ac");
    for (const auto& p : g) svg.circle(p, "#2166ac");
    emit(a, "endcut.svg", svg.str());
  }
  const auto& l = r.chosen_lift.lifted.vertices;
  emit(a, "lift.csv", io::points_csv(l));
  io::Svg ls(io::bounds_of(l));
  ls.polyline(l, "#1b7837");
  emit(a, "lift.svg", ls.str());
  print_summary(io::with_schema(Json{{"command", "trace"},
                                     {"verdict", to_string(r.verdict)},
                                     {"reason", r.reason},
                                     {"final_modulus", r.final_modulus},
                                     {"out", a.out}}));
  return r.verdict == Verdict::asymptotic_evidence ? 0 : 1;
}

int cmd_examples(const Args& a) {
  auto rows = run_corpus(a.threads);
  io::Csv c{"id", "map", "result", "detail"};
  Json arr = Json::array();
  bool all = true;
  for (const auto& r : rows) {
    c.row(r.id, r.map, r.pass ? "PASS" : "FAIL", r.detail);
    arr.push_back(Json{{"id", r.id}, {"map", r.map}, {"pass", r.pass}, {"detail", r.detail}, {"data", r.data}});
    all = all && r.pass;
    std::printf("%-16s %-13s %s  %s\n", r.id.c_str(), r.map.c_str(), r.pass ? "PASS" : "FAIL", r.detail.c_str());
  }
  emit(a, "examples.csv", c.str());
  emit(a, "examples.json", io::dump(io::with_schema(Json{{"command", "examples"}, {"rows", arr}})));
  return all ? 0 : 1;
}

void fail_json(const char* kind, const std::string& msg) {
  std::cerr << Json{{"schema_version", 1}, {"error", kind}, {"message", msg}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"harmap: planar harmonic map analysis"};
  app.require_subcommand(1);
  Args a;
  auto common = [&](CLI::App* s) {
    s->add_option("--map", a.map, "builtin name or map-definition JSON file");
    s->add_option("--u", a.u, "inline u(x, y)");
    s->add_option("--v", a.v, "inline v(x, y)");
    s->add_option("--window", a.window, "z window x0:x1:y0:y1");
    s->add_option("--wwindow", a.wwindow, "w window x0:x1:y0:y1");
    s->add_option("--grid", a.grid, "grid size")->check(CLI::PositiveNumber);
    s->add_option("--tol", a.tol, "tolerance")->check(CLI::PositiveNumber);
    s->add_option("--rho", a.rho, "radius")->check(CLI::PositiveNumber);
    s->add_option("--w0", a.w0, "target value a,b (expressions)");
    s->add_option("--radii", a.radii, "r1,r2,...");
    s->add_option("--out", a.out, "output directory");
    s->add_option("--threads", a.threads, "worker threads")->check(CLI::Range(1, 256));
    s->add_option("--seed", a.seed, "seed for random inputs");
  };
  struct Cmd {
    const char* name;
    const char* help;
    int (*run)(const Args&);
  };
  const Cmd cmds[] = {{"analyze", "Wirtinger and harmonicity spot checks", cmd_analyze},
                      {"critical", "critical set S and its image", cmd_critical},
                      {"valence-map", "valence heat map over a w window", cmd_valence},
                      {"cluster", "cluster-set samples at infinity", cmd_cluster},
                      {"lift", "lift an image path through every preimage", cmd_lift},
                      {"bloch-check", "quasiregular sequence certificate", cmd_bloch},
                      {"trace", "asymptotic-value pipeline at w0", cmd_trace},
                      {"examples", "worked-example regression table", cmd_examples}};
  std::vector<std::pair<CLI::App*, const Cmd*>> subs;
  for (const auto& c : cmds) {
    auto* s = app.add_subcommand(c.name, c.help);
    common(s);
    subs.emplace_back(s, &c);
  }
  for (auto& [s, c] : subs) {
    if (std::string(c->name) == "lift") s->add_option("--path", a.path, "image path a,b;c,d;...");
    if (std::string(c->name) == "bloch-check") s->add_option("--points", a.points, "sequence x,y;x,y;...");
    if (std::string(c->name) == "trace") {
      s->add_option("--curve-x", a.curve_x, "x(t) for a user sequence");
      s->add_option("--curve-y", a.curve_y, "y(t) for a user sequence");
      s->add_option("--curve-t", a.curve_t, "t1,t2,... for a user sequence");
      s->add_option("--digits", a.digits, "working digits, 0 for double")->check(CLI::Range(0u, 20000u));
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail_json("usage", e.what());
    return 2;
  }
  for (auto& [s, c] : subs) {
    if (!s->parsed()) continue;
    try {
      return c->run(a);
    } catch (const UsageError& e) {
      fail_json("usage", e.what());
      return 2;
    } catch (const ParseError& e) {
      fail_json("usage", e.what());
      return 2;
    } catch (const std::invalid_argument& e) {
      fail_json("usage", e.what());
      return 2;
    } catch (const ClusterError& e) {
      fail_json(to_string(e.kind()), e.what());
      return 1;
    } catch (const std::exception& e) {
      fail_json("analysis", e.what());
      return 1;
    }
  }
  return 2;
}
