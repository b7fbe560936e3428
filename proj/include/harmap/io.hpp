#pragma once

// CSV, SVG and JSON emitters. CSV floats use %.17g with LF endings; SVG
// maps a data window onto an 800x800 viewBox with y pointing up.

#include "harmap/asymptote.hpp"
#include "harmap/bloch.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace harmap::io {

using Json = nlohmann::ordered_json;

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

// ---------------------------------------------------------------------------
// CSV

class Csv {
 public:
  explicit Csv(std::initializer_list<const char*> header) {
    bool first = true;
    for (const char* h : header) {
      if (!first) s_ << ',';
      s_ << h;
      first = false;
    }
    s_ << '\n';
  }
  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((s_ << (first ? "" : ",") << cell(cells), first = false), ...);
    s_ << '\n';
  }
  std::string str() const { return s_.str(); }

 private:
  static std::string cell(double x) { return num(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(const std::string& x) {
    if (x.find_first_of(",\"\n") == std::string::npos) return x;
    std::string q = "\"";
    for (char ch : x) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  static std::string cell(const char* x) { return cell(std::string(x)); }
  std::ostringstream s_;
};

/// One row per vertex; isolated points get their own ids after the lines.
inline std::string polylines_csv(const PolylineSet& s) {
  Csv c{"polyline", "source", "x", "y"};
  std::size_t id = 0;
  for (const auto& l : s.lines) {
    for (const auto& p : l.points) c.row(id, to_string(l.source), p.x, p.y);
    ++id;
  }
  for (const auto& p : s.points) c.row(id++, "point", p.x, p.y);
  return c.str();
}

inline std::string points_csv(const std::vector<Point>& pts) {
  Csv c{"index", "x", "y"};
  for (std::size_t k = 0; k < pts.size(); ++k) c.row(k, pts[k].x, pts[k].y);
  return c.str();
}

inline std::string valence_csv(const ValenceGrid& g) {
  Csv c{"i", "j", "u", "v", "valence", "boundary"};
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      Point w = g.center(i, j);
      c.row(i, j, w.x, w.y, g.at(i, j), g.is_boundary(i, j) ? 1 : 0);
    }
  return c.str();
}

// ---------------------------------------------------------------------------
// SVG

/// Discrete ramp for valence 0..6, 7+ and confirmed-infinite cells.
inline const char* valence_color(int v) {
  static const char* ramp[] = {"#f7f7f7", "#c6dbef", "#6baed6", "#2171b5", "#08306b",
                               "#54278f", "#980043", "#ce1256"};
  if (v == ValenceGrid::infinite_valence) return "#000000";
  if (v < 0) return "#ffffff";
  return ramp[std::min(v, 7)];
}

class Svg {
 public:
  Svg(double x0, double x1, double y0, double y1) : x0_(x0), y0_(y0), sx_(800 / (x1 - x0)), sy_(800 / (y1 - y0)) {
    if (!(x1 > x0 && y1 > y0)) throw std::invalid_argument("empty SVG window");
    s_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 800\" width=\"800\" height=\"800\">\n"
       << "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
  }
  explicit Svg(const Window& w) : Svg(w.xmin, w.xmax, w.ymin, w.ymax) {}

  void polyline(const std::vector<Point>& pts, const char* stroke, double width = 1) {
    if (pts.empty()) return;
    s_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\" points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) s_ << (k ? " " : "") << px(pts[k].x) << ',' << py(pts[k].y);
    s_ << "\"/>\n";
  }
  void circle(const Point& p, const char* fill) {
    s_ << "<circle cx=\"" << px(p.x) << "\" cy=\"" << py(p.y) << "\" r=\"1\" fill=\"" << fill << "\"/>\n";
  }
  void cell(double x0, double x1, double y0, double y1, const char* fill) {
    s_ << "<rect x=\"" << px(x0) << "\" y=\"" << py(y1) << "\" width=\"" << fixed((x1 - x0) * sx_)
       << "\" height=\"" << fixed((y1 - y0) * sy_) << "\" fill=\"" << fill << "\"/>\n";
  }
  void polylines(const PolylineSet& s, const char* stroke) {
    for (const auto& l : s.lines) polyline(l.points, stroke);
    for (const auto& p : s.points) circle(p, stroke);
  }
  std::string str() const { return s_.str() + "</svg>\n"; }

 private:
  std::string px(double x) const { return fixed((x - x0_) * sx_); }
  std::string py(double y) const { return fixed(800 - (y - y0_) * sy_); }
  static std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
  }
  double x0_, y0_, sx_, sy_;
  std::ostringstream s_;
};

inline std::string valence_svg(const ValenceGrid& g) {
  Svg svg(g.wwindow);
  const double cw = g.cell_w(), ch = g.cell_h();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      double x = g.wwindow.xmin + i * cw, y = g.wwindow.ymin + j * ch;
      svg.cell(x, x + cw, y, y + ch, valence_color(g.at(i, j)));
    }
  return svg.str();
}

/// Bounding box of a point list, padded by 5% and squared up.
inline Window bounds_of(const std::vector<Point>& pts) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& p : pts) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  if (pts.empty()) return {-1, 1, -1, 1, 1, 1};
  double half = 0.5 * std::max({x1 - x0, y1 - y0, 1e-300}) * 1.05;
  double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  return {cx - half, cx + half, cy - half, cy + half, 1, 1};
}

// ---------------------------------------------------------------------------
// JSON

inline Json with_schema(Json body) {
  Json j;
  j["schema_version"] = 1;
  for (auto& [k, v] : body.items()) j[k] = v;
  return j;
}

inline Json to_json(const Point& p) { return Json::array({p.x, p.y}); }

inline Json to_json(const std::vector<Point>& v) {
  Json a = Json::array();
  for (const auto& p : v) a.push_back(to_json(p));
  return a;
}

inline Json to_json(const Window& w) {
  return Json{{"x0", w.xmin}, {"x1", w.xmax}, {"y0", w.ymin}, {"y1", w.ymax}, {"nx", w.nx}, {"ny", w.ny}};
}

inline Json to_json(const LiftResult& r) {
  return Json{{"status", to_string(r.status)},
              {"vertices", r.lifted.vertices.size()},
              {"max_residual", r.max_residual},
              {"min_jacobian_ratio", r.min_jacobian_ratio},
              {"start", r.lifted.vertices.empty() ? Json() : to_json(r.lifted.vertices.front())},
              {"end", r.lifted.vertices.empty() ? Json() : to_json(r.lifted.vertices.back())}};
}

inline Json to_json(const SequenceCertificate& c) {
  Json v = Json::array();
  for (const auto& s : c.violations) v.push_back(s);
  return Json{{"pass", c.pass},
              {"delta", c.delta},
              {"delta_floor", c.delta_floor},
              {"eta_sq", c.eta_sq},
              {"rho", c.rho},
              {"M", c.M},
              {"K", c.K},
              {"j_ratio_sup", c.j_ratio_sup},
              {"Lambda", c.Lambda},
              {"Lambda_sq", c.Lambda_sq},
              {"r0", c.r0},
              {"r1", c.r1},
              {"jacobians", c.jacobians},
              {"used", c.used},
              {"conjugated", c.conjugated},
              {"sampling", {{"radial", c.radial}, {"angular", c.angular}}},
              {"violations", v}};
}

inline Json to_json(const SchlichtReport& s) {
  return Json{{"hits", s.hits}, {"total", s.total}, {"fraction", s.fraction}, {"max_residual", s.max_residual},
              {"w_grid", s.w_grid}};
}

inline Json to_json(const SequenceDiagnosis& d) {
  Json notes = Json::array();
  for (const auto& n : d.notes) notes.push_back(n);
  Json certs = Json::array();
  Json conds = Json::array();
  for (const auto& c : d.conditions) conds.push_back(Json{{"holds", c.holds}, {"detail", c.detail}});
  for (const auto& c : d.certificates) certs.push_back(to_json(c));
  return Json{{"conditions", conds},
              {"images_converge", d.images_converge},
              {"distances", d.distances},
              {"certificates", certs},
              {"notes", notes}};
}

inline Json to_json(const PreconditionFindings& f) {
  Json notes = Json::array();
  for (const auto& n : f.notes) notes.push_back(n);
  return Json{{"valence", f.valence},
              {"valence_infinite", f.valence_infinite},
              {"distance_to_fS", f.distance_to_fS},
              {"on_fS", f.on_fS},
              {"cloud_points", f.cloud_points},
              {"cloud_resolution", f.cloud_resolution},
              {"max_empty_disk", f.max_empty_disk},
              {"filled_fraction", f.filled_fraction},
              {"cluster_interior", f.cluster_interior},
              {"components", f.components},
              {"theorem_applies", f.theorem_applies},
              {"hard_fail", f.hard_fail},
              {"notes", notes}};
}

inline Json to_json(const AsymptoteReport& r) {
  Json sched{{"eps0", r.end_cut.schedule.eps0}, {"delta0", r.end_cut.schedule.delta0}, {"rho", r.end_cut.schedule.rho},
             {"d", r.end_cut.schedule.d}};
  return Json{{"w0", to_json(r.w0)},
              {"verdict", to_string(r.verdict)},
              {"reason", r.reason},
              {"digits", r.digits},
              {"findings", to_json(r.findings)},
              {"sequence",
               {{"strategy", r.strategy}, {"points", to_json(r.sequence)}, {"distances", r.sequence_distances}}},
              {"refined", {{"points", to_json(r.refined)}, {"xi", to_json(r.refined_xi)}, {"sides", r.sides}}},
              {"chosen_component", r.chosen_component},
              {"end_cut",
               {{"kept", r.end_cut.kept_indices},
                {"vertices", r.end_cut.path.size()},
                {"stalled", r.end_cut.stalled},
                {"diagnostic", r.end_cut.diagnostic},
                {"schedule", sched}}},
              {"lift", to_json(r.chosen_lift)},
              {"lifts_tried", r.lifts_tried},
              {"matched_points", r.matched_points},
              {"escape_radii", r.escape_radii},
              {"divergence_ok", r.divergence.ok},
              {"failed_radius", r.divergence.failed_radius ? Json(*r.divergence.failed_radius) : Json()},
              {"shadow_preimages", to_json(r.shadow_preimages)},
              {"final_modulus", r.final_modulus},
              {"final_image_distance", r.final_image_distance}};
}

/// Pretty JSON with a trailing newline.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace harmap::io
