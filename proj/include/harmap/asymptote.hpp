#pragma once

// Asymptotic-value pipeline for a cluster value w0 of f at infinity:
// preconditions at resolution, a sequence z_n -> infinity with f(z_n) -> w0
// moved off the partitioning set, an image end-cut through the images, its
// lift, and a divergence check on the lift.
//
// Image-side geometry runs in double in coordinates relative to w0, so
// images closer to w0 than double spacing at |w0| stay distinct. Below the
// resolution radius of the partition set the region is taken to be conical:
// a point's side is the side of its radial projection onto that radius.

#include "harmap/cluster.hpp"
#include "harmap/paths.hpp"
#include "harmap/valence.hpp"

#include <cctype>
#include <optional>
#include <string>
#include <vector>

namespace harmap {

// ---------------------------------------------------------------------------
// Divergence of a lift.

struct DivergenceResult {
  bool ok = false;
  std::vector<double> escape_radii;
  std::optional<double> failed_radius;
  std::size_t reentry_segment = 0;  // first segment back inside the failed radius
};

/// Radius m is certified when the lift gets beyond m and, after its first
/// exit, never comes back to |z| <= m (segments included). ok: every radius
/// the lift reaches is certified.
inline DivergenceResult divergence_check(const PolyPath& lift, const std::vector<double>& radii) {
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (!(radii[k] > radii[k - 1])) throw std::invalid_argument("radii must be strictly increasing");
  DivergenceResult out;
  out.ok = true;
  const auto& v = lift.vertices;
  const Point o{0, 0};
  for (double m : radii) {
    std::size_t first = v.size();
    for (std::size_t i = 0; i < v.size(); ++i)
      if (norm(v[i]) > m) {
        first = i;
        break;
      }
    if (first == v.size()) continue;  // never reached
    bool back = false;
    for (std::size_t i = first + 1; i < v.size() && !back; ++i)
      if (point_segment_distance(o, v[i - 1], v[i]) <= m) {
        back = true;
        if (!out.failed_radius) {
          out.failed_radius = m;
          out.reentry_segment = i - 1;
        }
      }
    if (back) out.ok = false;
    else out.escape_radii.push_back(m);
  }
  return out;
}

/// Preimages of w0 found by Newton from the two ends of the re-entry
/// segment; empty when the lift passed the check.
template <class Real>
std::vector<Point> divergence_shadows(const PlanarMap& f, const std::vector<Vec2<Real>>& lift, const Vec2<Real>& w0,
                                      const DivergenceResult& d, double tol) {
  std::vector<Point> out;
  if (!d.failed_radius) return out;
  for (std::size_t k : {d.reentry_segment, d.reentry_segment + 1}) {
    if (k >= lift.size()) continue;
    auto z = newton_solve<Real>(f, lift[k], w0, Real(tol), 80);
    if (z) out.push_back(Point(*z));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Components of B(w0, eps) minus the partition set, on a lattice.

class ImageComponents {
 public:
  /// Cells within `block` of the partition (lines and points) are removed.
  ImageComponents(const Point& w0, double eps, const PolylineSet& partition, int cells = 64, double block = 0)
      : w0_(w0), eps_(eps), n_(cells + 1), h_(2 * eps / cells) {
    const double b = block > 0 ? block : 1.5 * h_;
    SegmentIndex idx(partition, std::max(h_, b));
    std::vector<char> open(static_cast<std::size_t>(n_) * n_, 0);
    for (int j = 0; j < n_; ++j)
      for (int i = 0; i < n_; ++i) {
        Point xi = cell_center(i, j);
        if (norm(xi) >= eps) continue;
        open[index(i, j)] = partition.empty() || !(idx.nearest_within(w0 + xi, b) <= b);
      }
    label_.assign(open.size(), -1);
    for (int j = 0; j < n_; ++j)
      for (int i = 0; i < n_; ++i) {
        if (!open[index(i, j)] || label_[index(i, j)] >= 0) continue;
        std::vector<std::pair<int, int>> stack{{i, j}};
        label_[index(i, j)] = count_;
        while (!stack.empty()) {
          auto [a, c] = stack.back();
          stack.pop_back();
          const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
          for (int k = 0; k < 4; ++k) {
            int p = a + di[k], q = c + dj[k];
            if (p < 0 || q < 0 || p >= n_ || q >= n_) continue;
            std::size_t id = index(p, q);
            if (open[id] && label_[id] < 0) {
              label_[id] = count_;
              stack.emplace_back(p, q);
            }
          }
        }
        ++count_;
      }
  }

  int count() const { return count_; }
  double spacing() const { return h_; }
  /// Radius below which sides come from radial projection.
  double resolution_radius() const { return eps_ / 4; }

  /// Label of the cell holding xi = w - w0; -1 outside or blocked.
  int label_at(const Point& xi) const {
    if (!(norm(xi) < eps_)) return -1;
    int i = static_cast<int>(std::floor((xi.x + eps_) / h_ + 0.5));
    int j = static_cast<int>(std::floor((xi.y + eps_) / h_ + 0.5));
    if (i < 0 || j < 0 || i >= n_ || j >= n_) return -1;
    return label_[index(i, j)];
  }

  int side(const Point& xi) const {
    double r = norm(xi);
    if (r == 0) return -1;
    if (r >= resolution_radius()) return label_at(xi);
    return label_at((resolution_radius() / r) * xi);
  }

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n_ + i; }
  Point cell_center(int i, int j) const { return {-eps_ + i * h_, -eps_ + j * h_}; }

  Point w0_;
  double eps_;
  int n_;
  double h_;
  int count_ = 0;
  std::vector<int> label_;
};

/// Region oracle, relative to w0, for one component.
inline RegionOracle component_region(const ImageComponents& c, int label, double eps) {
  RegionOracle r;
  r.contains = [&c, label](const Point& xi) { return c.side(xi) == label; };
  r.bounds = {-eps, eps, -eps, eps, 3, 3};
  r.h = c.spacing() / 4;
  return r;
}

// ---------------------------------------------------------------------------
// Preconditions.

struct ScanConfig {
  double eps = 0.5;
  Window valence_window = square_window(6, 48);
  Window critical_window = square_window(4, 201);
  std::vector<double> cluster_radii{100, 200, 400, 800};
  int cloud_grid = 64;
  /// w0 is on f(S) when the image contours come this close.
  double fs_resolution = 1e-2;
  int component_cells = 64;
  int threads = 1;
};

struct PreconditionFindings {
  int valence = 0;
  bool valence_infinite = false;
  double distance_to_fS = std::numeric_limits<double>::infinity();
  bool on_fS = false;
  double cloud_resolution = 0;
  std::size_t cloud_points = 0;
  double max_empty_disk = 0;
  double filled_fraction = 0;
  bool cluster_interior = false;
  int components = 0;
  bool theorem_applies = false;
  /// Theorem hypotheses fail in the way that rules w0 out: the cluster set
  /// fills part of B(w0, eps) and w0 is taken infinitely often.
  bool hard_fail = false;
  std::vector<std::string> notes;
  /// Partition at resolution: f(S) images plus the persistent cluster cloud.
  PolylineSet fS;
  PolylineSet cloud;
};

inline PreconditionFindings precondition_scan(const PlanarMap& f, const Point& w0, const ScanConfig& cfg) {
  if (!(cfg.eps > 0)) throw std::invalid_argument("eps must be positive");
  PreconditionFindings out;
  const double eps = cfg.eps;

  ValenceOptions vo;
  vo.threads = cfg.threads;
  auto val = valence_at(f, w0, cfg.valence_window, vo);
  out.valence = val.count;
  out.valence_infinite = val.infinite;

  ContourOptions co;
  co.threads = cfg.threads;
  out.fS = image_of_critical(f, critical_contours(f, cfg.critical_window, co));
  if (!out.fS.empty()) out.distance_to_fS = SegmentIndex(out.fS, 0.1).nearest(w0);
  out.on_fS = out.distance_to_fS <= cfg.fs_resolution;

  Window ww{w0.x - eps, w0.x + eps, w0.y - eps, w0.y + eps, cfg.cloud_grid, cfg.cloud_grid};
  ClusterOptions clo;
  clo.threads = cfg.threads;
  auto cs = cluster_samples(f, cfg.cluster_radii, ww, clo);
  out.cloud = cs.cloud;
  out.cloud_points = cs.cloud.points.size();
  out.cloud_resolution = cs.eps_persist;

  // Density: probe lattice at the cloud resolution over B(w0, eps).
  const double g = cs.eps_persist;
  PointIndex idx(cs.cloud.points, g);
  const int m = static_cast<int>(std::ceil(eps / g));
  std::vector<Point> probes;
  std::vector<char> filled;
  for (int j = -m; j <= m; ++j)
    for (int i = -m; i <= m; ++i) {
      Point p{w0.x + i * g, w0.y + j * g};
      if (distance(p, w0) >= eps) continue;
      double d = cs.cloud.points.empty() ? eps : std::min(eps, idx.nearest(p));
      probes.push_back(p);
      filled.push_back(d <= g);
      out.max_empty_disk = std::max(out.max_empty_disk, d);
    }
  std::size_t nfilled = std::count(filled.begin(), filled.end(), 1);
  out.filled_fraction = probes.empty() ? 0 : static_cast<double>(nfilled) / probes.size();
  // Interior: some disk of radius eps/4 centred within eps/2 of w0 is filled.
  const double r = eps / 4;
  for (std::size_t c = 0; c < probes.size() && !out.cluster_interior; ++c) {
    if (!filled[c] || distance(probes[c], w0) > eps / 2) continue;
    bool all = true;
    for (std::size_t q = 0; q < probes.size() && all; ++q)
      if (distance(probes[q], probes[c]) <= r) all = filled[q];
    out.cluster_interior = all;
  }

  PolylineSet partition = out.fS;
  partition.points.insert(partition.points.end(), out.cloud.points.begin(), out.cloud.points.end());
  out.components = ImageComponents(w0, eps, partition, cfg.component_cells).count();

  bool val_ok = !out.valence_infinite || !out.on_fS;
  out.theorem_applies = val_ok && !out.cluster_interior && out.components > 0;
  out.hard_fail = out.cluster_interior && out.valence_infinite;
  if (out.cloud_points == 0) out.notes.push_back("no persistent cluster samples near w0");
  if (out.valence_infinite && out.on_fS) out.notes.push_back("outside theorem: Val = inf and w0 in f(S)");
  if (out.cluster_interior)
    out.notes.push_back(out.hard_fail ? "cluster-interior: cluster set fills part of B(w0, eps) and Val = inf"
                                      : "outside theorem: cluster set fills part of B(w0, eps)");
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline.

enum class Verdict { asymptotic_evidence, precondition_failed, lift_did_not_escape, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::asymptotic_evidence: return "asymptotic-evidence";
    case Verdict::precondition_failed: return "precondition-failed";
    case Verdict::lift_did_not_escape: return "lift-did-not-escape";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

/// z_k = (x(t_k), y(t_k)); expressions in t, values as expressions too.
struct CurveSpec {
  std::string x, y;
  std::vector<std::string> t;
};

/// Replaces the identifier t by x so the expression parser accepts it.
inline std::string substitute_t(const std::string& e) {
  std::string out;
  for (std::size_t i = 0; i < e.size();) {
    if (std::isalpha(static_cast<unsigned char>(e[i])) || e[i] == '_') {
      std::size_t j = i;
      while (j < e.size() && (std::isalnum(static_cast<unsigned char>(e[j])) || e[j] == '_')) ++j;
      std::string tok = e.substr(i, j - i);
      out += tok == "t" ? "x" : tok;
      i = j;
    } else {
      out += e[i++];
    }
  }
  return out;
}

struct AsymptoteConfig {
  ScanConfig scan;
  SequenceOptions sequence;
  std::optional<CurveSpec> curve;
  /// Include the cluster cloud in the partition the sequence must avoid.
  bool cluster_in_partition = true;
  RefineOptions refine;
  std::size_t max_stages = 12;
  double tol = 1e-10;
  std::optional<double> j_min;
  std::vector<double> escape_radii{10, 25, 50, 100};
  /// Extra lift starts: preimages of the first end-cut point in this window.
  std::optional<Window> lift_window;
  std::size_t max_lifts = 8;
  std::optional<double> deadline_seconds;
};

struct AsymptoteReport {
  Point w0;
  std::string strategy;
  PreconditionFindings findings;
  std::vector<Point> sequence;  // z_n (double rounding of the working values)
  std::vector<double> sequence_distances;
  std::vector<Point> refined;      // zeta_n
  std::vector<Point> refined_xi;   // f(zeta_n) - w0
  std::vector<int> sides;          // component label per refined term
  int chosen_component = -1;
  EndCutResult end_cut;            // vertices relative to w0
  LiftResult chosen_lift;          // vertices rounded to double
  std::size_t lifts_tried = 0;
  std::size_t matched_points = 0;
  DivergenceResult divergence;
  std::vector<double> escape_radii;
  std::vector<Point> shadow_preimages;
  double final_modulus = 0;
  double final_image_distance = 0;
  int digits = 0;
  Verdict verdict = Verdict::inconclusive;
  std::string reason;
};

namespace asymptote_detail {

template <class Real>
Vec2<Real> to_real(const Point& p) {
  return {Real(p.x), Real(p.y)};
}

template <class Real>
ClusterSequence<Real> build_sequence(const PlanarMap& f, const Vec2<Real>& w0, const AsymptoteConfig& cfg) {
  if (!cfg.curve) return sequence_to_cluster<Real>(f, w0, cfg.sequence);
  auto ex = Expression::parse(substitute_t(cfg.curve->x));
  auto ey = Expression::parse(substitute_t(cfg.curve->y));
  std::vector<Real> ts;
  for (const auto& t : cfg.curve->t) ts.push_back(Expression::parse(t).evaluate<Real>(Real(0), Real(0)));
  return sequence_from_curve<Real>(
      f, w0, [&](const Real& t) { return Vec2<Real>(ex.evaluate<Real>(t, Real(0)), ey.evaluate<Real>(t, Real(0))); },
      ts);
}

}  // namespace asymptote_detail

template <class Real>
AsymptoteReport trace_asymptote(const PlanarMap& f, const Vec2<Real>& w0, const AsymptoteConfig& cfg) {
  AsymptoteReport rep;
  rep.w0 = Point(w0);
  rep.digits = working_digits<Real>();
  const double eps = cfg.scan.eps;
  auto finish = [&](Verdict v, std::string why) {
    rep.verdict = v;
    rep.reason = std::move(why);
    return rep;
  };

  // 1. Preconditions at resolution.
  rep.findings = precondition_scan(f, rep.w0, cfg.scan);
  if (rep.findings.hard_fail) return finish(Verdict::precondition_failed, "cluster-interior");

  // 2. Sequence tending to infinity with images tending to w0.
  ClusterSequence<Real> seq;
  try {
    seq = asymptote_detail::build_sequence<Real>(f, w0, cfg);
  } catch (const ClusterError& e) {
    return finish(Verdict::precondition_failed, std::string(to_string(e.kind())) + ": " + e.what());
  } catch (const std::exception& e) {
    return finish(Verdict::inconclusive, std::string("sequence: ") + e.what());
  }
  rep.strategy = seq.strategy;
  for (std::size_t k = 0; k < seq.points.size(); ++k) {
    rep.sequence.push_back(Point(seq.points[k]));
    rep.sequence_distances.push_back(to_double(seq.distances[k]));
  }

  // 3. Off the partition set.
  PolylineSet partition = rep.findings.fS;
  if (cfg.cluster_in_partition)
    partition.points.insert(partition.points.end(), rep.findings.cloud.points.begin(),
                            rep.findings.cloud.points.end());
  RefineOptions ro = cfg.refine;
  if (ro.resolution == 0 && cfg.cluster_in_partition) ro.resolution = rep.findings.cloud_resolution;
  ro.j_min = cfg.j_min;
  RefinedSequence<Real> ref;
  try {
    ref = off_partition_refine<Real>(f, seq, partition, w0, eps, ro);
  } catch (const ClusterError& e) {
    bool filled = std::string(e.what()).find("fills") != std::string::npos;
    return finish(filled ? Verdict::precondition_failed : Verdict::inconclusive,
                  std::string(filled ? "cluster-interior: " : "refinement: ") + e.what());
  }
  std::vector<Point> xi;
  for (std::size_t k = 0; k < ref.points.size(); ++k) {
    rep.refined.push_back(Point(ref.points[k]));
    xi.push_back(Point(ref.images[k] - w0));
  }
  rep.refined_xi = xi;

  // 4. Pigeonhole on components: most terms, ties to the first seen.
  ImageComponents comps(rep.w0, eps, partition, cfg.scan.component_cells);
  std::vector<int> order, counts;
  for (const auto& p : xi) {
    int s = comps.side(p);
    rep.sides.push_back(s);
    if (s < 0) continue;
    auto it = std::find(order.begin(), order.end(), s);
    if (it == order.end()) {
      order.push_back(s);
      counts.push_back(1);
    } else {
      ++counts[static_cast<std::size_t>(it - order.begin())];
    }
  }
  if (order.empty()) return finish(Verdict::inconclusive, "no refined image lies in a resolved component");
  std::size_t best = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  rep.chosen_component = order[best];
  std::vector<Point> sub;
  std::vector<std::size_t> sub_ref;  // index into ref
  for (std::size_t k = 0; k < xi.size(); ++k)
    if (rep.sides[k] == rep.chosen_component) {
      sub.push_back(xi[k]);
      sub_ref.push_back(k);
    }

  // 5. End-cut in the image, relative to w0.
  RegionOracle region = component_region(comps, rep.chosen_component, eps);
  EndCutOptions eo;
  eo.max_stages = cfg.max_stages;
  try {
    rep.end_cut = end_cut(sub, region, eps, eo);
  } catch (const PathError& e) {
    return finish(Verdict::inconclusive, std::string("end-cut: ") + e.what());
  }
  if (rep.end_cut.kept_indices.size() < 2)
    return finish(Verdict::inconclusive, "end-cut: " + rep.end_cut.diagnostic);

  // 6. Lift; the kept vertices carry the exact images f(zeta_n).
  BasicPolyPath<Real> gamma;
  for (const auto& p : rep.end_cut.path.vertices) gamma.vertices.push_back(w0 + asymptote_detail::to_real<Real>(p));
  for (std::size_t k = 0; k < rep.end_cut.kept_indices.size(); ++k)
    gamma.vertices[rep.end_cut.piece_end[k]] = ref.images[sub_ref[rep.end_cut.kept_indices[k]]];
  const Vec2<Real> zeta_first = ref.points[sub_ref[rep.end_cut.kept_indices[0]]];

  BasicLiftOptions<Real> lo;
  lo.tol = cfg.tol;
  lo.j_min = cfg.j_min;
  lo.anchor = w0;
  lo.deadline_seconds = cfg.deadline_seconds;
  std::vector<Vec2<Real>> starts{zeta_first};
  if (cfg.lift_window) {
    PreimageOptions po;
    po.threads = cfg.scan.threads;
    auto pre = preimages(f, Point(gamma.vertices[0]), *cfg.lift_window, po);
    for (const auto& p : pre.points) {
      if (starts.size() >= cfg.max_lifts) break;
      auto z = newton_solve<Real>(f, asymptote_detail::to_real<Real>(p), gamma.vertices[0], Real(cfg.tol) * Real(1e-3), 80);
      if (!z) continue;
      bool dup = false;
      for (const auto& s : starts) dup = dup || to_double(distance(s, *z)) <= 1e-6 * std::max(1.0, to_double(norm(*z)));
      if (!dup) starts.push_back(*z);
    }
  }
  std::optional<BasicLiftResult<Real>> chosen;
  std::size_t chosen_hits = 0;
  for (const auto& s : starts) {
    auto lift = lift_path<Real>(f, gamma, s, lo);
    ++rep.lifts_tried;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < rep.end_cut.kept_indices.size(); ++k) {
      std::size_t g = rep.end_cut.piece_end[k];
      if (g >= lift.vertex_index.size()) break;
      const auto& z = lift.lifted.vertices[lift.vertex_index[g]];
      const auto& zeta = ref.points[sub_ref[rep.end_cut.kept_indices[k]]];
      if (to_double(distance(z, zeta)) <= 1e-6 * std::max(1.0, to_double(norm(zeta)))) ++hits;
    }
    if (!chosen || hits > chosen_hits) {
      chosen = std::move(lift);
      chosen_hits = hits;
    }
  }
  rep.matched_points = chosen_hits;
  for (const auto& v : chosen->lifted.vertices) rep.chosen_lift.lifted.vertices.push_back(Point(v));
  for (const auto& t : chosen->targets) rep.chosen_lift.targets.push_back(Point(t));
  rep.chosen_lift.vertex_index = chosen->vertex_index;
  rep.chosen_lift.status = chosen->status;
  rep.chosen_lift.max_residual = chosen->max_residual;
  rep.chosen_lift.min_jacobian_ratio = chosen->min_jacobian_ratio;
  if (!chosen->lifted.vertices.empty()) {
    rep.final_modulus = to_double(norm(chosen->lifted.vertices.back()));
    rep.final_image_distance = to_double(distance(f(chosen->lifted.vertices.back()), w0));
  }

  // 7. Divergence, with Newton shadows of w0 near a failed radius.
  rep.divergence = divergence_check(rep.chosen_lift.lifted, cfg.escape_radii);
  rep.escape_radii = rep.divergence.escape_radii;
  rep.shadow_preimages = divergence_shadows<Real>(f, chosen->lifted.vertices, w0, rep.divergence, cfg.tol);

  if (rep.chosen_lift.status == LiftStatus::hit_critical)
    return finish(Verdict::lift_did_not_escape, "lift hit the critical set");
  if (!(rep.chosen_lift.max_residual <= cfg.tol)) return finish(Verdict::inconclusive, "lift residual above tolerance");
  if (rep.escape_radii.size() >= 3 && rep.divergence.ok)
    return finish(Verdict::asymptotic_evidence, std::string("lift status ") + to_string(rep.chosen_lift.status));
  return finish(Verdict::lift_did_not_escape, "escaped " + std::to_string(rep.escape_radii.size()) + " radii");
}

}  // namespace harmap
