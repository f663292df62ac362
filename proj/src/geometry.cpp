#include "charflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

namespace charflow {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::AmbiguousProjection: return "AmbiguousProjection";
    case Errc::OutsideTube: return "OutsideTube";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::NearStopSet: return "NearStopSet";
    case Errc::DegenerateField: return "DegenerateField";
    case Errc::NotCausal: return "NotCausal";
    case Errc::EmptyMask: return "EmptyMask";
    case Errc::DisconnectedMask: return "DisconnectedMask";
    case Errc::StepLimit: return "StepLimit";
    case Errc::LeftDomain: return "LeftDomain";
    case Errc::LevelNotFound: return "LevelNotFound";
    case Errc::NodeProximity: return "NodeProximity";
    case Errc::MissingAux: return "MissingAux";
    case Errc::UnreadableImage: return "UnreadableImage";
    case Errc::MaskMismatch: return "MaskMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

// Minimizes a unimodal function on [lo, hi].
template <typename F>
double golden_section(F&& f, double lo, double hi, int iterations = 80) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iterations && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++i) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// BoundaryCurve

BoundaryCurve::BoundaryCurve(double a, double b, PointFn position, PointFn tangent,
                             Orientation orientation, std::size_t n_samples,
                             Projector exact_projector)
    : a_(a),
      b_(b),
      position_(std::move(position)),
      tangent_(std::move(tangent)),
      orientation_(orientation),
      exact_(std::move(exact_projector)) {
  if (!(b > a)) throw Error(Errc::InvalidArgument, "empty period interval");
  n_samples = std::max<std::size_t>(n_samples, 512);
  samples_.reserve(n_samples);
  params_.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double s = a + (b - a) * static_cast<double>(i) / static_cast<double>(n_samples);
    params_.push_back(s);
    samples_.push_back(position_(s));
  }
}

BoundaryCurve BoundaryCurve::polyline(std::vector<Point> vertices) {
  if (vertices.size() < 3) throw Error(Errc::InvalidArgument, "polyline needs >= 3 vertices");
  auto cumulative = std::make_shared<std::vector<double>>(vertices.size() + 1, 0.0);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    (*cumulative)[i + 1] =
        (*cumulative)[i] + (vertices[(i + 1) % vertices.size()] - vertices[i]).norm();
  }
  const double total = cumulative->back();
  auto verts = std::make_shared<std::vector<Point>>(std::move(vertices));
  auto locate = [cumulative, verts](double s) {
    auto it = std::upper_bound(cumulative->begin(), cumulative->end(), s);
    std::size_t i = static_cast<std::size_t>(std::distance(cumulative->begin(), it));
    i = std::clamp<std::size_t>(i, 1, verts->size()) - 1;
    return i;
  };
  auto position = [verts, cumulative, locate](double s) -> Point {
    const std::size_t i = locate(s);
    const Point& p = (*verts)[i];
    const Point& q = (*verts)[(i + 1) % verts->size()];
    const double len = (*cumulative)[i + 1] - (*cumulative)[i];
    const double w = len > 0 ? (s - (*cumulative)[i]) / len : 0.0;
    return p + w * (q - p);
  };
  auto tangent = [verts, locate](double s) -> Vec2 {
    const std::size_t i = locate(s);
    return (*verts)[(i + 1) % verts->size()] - (*verts)[i];
  };
  double signed_area = 0.0;
  for (std::size_t i = 0; i < verts->size(); ++i) {
    signed_area += cross((*verts)[i], (*verts)[(i + 1) % verts->size()]);
  }
  const Orientation o = signed_area > 0 ? Orientation::CounterClockwise : Orientation::Clockwise;
  return BoundaryCurve(0.0, total, position, tangent, o, std::max<std::size_t>(1024, 8 * verts->size()));
}

double BoundaryCurve::wrap(double s) const {
  const double p = period();
  double r = std::fmod(s - a_, p);
  if (r < 0) r += p;
  if (r >= p) r = 0.0;
  return a_ + r;
}

BoundaryProjection BoundaryCurve::project(const Point& x) const {
  if (exact_) return exact_(x);
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const double d2 = (samples_[i] - x).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  const double ds = period() / static_cast<double>(samples_.size());
  const double center = params_[best];
  auto dist2 = [&](double s) { return (position_(wrap(s)) - x).squaredNorm(); };
  const double s = wrap(golden_section(dist2, center - ds, center + ds));
  const double refined = dist2(s);
  if (refined <= best_d2) return {s, std::sqrt(refined)};
  return {center, std::sqrt(best_d2)};
}

double BoundaryCurve::length() const {
  double len = 0.0;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    len += (samples_[(i + 1) % samples_.size()] - samples_[i]).norm();
  }
  return len;
}

double BoundaryCurve::enclosed_area() const {
  double area = 0.0;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    area += cross(samples_[i], samples_[(i + 1) % samples_.size()]);
  }
  return 0.5 * std::abs(area);
}

bool BoundaryCurve::polygon_contains(const Point& x) const {
  int winding = 0;
  const std::size_t n = samples_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = samples_[i];
    const Point& q = samples_[(i + 1) % n];
    if (p.y() <= x.y()) {
      if (q.y() > x.y() && cross(q - p, x - p) > 0) ++winding;
    } else {
      if (q.y() <= x.y() && cross(q - p, x - p) < 0) --winding;
    }
  }
  return winding != 0;
}

// ---------------------------------------------------------------------------
// Stop set

StopArc StopArc::segment(const Point& from, const Point& to) {
  StopArc arc;
  arc.position = [from, to](double t) -> Point { return from + t * (to - from); };
  arc.tangent = [from, to](double) -> Vec2 { return to - from; };
  return arc;
}

Vec2 StopArc::normal(double t) const {
  Vec2 n = perp<double>(tangent(t)).normalized();
  return flip_normal ? Vec2(-n) : n;
}

double StopArc::length(std::size_t n) const {
  double len = 0.0;
  Point prev = position(0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    const Point p = position(static_cast<double>(i) / static_cast<double>(n));
    len += (p - prev).norm();
    prev = p;
  }
  return len;
}

StopSet StopSet::isolated_point(const Point& p) {
  StopSet s;
  s.degenerate_ = true;
  s.point_ = p;
  s.nodes_.push_back({p, NodeKind::Terminal});
  return s;
}

StopSet StopSet::from_arcs(std::vector<StopArc> arcs) {
  if (arcs.empty()) throw Error(Errc::InvalidArgument, "stop set needs at least one arc");
  StopSet s;
  s.arcs_ = std::move(arcs);
  std::vector<Point> pts;
  std::vector<int> degree;
  std::vector<std::vector<Vec2>> dirs;
  auto node_of = [&](const Point& p, const Vec2& outgoing) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if ((pts[i] - p).norm() < 1e-9) {
        ++degree[i];
        dirs[i].push_back(outgoing);
        return i;
      }
    }
    pts.push_back(p);
    degree.push_back(1);
    dirs.push_back({outgoing});
    return pts.size() - 1;
  };
  for (const auto& arc : s.arcs_) {
    s.arc_from_.push_back(node_of(arc.position(0.0), arc.tangent(0.0).normalized()));
    s.arc_to_.push_back(node_of(arc.position(1.0), Vec2(-arc.tangent(1.0).normalized())));
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    NodeKind kind = NodeKind::Terminal;
    if (degree[i] >= 3) {
      kind = NodeKind::Branching;
    } else if (degree[i] == 2) {
      kind = NodeKind::Kink;
    }
    s.nodes_.push_back({pts[i], kind});
  }
  return s;
}

double StopSet::length() const {
  double len = 0.0;
  for (const auto& arc : arcs_) len += arc.length();
  return len;
}

std::size_t StopSet::component_count() const {
  if (degenerate_) return 1;
  std::vector<std::size_t> parent(nodes_.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t k = 0; k < arcs_.size(); ++k) parent[find(arc_from_[k])] = find(arc_to_[k]);
  std::size_t count = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) count += (find(i) == i) ? 1 : 0;
  return count;
}

bool StopSet::is_tree() const {
  if (degenerate_) return true;
  return component_count() == 1 && arcs_.size() + 1 == nodes_.size();
}

ArcProjection StopSet::project_to_arc(std::size_t k, const Point& x) const {
  if (k >= arcs_.size()) throw Error(Errc::InvalidArgument, "arc index out of range");
  const StopArc& arc = arcs_[k];
  constexpr int kCoarse = 64;
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= kCoarse; ++j) {
    const double d2 = (arc.position(static_cast<double>(j) / kCoarse) - x).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = j;
    }
  }
  const double lo = std::max(0.0, (best - 1.0) / kCoarse);
  const double hi = std::min(1.0, (best + 1.0) / kCoarse);
  auto dist2 = [&](double t) { return (arc.position(t) - x).squaredNorm(); };
  double t = golden_section(dist2, lo, hi);
  // Golden section never evaluates the bracket ends; pin them explicitly.
  for (double end : {lo, hi}) {
    if (dist2(end) <= dist2(t)) t = end;
  }
  const Point p = arc.position(t);
  return {t, p, (p - x).norm()};
}

Point StopSet::nearest(const Point& x) const {
  if (degenerate_) return point_;
  Point best = arcs_.front().position(0.0);
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < arcs_.size(); ++k) {
    const ArcProjection p = project_to_arc(k, x);
    if (p.dist < best_d) {
      best_d = p.dist;
      best = p.point;
    }
  }
  return best;
}

std::vector<Point> StopSet::samples(std::size_t per_arc) const {
  if (degenerate_) return {point_};
  std::vector<Point> out;
  for (const auto& arc : arcs_) {
    for (std::size_t j = 0; j <= per_arc; ++j) {
      out.push_back(arc.position(static_cast<double>(j) / static_cast<double>(per_arc)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Domain

Domain::Domain(std::string name, BoundaryCurve boundary, StopSet stopset, BBox bbox,
               Predicate contains)
    : name_(std::move(name)),
      boundary_(std::move(boundary)),
      stopset_(std::move(stopset)),
      bbox_(bbox) {
  if (contains) {
    contains_ = std::move(contains);
  } else {
    // Copy the curve into the closure so the domain stays safely copyable.
    contains_ = [c = *boundary_](const Point& x) { return c.polygon_contains(x); };
  }
  projector_ = [c = *boundary_](const Point& x) { return c.project(x); };
  clamp_ = [c = *boundary_, inside = contains_](const Point& x) -> Point {
    if (inside(x)) return x;
    return c.position(c.project(x).s);
  };
  area_ = boundary_->enclosed_area();
}

Domain::Domain(std::string name, StopSet stopset, BBox bbox, Predicate contains, Clamp clamp,
               Projector projector, double area)
    : name_(std::move(name)),
      stopset_(std::move(stopset)),
      bbox_(bbox),
      contains_(std::move(contains)),
      clamp_(std::move(clamp)),
      projector_(std::move(projector)),
      area_(area) {
  if (!contains_ || !clamp_ || !projector_) {
    throw Error(Errc::InvalidArgument, "raster domain needs contains, clamp and projector hooks");
  }
}

const BoundaryCurve& Domain::boundary() const {
  if (!boundary_) throw Error(Errc::InvalidArgument, "domain '" + name_ + "' has no boundary curve");
  return *boundary_;
}

SideClassification Domain::classify_side(const Point& x, double tube_fraction) const {
  if (stopset_.degenerate()) {
    throw Error(Errc::InvalidArgument, "side classification needs stop-set arcs");
  }
  const auto& arcs = stopset_.arcs();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  double second_d = std::numeric_limits<double>::infinity();
  ArcProjection best_p;
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    const ArcProjection p = stopset_.project_to_arc(k, x);
    if (p.dist < best_d) {
      second_d = best_d;
      best_d = p.dist;
      best = k;
      best_p = p;
    } else if (p.dist < second_d) {
      second_d = p.dist;
    }
  }
  if (best_d <= 0.0) throw Error(Errc::InvalidArgument, "point lies on the stop set");
  const double arc_len = arcs[best].length();
  const double end_tol = 1e-9;
  if (best_p.t <= end_tol || best_p.t >= 1.0 - end_tol ||
      second_d - best_d <= 1e-9 * std::max(1.0, best_d)) {
    throw Error(Errc::AmbiguousProjection, "nearest stop-set point is a node or not unique");
  }
  const double tube = tube_fraction * arc_len;
  if (best_d > tube * (1.0 + 1e-9)) {
    throw Error(Errc::OutsideTube, "point is beyond the side-classification tube");
  }
  const Vec2 n = arcs[best].normal(best_p.t);
  const double along = n.dot(x - best_p.point);
  return {best, along >= 0 ? Side::Plus : Side::Minus, best_d};
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

const ValidationEntry* ValidationReport::find(const std::string& check) const {
  for (const auto& e : entries) {
    if (e.check == check) return &e;
  }
  return nullptr;
}

ValidationReport validate_domain(const Domain& d, std::size_t n_samples) {
  if (n_samples < 16) throw Error(Errc::InvalidArgument, "validate_domain needs >= 16 samples");
  ValidationReport report;
  const BoundaryCurve& curve = d.boundary();
  std::vector<Point> pts;
  double min_tangent = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double s = curve.period_begin() +
                     curve.period() * static_cast<double>(i) / static_cast<double>(n_samples);
    pts.push_back(curve.position(s));
    min_tangent = std::min(min_tangent, curve.tangent(s).norm());
  }
  {
    std::ostringstream os;
    os << "min |tangent| = " << min_tangent;
    report.entries.push_back({"boundary regularity", min_tangent > 1e-12, os.str()});
  }
  {
    bool simple = true;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n && simple; ++i) {
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;  // adjacent through the seam
        if (segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n])) {
          simple = false;
          break;
        }
      }
    }
    report.entries.push_back(
        {"boundary simplicity", simple, simple ? "no crossings at sample scale" : "crossing found"});
  }
  {
    const bool inside_box = std::all_of(pts.begin(), pts.end(),
                                        [&](const Point& p) { return d.bbox().contains(p, 1e-12); });
    report.entries.push_back({"boundary inside bbox", inside_box, ""});
  }
  {
    const bool tree = d.stopset().is_tree();
    report.entries.push_back({"stop set tree", tree,
                              "components = " + std::to_string(d.stopset().component_count())});
  }
  {
    double margin = std::numeric_limits<double>::infinity();
    bool all_inside = true;
    for (const Point& p : d.stopset().samples()) {
      if (!d.contains(p)) all_inside = false;
      margin = std::min(margin, d.project_to_boundary(p).dist);
    }
    const double scale = std::max(d.bbox().width(), d.bbox().height());
    std::ostringstream os;
    os << "min distance to boundary = " << margin;
    report.entries.push_back(
        {"stop set compactly contained", all_inside && margin > 1e-9 * scale, os.str()});
  }
  return report;
}

}  // namespace charflow
