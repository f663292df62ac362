#pragma once

#include "charflow/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace charflow {

enum class Orientation { Clockwise, CounterClockwise };

struct BoundaryProjection {
  double s = 0.0;     ///< boundary parameter of the nearest point
  double dist = 0.0;  ///< distance from the query point
};

/// Periodic regular parametrization of the outer boundary over [a, b).
///
/// Stored as an analytic closure plus a dense sample polyline. Projection
/// brackets the nearest sample and refines by golden-section search on the
/// closure, unless an exact projector is supplied.
class BoundaryCurve {
 public:
  using PointFn = std::function<Point(double)>;
  using Projector = std::function<BoundaryProjection(const Point&)>;

  BoundaryCurve(double a, double b, PointFn position, PointFn tangent, Orientation orientation,
                std::size_t n_samples = 1024, Projector exact_projector = {});

  /// Closed polyline through `vertices`, parametrized by arc length.
  static BoundaryCurve polyline(std::vector<Point> vertices);

  double period_begin() const { return a_; }
  double period_end() const { return b_; }
  double period() const { return b_ - a_; }
  double wrap(double s) const;

  Point position(double s) const { return position_(wrap(s)); }
  Vec2 tangent(double s) const { return tangent_(wrap(s)); }
  Orientation orientation() const { return orientation_; }

  const std::vector<Point>& samples() const { return samples_; }
  const std::vector<double>& sample_params() const { return params_; }

  BoundaryProjection project(const Point& x) const;

  double length() const;
  /// Enclosed area from the sample polygon (shoelace), always positive.
  double enclosed_area() const;
  /// Winding-number point-in-polygon test on the samples.
  bool polygon_contains(const Point& x) const;

 private:
  double a_, b_;
  PointFn position_, tangent_;
  Orientation orientation_;
  std::vector<Point> samples_;
  std::vector<double> params_;
  Projector exact_;
};

/// One C1 arc of the stop set, parametrized over t in [0, 1].
struct StopArc {
  std::function<Point(double)> position;
  std::function<Vec2(double)> tangent;
  bool flip_normal = false;  ///< n = +perp(tangent) unless flipped

  static StopArc segment(const Point& from, const Point& to);

  Vec2 normal(double t) const;
  double length(std::size_t n = 256) const;
};

enum class NodeKind { Terminal, Branching, Kink };

struct StopNode {
  Point point;
  NodeKind kind;
};

struct ArcProjection {
  double t = 0.0;
  Point point;
  double dist = 0.0;
};

/// Stop set: an isolated point or a tree of C1 arcs.
class StopSet {
 public:
  static StopSet isolated_point(const Point& p);
  static StopSet from_arcs(std::vector<StopArc> arcs);

  bool degenerate() const { return degenerate_; }
  const std::vector<StopArc>& arcs() const { return arcs_; }
  const std::vector<StopNode>& nodes() const { return nodes_; }

  /// One-dimensional Hausdorff measure; zero for the isolated point.
  double length() const;
  std::size_t component_count() const;
  bool is_tree() const;

  ArcProjection project_to_arc(std::size_t k, const Point& x) const;
  /// Nearest point of the whole set.
  Point nearest(const Point& x) const;
  double distance(const Point& x) const { return (x - nearest(x)).norm(); }
  /// Dense samples of the set, used by containment checks.
  std::vector<Point> samples(std::size_t per_arc = 64) const;

 private:
  bool degenerate_ = false;
  Point point_ = Point::Zero();
  std::vector<StopArc> arcs_;
  std::vector<StopNode> nodes_;
  std::vector<std::size_t> arc_from_, arc_to_;  // node indices of arc ends
};

struct BBox {
  Point lo = Point::Zero();
  Point hi = Point::Zero();

  bool contains(const Point& x, double margin = 0.0) const {
    return x.x() >= lo.x() - margin && x.x() <= hi.x() + margin && x.y() >= lo.y() - margin &&
           x.y() <= hi.y() + margin;
  }
  double width() const { return hi.x() - lo.x(); }
  double height() const { return hi.y() - lo.y(); }
};

enum class Side { Plus, Minus };

struct SideClassification {
  std::size_t arc = 0;
  Side side = Side::Plus;
  double dist = 0.0;
};

/// Omega with its boundary curve and stop set. Immutable once built.
class Domain {
 public:
  using Predicate = std::function<bool(const Point&)>;
  using Clamp = std::function<Point(const Point&)>;
  using Projector = std::function<BoundaryProjection(const Point&)>;

  Domain(std::string name, BoundaryCurve boundary, StopSet stopset, BBox bbox,
         Predicate contains = {});

  /// Domain without an analytic boundary curve (raster domains). All three
  /// hooks are required.
  Domain(std::string name, StopSet stopset, BBox bbox, Predicate contains, Clamp clamp,
         Projector projector, double area);

  const std::string& name() const { return name_; }
  bool has_boundary_curve() const { return boundary_.has_value(); }
  const BoundaryCurve& boundary() const;
  const StopSet& stopset() const { return stopset_; }
  const BBox& bbox() const { return bbox_; }
  double area() const { return area_; }

  bool contains(const Point& x) const { return contains_(x); }
  /// Nearest point of cl(Omega); identity for points inside.
  Point clamp_inside(const Point& x) const { return clamp_(x); }

  BoundaryProjection project_to_boundary(const Point& x) const { return projector_(x); }

  /// One-sided classification against the stop-set arcs. Refuses points
  /// beyond `tube_fraction` times the arc length, and points whose nearest
  /// projection is a node or is not unique.
  SideClassification classify_side(const Point& x, double tube_fraction = 0.1) const;

 private:
  std::string name_;
  std::optional<BoundaryCurve> boundary_;
  StopSet stopset_;
  BBox bbox_;
  Predicate contains_;
  Clamp clamp_;
  Projector projector_;
  double area_ = 0.0;
};

struct ValidationEntry {
  std::string check;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  bool all_pass() const;
  const ValidationEntry* find(const std::string& check) const;
};

/// Sample-based checks: boundary regularity, simplicity, stop-set tree
/// structure and compact containment of the stop set.
ValidationReport validate_domain(const Domain& d, std::size_t n_samples);

}  // namespace charflow
