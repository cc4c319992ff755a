#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace frenetcp {

struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

/// Route-relative coordinates: s is arc length along the route, d the signed
/// lateral offset (positive to the left of the direction of travel).
struct FrenetPoint {
  double s = 0.0;
  double d = 0.0;

  friend bool operator==(const FrenetPoint&, const FrenetPoint&) = default;
};

/// Arc-length parameterised polyline. Construction validates the vertex list
/// and throws DegenerateRoute on fewer than two vertices, non-finite
/// coordinates, or repeated consecutive vertices.
class ReferenceRoute {
 public:
  static constexpr double kMinSegmentLength = 1e-9;

  explicit ReferenceRoute(std::vector<PlanarPoint> vertices);

  std::span<const PlanarPoint> vertices() const noexcept { return vertices_; }
  std::span<const double> cum_arclength() const noexcept { return cum_arclength_; }
  std::size_t segment_count() const noexcept { return vertices_.size() - 1; }
  double length() const noexcept { return cum_arclength_.back(); }

  /// Index of the segment whose half-open arc-length interval [s_i, s_{i+1})
  /// contains s; the last segment also owns s == length().
  std::size_t segment_at(double s) const;

 private:
  std::vector<PlanarPoint> vertices_;
  std::vector<double> cum_arclength_;
};

enum class ProjectionQuality {
  /// The perpendicular foot lies strictly inside a single nearest segment.
  Interior,
  /// The foot was clamped to a vertex or a route end; d is the signed
  /// distance to that vertex.
  Clamped,
  /// Another segment is equally close; the smaller s was chosen.
  Ambiguous,
};

struct Projection {
  FrenetPoint point;
  std::size_t segment = 0;
  double segment_param = 0.0;  // position of the foot along the segment in [0, 1]
  ProjectionQuality quality = ProjectionQuality::Interior;
};

/// Nearest-point projection over all segments. Ties go to the smaller s.
Projection project_detailed(const ReferenceRoute& route, PlanarPoint p);

FrenetPoint project(const ReferenceRoute& route, PlanarPoint p);

/// Throws OutOfRange if f.s lies outside [0, route.length()].
PlanarPoint unproject(const ReferenceRoute& route, FrenetPoint f);

std::vector<FrenetPoint> project_trajectory(const ReferenceRoute& route,
                                            std::span<const PlanarPoint> trajectory);

}  // namespace frenetcp
