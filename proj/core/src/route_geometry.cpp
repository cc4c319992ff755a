#include "frenetcp/route_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <fmt/format.h>

#include "frenetcp/errors.hpp"

namespace frenetcp {

namespace {

struct SegmentFoot {
  double dist2;
  double t;
  PlanarPoint foot;
};

SegmentFoot closest_on_segment(PlanarPoint a, PlanarPoint b, PlanarPoint p) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  const PlanarPoint foot{a.x + t * dx, a.y + t * dy};
  const double ex = p.x - foot.x;
  const double ey = p.y - foot.y;
  return {ex * ex + ey * ey, t, foot};
}

bool finite(PlanarPoint p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

ReferenceRoute::ReferenceRoute(std::vector<PlanarPoint> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 2) {
    throw DegenerateRoute(
        fmt::format("route needs at least 2 vertices, got {}", vertices_.size()));
  }
  cum_arclength_.reserve(vertices_.size());
  cum_arclength_.push_back(0.0);
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!finite(vertices_[i])) {
      throw DegenerateRoute(fmt::format("route vertex {} is not finite", i));
    }
    if (i == 0) continue;
    const double len = std::hypot(vertices_[i].x - vertices_[i - 1].x,
                                  vertices_[i].y - vertices_[i - 1].y);
    if (!(len > kMinSegmentLength)) {
      throw DegenerateRoute(
          fmt::format("route vertices {} and {} coincide (segment length {})", i - 1, i, len));
    }
    cum_arclength_.push_back(cum_arclength_.back() + len);
  }
}

std::size_t ReferenceRoute::segment_at(double s) const {
  const auto it = std::upper_bound(cum_arclength_.begin(), cum_arclength_.end(), s);
  const auto idx = static_cast<std::size_t>(std::distance(cum_arclength_.begin(), it));
  if (idx == 0) return 0;
  return std::min(idx - 1, segment_count() - 1);
}

Projection project_detailed(const ReferenceRoute& route, PlanarPoint p) {
  if (!finite(p)) {
    throw GeometryError("cannot project a non-finite point");
  }
  const auto verts = route.vertices();
  const auto cum = route.cum_arclength();

  std::size_t best = 0;
  SegmentFoot best_foot{std::numeric_limits<double>::infinity(), 0.0, {}};
  for (std::size_t i = 0; i + 1 < verts.size(); ++i) {
    const SegmentFoot f = closest_on_segment(verts[i], verts[i + 1], p);
    // Strictly smaller with a relative tolerance: exact ties keep the earlier
    // (smaller s) segment.
    if (i == 0 || f.dist2 < best_foot.dist2 - 1e-12 * std::max(1.0, best_foot.dist2)) {
      best = i;
      best_foot = f;
    }
  }

  const PlanarPoint a = verts[best];
  const PlanarPoint b = verts[best + 1];
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double seg_len = cum[best + 1] - cum[best];

  Projection out;
  out.segment = best;
  out.segment_param = best_foot.t;
  out.point.s = cum[best] + best_foot.t * seg_len;

  const bool interior = best_foot.t > 0.0 && best_foot.t < 1.0;
  if (interior) {
    out.point.d = (dx * (p.y - a.y) - dy * (p.x - a.x)) / seg_len;
    out.quality = ProjectionQuality::Interior;
  } else {
    const double ex = p.x - best_foot.foot.x;
    const double ey = p.y - best_foot.foot.y;
    const double cross = dx * ey - dy * ex;
    const double dist = std::sqrt(best_foot.dist2);
    out.point.d = cross < 0.0 ? -dist : dist;
    out.quality = dist > 0.0 ? ProjectionQuality::Clamped : ProjectionQuality::Interior;
  }
  out.point.s = std::clamp(out.point.s, 0.0, route.length());

  // A different segment with an equally near but distinct foot makes the
  // projection ambiguous (e.g. on the bisector inside a corner).
  const double tol = 1e-9 * std::max(1.0, best_foot.dist2);
  for (std::size_t i = 0; i + 1 < verts.size(); ++i) {
    if (i == best) continue;
    const SegmentFoot f = closest_on_segment(verts[i], verts[i + 1], p);
    if (std::abs(f.dist2 - best_foot.dist2) <= tol) {
      const double sep = std::hypot(f.foot.x - best_foot.foot.x, f.foot.y - best_foot.foot.y);
      if (sep > 1e-9) {
        out.quality = ProjectionQuality::Ambiguous;
        break;
      }
    }
  }
  return out;
}

FrenetPoint project(const ReferenceRoute& route, PlanarPoint p) {
  return project_detailed(route, p).point;
}

PlanarPoint unproject(const ReferenceRoute& route, FrenetPoint f) {
  if (!std::isfinite(f.s) || !std::isfinite(f.d)) {
    throw OutOfRange("cannot unproject a non-finite Frenet point");
  }
  if (f.s < 0.0 || f.s > route.length()) {
    throw OutOfRange(
        fmt::format("s = {} outside route arc-length range [0, {}]", f.s, route.length()));
  }
  const std::size_t i = route.segment_at(f.s);
  const auto verts = route.vertices();
  const auto cum = route.cum_arclength();
  const PlanarPoint a = verts[i];
  const PlanarPoint b = verts[i + 1];
  const double seg_len = cum[i + 1] - cum[i];
  const double ux = (b.x - a.x) / seg_len;
  const double uy = (b.y - a.y) / seg_len;
  const double along = f.s - cum[i];
  return {a.x + along * ux - f.d * uy, a.y + along * uy + f.d * ux};
}

std::vector<FrenetPoint> project_trajectory(const ReferenceRoute& route,
                                            std::span<const PlanarPoint> trajectory) {
  std::vector<FrenetPoint> out;
  out.reserve(trajectory.size());
  for (const PlanarPoint& p : trajectory) out.push_back(project(route, p));
  return out;
}

}  // namespace frenetcp
