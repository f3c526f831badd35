#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace ls::metrics {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct ImageSize {
  double width = 1.0;
  double height = 1.0;
};

/// Rotated rectangle: center and extents normalized by image size, rotation
/// stored as a (cos, sin) pair.
struct RotatedBox {
  double cx = 0.0, cy = 0.0;
  double w = 0.0, h = 0.0;
  double cos_t = 1.0, sin_t = 0.0;

  static RotatedBox from_angle(double cx, double cy, double w, double h, double radians);
  static RotatedBox from_params(std::array<double, 6> p);
  std::array<double, 6> params() const { return {cx, cy, w, h, cos_t, sin_t}; }
  double angle() const;

  friend bool operator==(const RotatedBox&, const RotatedBox&) = default;
};

/// Counter-clockwise convex polygon; empty when it has no area.
struct ConvexPolygon {
  std::vector<Point> vertices;
  bool empty() const { return vertices.size() < 3; }
};

/// Corners of the box, counter-clockwise, in image coordinates. Throws
/// std::invalid_argument if |(cos, sin)| deviates from 1 by more than 1e-6.
ConvexPolygon box_to_polygon(const RotatedBox& box, ImageSize image = {});

/// Sutherland-Hodgman intersection of two convex CCW polygons.
ConvexPolygon clip(const ConvexPolygon& subject, const ConvexPolygon& clipper);

/// Shoelace area; 0 for an empty polygon.
double area(const ConvexPolygon& polygon);

struct IouResult {
  double value = 0.0;
  /// Set when either box has zero area; value is then 0.
  bool degenerate = false;
};

IouResult rotated_iou_checked(const RotatedBox& a, const RotatedBox& b, ImageSize image = {});
double rotated_iou(const RotatedBox& a, const RotatedBox& b, ImageSize image = {});

/// Monte-Carlo IoU from uniform samples over the union's bounding box.
double mc_iou(const RotatedBox& a, const RotatedBox& b, std::uint64_t samples, std::uint64_t seed,
              ImageSize image = {});

bool point_in_polygon(const ConvexPolygon& polygon, Point p);

}  // namespace ls::metrics
