#include "ls/metrics/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ls::metrics {

namespace {

constexpr double kClipEps = 1e-12;
constexpr double kMergeEps = 1e-12;

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

// Intersection of segment p->q with the infinite line through a->b.
Point intersect(Point p, Point q, Point a, Point b) {
  const double dp = cross(a, b, p);
  const double dq = cross(a, b, q);
  const double t = dp / (dp - dq);
  return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
}

void push_merged(std::vector<Point>& out, Point p) {
  if (!out.empty() && std::abs(out.back().x - p.x) <= kMergeEps &&
      std::abs(out.back().y - p.y) <= kMergeEps) {
    return;
  }
  out.push_back(p);
}

}  // namespace

RotatedBox RotatedBox::from_angle(double cx, double cy, double w, double h, double radians) {
  return {cx, cy, w, h, std::cos(radians), std::sin(radians)};
}

RotatedBox RotatedBox::from_params(std::array<double, 6> p) {
  return {p[0], p[1], p[2], p[3], p[4], p[5]};
}

double RotatedBox::angle() const { return std::atan2(sin_t, cos_t); }

ConvexPolygon box_to_polygon(const RotatedBox& box, ImageSize image) {
  const double norm = std::hypot(box.cos_t, box.sin_t);
  if (!(std::abs(norm - 1.0) <= 1e-6)) {
    throw std::invalid_argument("box_to_polygon: (cos, sin) pair has norm " + std::to_string(norm));
  }
  const double cx = box.cx * image.width, cy = box.cy * image.height;
  const double hw = 0.5 * box.w * image.width, hh = 0.5 * box.h * image.height;
  const double c = box.cos_t, s = box.sin_t;
  const std::array<Point, 4> local = {{{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}}};
  ConvexPolygon poly;
  poly.vertices.reserve(4);
  for (const Point& p : local) {
    poly.vertices.push_back({cx + c * p.x - s * p.y, cy + s * p.x + c * p.y});
  }
  return poly;
}

ConvexPolygon clip(const ConvexPolygon& subject, const ConvexPolygon& clipper) {
  if (subject.empty() || clipper.empty()) return {};
  std::vector<Point> out = subject.vertices;
  const std::size_t m = clipper.vertices.size();
  for (std::size_t e = 0; e < m && !out.empty(); ++e) {
    const Point a = clipper.vertices[e];
    const Point b = clipper.vertices[(e + 1) % m];
    std::vector<Point> in;
    in.swap(out);
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point p = in[(i + n - 1) % n];
      const Point q = in[i];
      const bool p_in = cross(a, b, p) >= -kClipEps;
      const bool q_in = cross(a, b, q) >= -kClipEps;
      if (q_in) {
        if (!p_in) push_merged(out, intersect(p, q, a, b));
        push_merged(out, q);
      } else if (p_in) {
        push_merged(out, intersect(p, q, a, b));
      }
    }
    while (out.size() > 1 && std::abs(out.front().x - out.back().x) <= kMergeEps &&
           std::abs(out.front().y - out.back().y) <= kMergeEps) {
      out.pop_back();
    }
  }
  ConvexPolygon result;
  if (out.size() >= 3) result.vertices = std::move(out);
  if (area(result) <= 0.0) result.vertices.clear();
  return result;
}

double area(const ConvexPolygon& polygon) {
  if (polygon.empty()) return 0.0;
  const auto& v = polygon.vertices;
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& p = v[i];
    const Point& q = v[(i + 1) % v.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return std::max(0.0, 0.5 * twice);
}

IouResult rotated_iou_checked(const RotatedBox& a, const RotatedBox& b, ImageSize image) {
  const double area_a = a.w * a.h * image.width * image.height;
  const double area_b = b.w * b.h * image.width * image.height;
  if (!(area_a > 0.0) || !(area_b > 0.0)) return {0.0, true};
  const ConvexPolygon pa = box_to_polygon(a, image);
  const ConvexPolygon pb = box_to_polygon(b, image);
  const double inter = area(clip(pa, pb));
  const double uni = area(pa) + area(pb) - inter;
  if (!(uni > 0.0)) return {0.0, true};
  return {std::clamp(inter / uni, 0.0, 1.0), false};
}

double rotated_iou(const RotatedBox& a, const RotatedBox& b, ImageSize image) {
  return rotated_iou_checked(a, b, image).value;
}

bool point_in_polygon(const ConvexPolygon& polygon, Point p) {
  if (polygon.empty()) return false;
  const auto& v = polygon.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (cross(v[i], v[(i + 1) % v.size()], p) < 0.0) return false;
  }
  return true;
}

double mc_iou(const RotatedBox& a, const RotatedBox& b, std::uint64_t samples, std::uint64_t seed,
              ImageSize image) {
  if (samples == 0) throw std::invalid_argument("mc_iou: need at least one sample");
  if (!(a.w * a.h > 0.0) || !(b.w * b.h > 0.0)) return 0.0;
  const ConvexPolygon pa = box_to_polygon(a, image);
  const ConvexPolygon pb = box_to_polygon(b, image);
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (const auto* poly : {&pa, &pb}) {
    for (const Point& p : poly->vertices) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
  std::uint64_t both = 0, either = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const Point p{ux(rng), uy(rng)};
    const bool in_a = point_in_polygon(pa, p);
    const bool in_b = point_in_polygon(pb, p);
    both += in_a && in_b;
    either += in_a || in_b;
  }
  return either == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace ls::metrics
