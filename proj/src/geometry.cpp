#include "ldp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldp {

double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = dot(ab, ab);
  if (len2 <= 0.0) return norm(p - a);
  double t = dot(p - a, ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  Vec2 proj = a + t * ab;
  return norm(p - proj);
}

double polygon_distance(const std::vector<Vec2>& poly, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    best = std::min(best, point_segment_distance(p, a, b));
  }
  return best;
}

bool point_in_polygon(const std::vector<Vec2>& poly, Vec2 p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xint) inside = !inside;
    }
  }
  return inside;
}

double polygon_signed_area(const std::vector<Vec2>& poly) {
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    area += cross(a, b);
  }
  return area / 2.0;
}

std::vector<double> segment_polygon_intersections(const std::vector<Vec2>& poly,
                                                  Vec2 a, Vec2 b) {
  std::vector<double> hits;
  Vec2 d = b - a;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    Vec2 e = q - p;
    double denom = cross(d, e);
    if (std::abs(denom) < 1e-18) continue;
    double t = cross(p - a, e) / denom;
    double s = cross(p - a, d) / denom;
    if (t >= 0.0 && t <= 1.0 && s >= 0.0 && s <= 1.0) hits.push_back(t);
  }
  std::sort(hits.begin(), hits.end());
  return hits;
}

MembershipGrid::MembershipGrid(std::vector<Vec2> polygon, int cells,
                               double boundary_tol)
    : poly_(std::move(polygon)), n_(cells), tol_(boundary_tol) {
  if (poly_.size() < 3)
    throw std::invalid_argument("MembershipGrid: polygon needs >= 3 vertices");
  double xmin = poly_[0].x, xmax = poly_[0].x;
  double ymin = poly_[0].y, ymax = poly_[0].y;
  for (const auto& v : poly_) {
    xmin = std::min(xmin, v.x);
    xmax = std::max(xmax, v.x);
    ymin = std::min(ymin, v.y);
    ymax = std::max(ymax, v.y);
  }
  double pad = 1e-9 + 1e-9 * std::max(xmax - xmin, ymax - ymin);
  x0_ = xmin - pad;
  y0_ = ymin - pad;
  hx_ = (xmax - xmin + 2 * pad) / n_;
  hy_ = (ymax - ymin + 2 * pad) / n_;

  rows_.assign(n_, {});
  for (std::size_t e = 0; e < poly_.size(); ++e) {
    const Vec2& a = poly_[e];
    const Vec2& b = poly_[(e + 1) % poly_.size()];
    double ylo = std::min(a.y, b.y) - tol_;
    double yhi = std::max(a.y, b.y) + tol_;
    int rlo = std::clamp(static_cast<int>(std::floor((ylo - y0_) / hy_)), 0,
                         n_ - 1);
    int rhi = std::clamp(static_cast<int>(std::floor((yhi - y0_) / hy_)), 0,
                         n_ - 1);
    for (int r = rlo; r <= rhi; ++r)
      rows_[r].push_back(static_cast<std::uint32_t>(e));
  }

  cells_.assign(static_cast<std::size_t>(n_) * n_, Cell::mixed);
  const double half_diag = 0.5 * std::hypot(hx_, hy_);
  for (int iy = 0; iy < n_; ++iy) {
    for (int ix = 0; ix < n_; ++ix) {
      Vec2 c{x0_ + (ix + 0.5) * hx_, y0_ + (iy + 0.5) * hy_};
      double d = polygon_distance(poly_, c);
      if (d > half_diag + tol_) {
        cells_[static_cast<std::size_t>(iy) * n_ + ix] =
            point_in_polygon(poly_, c) ? Cell::inside : Cell::outside;
      }
    }
  }
}

bool MembershipGrid::exact_contains(Vec2 p, int iy) const {
  // Same crossing rule as the full scan; edges outside this row cannot
  // straddle p.y, and only nearby edges can produce a tolerance hit.
  bool inside = false;
  bool near_boundary = false;
  for (std::uint32_t e : rows_[iy]) {
    const Vec2& a = poly_[e];
    const Vec2& b = poly_[(e + 1) % poly_.size()];
    if (!near_boundary && point_segment_distance(p, a, b) <= tol_)
      near_boundary = true;
    if ((a.y > p.y) != (b.y > p.y)) {
      double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xint) inside = !inside;
    }
  }
  return near_boundary || inside;
}

bool MembershipGrid::contains(Vec2 p) const {
  int ix = static_cast<int>(std::floor((p.x - x0_) / hx_));
  int iy = static_cast<int>(std::floor((p.y - y0_) / hy_));
  if (ix < 0 || iy < 0 || ix >= n_ || iy >= n_) {
    // Outside the padded bounding box (padding exceeds the boundary
    // tolerance), hence outside the closed region.
    return false;
  }
  Cell c = cells_[static_cast<std::size_t>(iy) * n_ + ix];
  if (c == Cell::inside) return true;
  if (c == Cell::outside) return false;
  return exact_contains(p, iy);
}

}  // namespace ldp
