#ifndef LDP_GEOMETRY_HPP
#define LDP_GEOMETRY_HPP

#include <cstdint>
#include <vector>

namespace ldp {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

/// Minimum distance from p to the edges of a closed polygon.
double polygon_distance(const std::vector<Vec2>& poly, Vec2 p);

/// Even-odd ray cast (half-open edge rule); no guarantee for points on the
/// boundary itself.
bool point_in_polygon(const std::vector<Vec2>& poly, Vec2 p);

double polygon_signed_area(const std::vector<Vec2>& poly);

/// Number of proper intersections between segment [a,b] and polygon edges,
/// recording the segment parameters of the hits.
std::vector<double> segment_polygon_intersections(const std::vector<Vec2>& poly,
                                                  Vec2 a, Vec2 b);

/// Closed-set membership accelerated by a uniform cell classification:
/// cells wholly inside or outside answer in O(1); cells near the boundary
/// fall back to an exact distance test plus ray cast.
class MembershipGrid {
 public:
  MembershipGrid() = default;
  MembershipGrid(std::vector<Vec2> polygon, int cells = 512,
                 double boundary_tol = 1e-12);

  /// Boundary points (within boundary_tol) count as inside.
  bool contains(Vec2 p) const;

  double boundary_distance(Vec2 p) const { return polygon_distance(poly_, p); }
  const std::vector<Vec2>& polygon() const { return poly_; }

 private:
  enum class Cell : std::uint8_t { outside = 0, inside = 1, mixed = 2 };

  bool exact_contains(Vec2 p, int iy) const;

  std::vector<Vec2> poly_;
  std::vector<Cell> cells_;
  // Per grid row: indices of edges whose y-span overlaps the row; the ray
  // cast for a query only straddles edges from its own row.
  std::vector<std::vector<std::uint32_t>> rows_;
  int n_ = 0;
  double x0_ = 0, y0_ = 0, hx_ = 1, hy_ = 1;
  double tol_ = 1e-12;
};

}  // namespace ldp

#endif
