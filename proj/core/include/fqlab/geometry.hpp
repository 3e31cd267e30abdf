#pragma once

// Points of F_q^2 and F_q^3, the paraboloid z = x^2 + y^2, quadrance,
// rectangles, circles and squares.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fqlab/field.hpp"

namespace fqlab {

struct Point2 {
  Elem x, y;
  friend constexpr auto operator<=>(const Point2&, const Point2&) = default;
};

struct Point3 {
  Elem x, y, z;
  friend constexpr auto operator<=>(const Point3&, const Point3&) = default;
};

// Canonical index of a plane point, x * q + y.
inline std::uint32_t plane_index(const Field& f, Point2 u) { return u.x.value * f.q() + u.y.value; }
inline Point2 plane_point(const Field& f, std::uint32_t index) {
  return {Elem{index / f.q()}, Elem{index % f.q()}};
}

Point2 add(const Field& f, Point2 u, Point2 v);
Point2 sub(const Field& f, Point2 u, Point2 v);
Point2 scale(const Field& f, Elem s, Point2 u);
Elem dot(const Field& f, Point2 u, Point2 v);
// (-u_y, u_x).
Point2 perp(const Field& f, Point2 u);
Point3 add(const Field& f, Point3 u, Point3 v);

Point3 lift(const Field& f, Point2 u);
inline Point2 project(Point3 w) { return {w.x, w.y}; }
bool on_paraboloid(const Field& f, Point3 w);

// (u - v) . (u - v): the finite-field stand-in for squared length.
Elem quadrance(const Field& f, Point2 u, Point2 v);

class GridSet {
 public:
  explicit GridSet(Field field);
  static GridSet full(const Field& field);
  static GridSet from_points(const Field& field, const std::vector<Point2>& points);

  const Field& field() const { return field_; }
  std::size_t size() const { return size_; }
  bool contains(Point2 u) const { return member_[plane_index(field_, u)] != 0; }
  bool contains_index(std::uint32_t index) const { return member_[index] != 0; }
  void insert(Point2 u);
  void erase(Point2 u);
  // Points in canonical order.
  std::vector<Point2> points() const;
  const std::vector<std::uint8_t>& membership() const { return member_; }

  friend bool operator==(const GridSet& a, const GridSet& b) {
    return a.field_ == b.field_ && a.member_ == b.member_;
  }

 private:
  Field field_;
  std::vector<std::uint8_t> member_;
  std::size_t size_ = 0;
};

class ParaboloidSet {
 public:
  explicit ParaboloidSet(Field field);
  // Throws kInvalidParameters if a point is off the paraboloid; duplicates are dropped.
  static ParaboloidSet from_points(const Field& field, std::vector<Point3> points);
  static ParaboloidSet lift_of(const GridSet& plane);
  static ParaboloidSet whole(const Field& field);

  const Field& field() const { return field_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  // Sorted canonical order.
  const std::vector<Point3>& points() const { return points_; }
  bool contains(Point3 w) const;
  GridSet projection() const;

  friend bool operator==(const ParaboloidSet& a, const ParaboloidSet& b) {
    return a.field_ == b.field_ && a.points_ == b.points_;
  }

 private:
  Field field_;
  std::vector<Point3> points_;
};

struct RectangleQuad {
  // Cyclic order: v[0], v[2] and v[1], v[3] are the opposite pairs.
  std::array<Point2, 4> vertices;
  // (Q(v0 - v1), Q(v1 - v2)).
  Elem lambda, beta;
  bool degenerate = false;
};

// (x, z, y, t) is a rectangle when x + y = z + t and (x - z) . (y - z) = 0.
std::optional<RectangleQuad> classify_rectangle(const Field& f, Point2 x, Point2 z, Point2 y, Point2 t);

// Exhaustive scan of {u : Q(u, center) = r}, canonical order.
std::vector<Point2> circle_points(const Field& f, Point2 center, Elem r);

using Square = std::array<Point2, 4>;  // sorted vertex list

// All squares {u, u+d, u+d+d', u+d'} with Q(d) = lambda, d' = perp(d), deduplicated
// and sorted. Throws kZeroSide for lambda = 0.
std::vector<Square> enumerate_squares(const Field& f, Elem lambda);
// Centroid of the four vertices (the common midpoint of both diagonals).
Point2 square_center(const Field& f, const Square& square);

// Point set files: header "# field p k [c0,c1,...]", then one point per line as
// comma-separated canonical element indices (2 columns for plane points,
// 3 for paraboloid points).
void write_point_file(std::ostream& out, const Field& f, const std::vector<Point2>& points);
void write_point_file(std::ostream& out, const Field& f, const std::vector<Point3>& points);

struct PointFile {
  std::uint32_t p = 0, k = 0;
  std::vector<std::uint32_t> modulus;
  std::size_t columns = 0;
  std::vector<std::vector<std::uint32_t>> rows;
};
PointFile read_point_file(std::istream& in);
// Throws kFieldMismatch if the header does not describe `f`.
GridSet grid_set_from_file(const Field& f, const PointFile& file);
ParaboloidSet paraboloid_set_from_file(const Field& f, const PointFile& file);

}  // namespace fqlab
