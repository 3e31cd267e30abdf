#include "fqlab/geometry.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "fqlab/error.hpp"

namespace fqlab {

Point2 add(const Field& f, Point2 u, Point2 v) { return {f.add(u.x, v.x), f.add(u.y, v.y)}; }
Point2 sub(const Field& f, Point2 u, Point2 v) { return {f.sub(u.x, v.x), f.sub(u.y, v.y)}; }
Point2 scale(const Field& f, Elem s, Point2 u) { return {f.mul(s, u.x), f.mul(s, u.y)}; }
Elem dot(const Field& f, Point2 u, Point2 v) { return f.add(f.mul(u.x, v.x), f.mul(u.y, v.y)); }
Point2 perp(const Field& f, Point2 u) { return {f.neg(u.y), u.x}; }
Point3 add(const Field& f, Point3 u, Point3 v) {
  return {f.add(u.x, v.x), f.add(u.y, v.y), f.add(u.z, v.z)};
}

Point3 lift(const Field& f, Point2 u) { return {u.x, u.y, dot(f, u, u)}; }

bool on_paraboloid(const Field& f, Point3 w) { return w.z == f.add(f.square(w.x), f.square(w.y)); }

Elem quadrance(const Field& f, Point2 u, Point2 v) {
  const Point2 d = sub(f, u, v);
  return dot(f, d, d);
}

GridSet::GridSet(Field field)
    : field_(std::move(field)), member_(static_cast<std::size_t>(field_.q()) * field_.q(), 0) {}

GridSet GridSet::full(const Field& field) {
  GridSet s(field);
  std::fill(s.member_.begin(), s.member_.end(), 1);
  s.size_ = s.member_.size();
  return s;
}

GridSet GridSet::from_points(const Field& field, const std::vector<Point2>& points) {
  GridSet s(field);
  for (Point2 u : points) s.insert(u);
  return s;
}

void GridSet::insert(Point2 u) {
  auto& m = member_[plane_index(field_, u)];
  if (!m) {
    m = 1;
    ++size_;
  }
}

void GridSet::erase(Point2 u) {
  auto& m = member_[plane_index(field_, u)];
  if (m) {
    m = 0;
    --size_;
  }
}

std::vector<Point2> GridSet::points() const {
  std::vector<Point2> out;
  out.reserve(size_);
  for (std::uint32_t i = 0; i < member_.size(); ++i) {
    if (member_[i]) out.push_back(plane_point(field_, i));
  }
  return out;
}

ParaboloidSet::ParaboloidSet(Field field) : field_(std::move(field)) {}

ParaboloidSet ParaboloidSet::from_points(const Field& field, std::vector<Point3> points) {
  for (const Point3& w : points) {
    if (w.x.value >= field.q() || w.y.value >= field.q() || w.z.value >= field.q() ||
        !on_paraboloid(field, w)) {
      throw Error(ErrorCode::kInvalidParameters, "point is not on the paraboloid");
    }
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  ParaboloidSet x(field);
  x.points_ = std::move(points);
  return x;
}

ParaboloidSet ParaboloidSet::lift_of(const GridSet& plane) {
  ParaboloidSet x(plane.field());
  for (Point2 u : plane.points()) x.points_.push_back(lift(plane.field(), u));
  std::sort(x.points_.begin(), x.points_.end());
  return x;
}

ParaboloidSet ParaboloidSet::whole(const Field& field) { return lift_of(GridSet::full(field)); }

bool ParaboloidSet::contains(Point3 w) const {
  return std::binary_search(points_.begin(), points_.end(), w);
}

GridSet ParaboloidSet::projection() const {
  GridSet s(field_);
  for (const Point3& w : points_) s.insert(project(w));
  return s;
}

std::optional<RectangleQuad> classify_rectangle(const Field& f, Point2 x, Point2 z, Point2 y, Point2 t) {
  if (add(f, x, y) != add(f, z, t)) return std::nullopt;
  if (dot(f, sub(f, x, z), sub(f, y, z)) != f.zero()) return std::nullopt;
  RectangleQuad r;
  r.vertices = {x, z, y, t};
  r.lambda = quadrance(f, x, z);
  r.beta = quadrance(f, z, y);
  r.degenerate = r.lambda == f.zero() || r.beta == f.zero();
  return r;
}

std::vector<Point2> circle_points(const Field& f, Point2 center, Elem r) {
  std::vector<Point2> out;
  const std::uint32_t n = f.q() * f.q();
  for (std::uint32_t i = 0; i < n; ++i) {
    const Point2 u = plane_point(f, i);
    if (quadrance(f, u, center) == r) out.push_back(u);
  }
  return out;
}

std::vector<Square> enumerate_squares(const Field& f, Elem lambda) {
  if (lambda == f.zero()) throw Error(ErrorCode::kZeroSide, "square side quadrance must be non-zero");
  const std::vector<Point2> directions = circle_points(f, Point2{f.zero(), f.zero()}, lambda);
  std::vector<Square> squares;
  const std::uint32_t n = f.q() * f.q();
  squares.reserve(static_cast<std::size_t>(n) * directions.size());
  for (std::uint32_t i = 0; i < n; ++i) {
    const Point2 u = plane_point(f, i);
    for (Point2 d : directions) {
      const Point2 e = perp(f, d);
      Square s = {u, add(f, u, d), add(f, add(f, u, d), e), add(f, u, e)};
      std::sort(s.begin(), s.end());
      squares.push_back(s);
    }
  }
  std::sort(squares.begin(), squares.end());
  squares.erase(std::unique(squares.begin(), squares.end()), squares.end());
  return squares;
}

Point2 square_center(const Field& f, const Square& square) {
  Point2 sum{f.zero(), f.zero()};
  for (Point2 v : square) sum = add(f, sum, v);
  return scale(f, f.inv(f.from_int(4)), sum);
}

namespace {

void write_header(std::ostream& out, const Field& f) { out << "# field " << f.describe() << '\n'; }

std::vector<std::uint32_t> parse_csv_uints(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    const unsigned long v = std::stoul(item, &pos);
    if (pos != item.size()) throw Error(ErrorCode::kIo, "malformed integer '" + item + "'");
    out.push_back(static_cast<std::uint32_t>(v));
  }
  return out;
}

void check_field(const Field& f, const PointFile& file) {
  if (file.p != f.p() || file.k != f.k() || file.modulus != f.modulus()) {
    throw Error(ErrorCode::kFieldMismatch, "point file field does not match " + f.describe());
  }
}

}  // namespace

void write_point_file(std::ostream& out, const Field& f, const std::vector<Point2>& points) {
  write_header(out, f);
  for (Point2 u : points) out << u.x.value << ',' << u.y.value << '\n';
}

void write_point_file(std::ostream& out, const Field& f, const std::vector<Point3>& points) {
  write_header(out, f);
  for (const Point3& w : points) out << w.x.value << ',' << w.y.value << ',' << w.z.value << '\n';
}

PointFile read_point_file(std::istream& in) {
  PointFile file;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tag;
      hs >> tag;
      if (tag != "field") continue;
      if (!(hs >> file.p >> file.k)) throw Error(ErrorCode::kIo, "malformed field header");
      std::string mod;
      if (hs >> mod) file.modulus = parse_csv_uints(mod);
      have_header = true;
      continue;
    }
    try {
      auto row = parse_csv_uints(line);
      if (file.columns == 0) file.columns = row.size();
      if (row.size() != file.columns || (file.columns != 2 && file.columns != 3)) {
        throw Error(ErrorCode::kIo, "inconsistent column count in line '" + line + "'");
      }
      file.rows.push_back(std::move(row));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kIo, "malformed point line '" + line + "'");
    }
  }
  if (!have_header) throw Error(ErrorCode::kIo, "missing '# field' header");
  return file;
}

GridSet grid_set_from_file(const Field& f, const PointFile& file) {
  check_field(f, file);
  if (!file.rows.empty() && file.columns != 2) throw Error(ErrorCode::kIo, "expected 2 columns");
  GridSet s(f);
  for (const auto& row : file.rows) s.insert({f.element(row[0]), f.element(row[1])});
  return s;
}

ParaboloidSet paraboloid_set_from_file(const Field& f, const PointFile& file) {
  check_field(f, file);
  if (!file.rows.empty() && file.columns != 3) throw Error(ErrorCode::kIo, "expected 3 columns");
  std::vector<Point3> points;
  for (const auto& row : file.rows) points.push_back({f.element(row[0]), f.element(row[1]), f.element(row[2])});
  return ParaboloidSet::from_points(f, std::move(points));
}

}  // namespace fqlab
