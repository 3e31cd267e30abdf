#include "fqlab/energy.hpp"

#include <algorithm>

#include "fqlab/error.hpp"

namespace fqlab {
namespace {

// Dense sum tables are indexed by (x q + y) q + z.
constexpr std::uint32_t kMaxDenseOrder = 256;

void require_dense(const Field& f) {
  if (f.q() > kMaxDenseOrder) {
    throw Error(ErrorCode::kInvalidParameters, "energy counting supports q <= 256");
  }
}

struct SumCoder {
  const Field& f;
  std::uint32_t q;
  const std::uint32_t* add;

  explicit SumCoder(const Field& field) : f(field), q(field.q()), add(field.add_table()) {}

  std::uint32_t code(const Point3& a, const Point3& b) const {
    const std::uint32_t sx = add[a.x.value * q + b.x.value];
    const std::uint32_t sy = add[a.y.value * q + b.y.value];
    const std::uint32_t sz = add[a.z.value * q + b.z.value];
    return (sx * q + sy) * q + sz;
  }
  std::size_t size() const { return static_cast<std::size_t>(q) * q * q; }
  Point3 decode(std::uint32_t c) const { return {Elem{c / (q * q)}, Elem{(c / q) % q}, Elem{c % q}}; }
};

// r(s) over all ordered pairs, including (a, a).
std::vector<std::uint32_t> representation_counts(const ParaboloidSet& x, const SumCoder& coder) {
  std::vector<std::uint32_t> r(coder.size(), 0);
  const auto& pts = x.points();
  for (const Point3& a : pts) {
    for (const Point3& b : pts) ++r[coder.code(a, b)];
  }
  return r;
}

// Ordered pairs (a, b), a != b, bucketed by a + b.
struct PairBuckets {
  std::vector<std::uint32_t> offsets;  // size coder.size() + 1
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // indices into X
};

PairBuckets bucket_distinct_pairs(const ParaboloidSet& x, const SumCoder& coder) {
  const auto& pts = x.points();
  const std::size_t n = pts.size();
  PairBuckets out;
  out.offsets.assign(coder.size() + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) ++out.offsets[coder.code(pts[i], pts[j]) + 1];
    }
  }
  for (std::size_t c = 0; c < coder.size(); ++c) out.offsets[c + 1] += out.offsets[c];
  out.pairs.resize(n * (n > 0 ? n - 1 : 0));
  std::vector<std::uint32_t> cursor(out.offsets.begin(), out.offsets.end() - 1);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      if (i != j) out.pairs[cursor[coder.code(pts[i], pts[j])]++] = {i, j};
    }
  }
  return out;
}

template <typename Visit>
void for_each_nontrivial(const ParaboloidSet& x, Visit&& visit) {
  SumCoder coder(x.field());
  PairBuckets buckets = bucket_distinct_pairs(x, coder);
  for (std::size_t c = 0; c < coder.size(); ++c) {
    const std::uint32_t lo = buckets.offsets[c], hi = buckets.offsets[c + 1];
    if (hi - lo < 4) continue;
    for (std::uint32_t i = lo; i < hi; ++i) {
      const auto [a, b] = buckets.pairs[i];
      for (std::uint32_t j = lo; j < hi; ++j) {
        const auto [cc, d] = buckets.pairs[j];
        // Same sum and a != b, c != d; left to exclude c or d meeting {a, b}.
        if (cc == a || cc == b) continue;
        visit(a, b, cc, d);
      }
    }
  }
}

}  // namespace

EnergyReport energy_report(const ParaboloidSet& x, bool with_by_sum) {
  require_dense(x.field());
  SumCoder coder(x.field());
  std::vector<std::uint32_t> r = representation_counts(x, coder);

  EnergyReport report;
  for (std::uint32_t v : r) report.total += static_cast<std::uint64_t>(v) * v;

  // For a sum s the admissible first points form D'_s = {a : s - a in X, a != s - a}.
  // Given a in D'_s, c ranges over D'_s minus {a, s - a}, so s contributes
  // |D'_s| (|D'_s| - 2) ordered non-trivial tuples.
  std::vector<std::uint32_t> distinct = r;
  for (const Point3& a : x.points()) --distinct[coder.code(a, a)];
  for (std::uint32_t v : distinct) {
    if (v >= 2) report.nontrivial += static_cast<std::uint64_t>(v) * (v - 2);
  }

  if (with_by_sum) {
    std::map<Point3, std::uint64_t> by_sum;
    for (std::uint32_t c = 0; c < r.size(); ++c) {
      if (r[c]) by_sum.emplace(coder.decode(c), r[c]);
    }
    report.by_sum = std::move(by_sum);
  }
  return report;
}

std::uint64_t energy_count(const ParaboloidSet& x) { return energy_report(x).total; }
std::uint64_t energy_nontrivial(const ParaboloidSet& x) { return energy_report(x).nontrivial; }

std::uint64_t energy_count_bruteforce(const ParaboloidSet& x) {
  const Field& f = x.field();
  const auto& pts = x.points();
  std::uint64_t count = 0;
  for (const Point3& a : pts)
    for (const Point3& b : pts) {
      const Point3 s = add(f, a, b);
      for (const Point3& c : pts)
        for (const Point3& d : pts) count += add(f, c, d) == s;
    }
  return count;
}

std::uint64_t energy_nontrivial_bruteforce(const ParaboloidSet& x) {
  const Field& f = x.field();
  const auto& pts = x.points();
  std::uint64_t count = 0;
  for (const Point3& a : pts)
    for (const Point3& b : pts) {
      if (a == b) continue;
      const Point3 s = add(f, a, b);
      for (const Point3& c : pts) {
        if (c == a || c == b) continue;
        for (const Point3& d : pts) {
          if (d == a || d == b || d == c) continue;
          count += add(f, c, d) == s;
        }
      }
    }
  return count;
}

std::vector<EnergyTuple> nontrivial_energy_tuples(const ParaboloidSet& x) {
  require_dense(x.field());
  const auto& pts = x.points();
  std::vector<EnergyTuple> out;
  for_each_nontrivial(x, [&](std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
    out.push_back({pts[a], pts[b], pts[c], pts[d]});
  });
  std::sort(out.begin(), out.end());
  return out;
}

SideFilter SideFilter::pair(const Field& f, Elem lambda, Elem beta) {
  if (lambda == f.zero() || beta == f.zero()) {
    throw Error(ErrorCode::kZeroSide, "side filter quadrances must be non-zero");
  }
  SideFilter s;
  s.kind_ = Kind::kPair;
  s.lambda_ = lambda;
  s.beta_ = beta;
  return s;
}

SideFilter SideFilter::subgroup(const MultiplicativeSubgroup& a) {
  SideFilter s;
  s.kind_ = Kind::kSubgroup;
  s.member_.assign(a.field().q(), 0);
  for (Elem e : a.elements()) s.member_[e.value] = 1;
  return s;
}

bool SideFilter::accepts(Elem lambda, Elem beta) const {
  switch (kind_) {
    case Kind::kNone: return true;
    case Kind::kPair:
      return (lambda == lambda_ && beta == beta_) || (lambda == beta_ && beta == lambda_);
    case Kind::kSubgroup: return member_[lambda.value] && member_[beta.value];
  }
  return false;
}

std::uint64_t rect_count_axis(const GridSet& s) {
  const std::uint32_t q = s.field().q();
  const auto& m = s.membership();
  std::uint64_t total = 0;
  for (std::uint32_t a = 0; a < q; ++a) {
    for (std::uint32_t b = 0; b < q; ++b) {
      std::uint64_t common = 0;
      for (std::uint32_t c = 0; c < q; ++c) common += m[a * q + c] & m[b * q + c];
      total += common * common;
    }
  }
  return total;
}

std::uint64_t rect_count_axis_bruteforce(const GridSet& s) {
  const std::uint32_t q = s.field().q();
  const auto& m = s.membership();
  std::uint64_t total = 0;
  for (std::uint32_t a = 0; a < q; ++a)
    for (std::uint32_t b = 0; b < q; ++b)
      for (std::uint32_t c = 0; c < q; ++c)
        for (std::uint32_t d = 0; d < q; ++d)
          total += m[a * q + c] & m[a * q + d] & m[b * q + c] & m[b * q + d];
  return total;
}

std::uint64_t rect_count_axis_degenerate(const GridSet& s) {
  const std::uint32_t q = s.field().q();
  const auto& m = s.membership();
  std::uint64_t total = 0;
  for (std::uint32_t a = 0; a < q; ++a) {
    std::uint64_t column = 0, row = 0;
    for (std::uint32_t c = 0; c < q; ++c) {
      column += m[a * q + c];
      row += m[c * q + a];
    }
    total += column * column + row * row;
  }
  // a = b and c = d simultaneously is counted twice.
  return total - s.size();
}

RectangleCount rect_count_all(const GridSet& s, const SideFilter& filter, bool with_by_sides) {
  const Field& f = s.field();
  const std::uint32_t q = f.q();
  const std::vector<Point2> pts = s.points();
  std::vector<std::uint32_t> multiples;  // scalar multiples of a direction, reused
  RectangleCount count;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> by_sides;

  auto record = [&](Elem lambda, Elem beta) {
    if (!filter.accepts(lambda, beta)) return;
    ++count.ordered_total;
    if (lambda == f.zero() || beta == f.zero()) {
      ++count.degenerate;
    } else {
      ++count.nondegenerate;
    }
    if (with_by_sides) ++by_sides[std::minmax(lambda.value, beta.value)];
  };

  for (Point2 x : pts) {
    for (Point2 z : pts) {
      const Point2 v = sub(f, x, z);
      const Elem lambda = dot(f, v, v);
      if (v == Point2{f.zero(), f.zero()}) {
        // x = z: any y works and t = y.
        for (Point2 y : pts) record(lambda, quadrance(f, z, y));
        continue;
      }
      // (x - z) . (y - z) = 0 exactly on the line z + span(perp(v)).
      const Point2 w = perp(f, v);
      for (std::uint32_t k = 0; k < q; ++k) {
        const Point2 y = add(f, z, scale(f, Elem{k}, w));
        if (!s.contains(y)) continue;
        const Point2 t = sub(f, add(f, x, y), z);
        if (!s.contains(t)) continue;
        record(lambda, quadrance(f, z, y));
      }
    }
  }
  if (with_by_sides) count.by_sides = std::move(by_sides);
  return count;
}

RectangleCount rect_count_all_bruteforce(const GridSet& s, const SideFilter& filter) {
  const Field& f = s.field();
  const std::vector<Point2> pts = s.points();
  RectangleCount count;
  for (Point2 x : pts)
    for (Point2 z : pts)
      for (Point2 y : pts)
        for (Point2 t : pts) {
          const auto r = classify_rectangle(f, x, z, y, t);
          if (!r || !filter.accepts(r->lambda, r->beta)) continue;
          ++count.ordered_total;
          if (r->degenerate) {
            ++count.degenerate;
          } else {
            ++count.nondegenerate;
          }
        }
  return count;
}

std::uint64_t energy_count_filtered(const ParaboloidSet& x, const SideFilter& filter) {
  require_dense(x.field());
  const Field& f = x.field();
  const auto& pts = x.points();
  std::uint64_t count = 0;
  for_each_nontrivial(x, [&](std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t) {
    const Point2 pa = project(pts[a]), pb = project(pts[b]), pc = project(pts[c]);
    count += filter.accepts(quadrance(f, pa, pc), quadrance(f, pc, pb));
  });
  return count;
}

std::uint64_t axis_rectangles_with_differences(const GridSet& s, const MultiplicativeSubgroup& a) {
  const Field& f = s.field();
  std::uint64_t count = 0;
  for (Point2 x : s.points()) {
    for (Elem alpha : a.elements()) {
      const Point2 z = sub(f, x, Point2{alpha, f.zero()});
      if (!s.contains(z)) continue;
      for (Elem beta : a.elements()) {
        const Point2 y = sub(f, z, Point2{f.zero(), beta});
        const Point2 t = sub(f, add(f, x, y), z);
        if (!s.contains(y) || !s.contains(t)) continue;
        const auto r = classify_rectangle(f, x, z, y, t);
        count += r.has_value() && !r->degenerate;
      }
    }
  }
  return count;
}

BijectionReport bijection_check(const ParaboloidSet& x) {
  const Field& f = x.field();
  if (!f.supported_regime()) {
    throw Error(ErrorCode::kWrongResidue, "the energy/rectangle correspondence needs q = 3 mod 4");
  }
  const auto& pts = x.points();
  const std::size_t n = pts.size();
  std::vector<Point2> plane(n);
  for (std::size_t i = 0; i < n; ++i) plane[i] = project(pts[i]);

  BijectionReport report;
  for (std::size_t a = 0; a < n && report.holds; ++a) {
    for (std::size_t b = 0; b < n && report.holds; ++b) {
      const Point3 s = add(f, pts[a], pts[b]);
      for (std::size_t c = 0; c < n && report.holds; ++c) {
        for (std::size_t d = 0; d < n; ++d) {
          ++report.quadruples_checked;
          const bool energy = add(f, pts[c], pts[d]) == s;
          const auto rect = classify_rectangle(f, plane[a], plane[c], plane[b], plane[d]);
          const bool distinct = a != b && a != c && a != d && b != c && b != d && c != d;
          report.energy_tuples += energy;
          report.rectangles += rect.has_value();
          report.nontrivial_tuples += energy && distinct;
          report.nondegenerate_rectangles += rect.has_value() && !rect->degenerate;
          const bool mismatch = energy != rect.has_value() ||
                                (rect.has_value() && rect->degenerate == distinct);
          if (mismatch) {
            report.holds = false;
            report.counterexample = EnergyTuple{pts[a], pts[b], pts[c], pts[d]};
            break;
          }
        }
      }
    }
  }
  if (report.holds) {
    const EnergyReport e = energy_report(x);
    const RectangleCount r = rect_count_all(x.projection());
    report.counts_match = report.energy_tuples == e.total && report.rectangles == r.ordered_total &&
                          report.nontrivial_tuples == e.nontrivial &&
                          report.nondegenerate_rectangles == r.nondegenerate;
  }
  return report;
}

ParaboloidBound paraboloid_energy_bound_check(const Field& f) {
  ParaboloidBound out;
  out.energy = energy_count(ParaboloidSet::whole(f));
  const std::uint64_t q = f.q();
  out.bound = 2 * q * q * q * q * q;
  out.ratio = static_cast<double>(out.energy) / static_cast<double>(out.bound);
  out.pass = out.energy <= out.bound;
  return out;
}

}  // namespace fqlab
