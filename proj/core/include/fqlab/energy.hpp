#pragma once

// Exact counts of energy tuples on the paraboloid and of rectangles in F_q^2.
//
// All counts are over ordered quadruples. An energy tuple (a, b, c, d) has
// a + b = c + d; it is non-trivial when the four points are pairwise distinct.
// A rectangle quadruple (x, z, y, t) is taken in cyclic vertex order, so that
// the energy tuple (a, b, c, d) corresponds to the rectangle (a, c, b, d).

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "fqlab/field.hpp"
#include "fqlab/geometry.hpp"

namespace fqlab {

struct EnergyReport {
  std::uint64_t total = 0;       // E+(X)
  std::uint64_t nontrivial = 0;  // E+_nt(X)
  std::optional<std::map<Point3, std::uint64_t>> by_sum;  // r(s) for every sum with r(s) > 0
};

EnergyReport energy_report(const ParaboloidSet& x, bool with_by_sum = false);
std::uint64_t energy_count(const ParaboloidSet& x);
std::uint64_t energy_nontrivial(const ParaboloidSet& x);

// O(|X|^4) reference counts.
std::uint64_t energy_count_bruteforce(const ParaboloidSet& x);
std::uint64_t energy_nontrivial_bruteforce(const ParaboloidSet& x);

using EnergyTuple = std::array<Point3, 4>;
// Every non-trivial energy tuple, sorted lexicographically.
std::vector<EnergyTuple> nontrivial_energy_tuples(const ParaboloidSet& x);

// Restricts rectangles by their side quadrances.
class SideFilter {
 public:
  static SideFilter none() { return SideFilter(); }
  // Unordered pair {lambda, beta}; throws kZeroSide if either is zero.
  static SideFilter pair(const Field& f, Elem lambda, Elem beta);
  // Both sides in the subgroup.
  static SideFilter subgroup(const MultiplicativeSubgroup& a);

  bool is_none() const { return kind_ == Kind::kNone; }
  bool accepts(Elem lambda, Elem beta) const;

 private:
  enum class Kind { kNone, kPair, kSubgroup };
  Kind kind_ = Kind::kNone;
  Elem lambda_, beta_;
  std::vector<std::uint8_t> member_;
};

struct RectangleCount {
  std::uint64_t ordered_total = 0;
  std::uint64_t degenerate = 0;
  std::uint64_t nondegenerate = 0;
  // Unordered side pair (min, max) by canonical index -> ordered count.
  std::optional<std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t>> by_sides;
};

// Sum over a, b, c, d of S(a,c) S(a,d) S(b,c) S(b,d), degenerate terms included.
std::uint64_t rect_count_axis(const GridSet& s);
std::uint64_t rect_count_axis_bruteforce(const GridSet& s);
// The terms of rect_count_axis with a = b or c = d.
std::uint64_t rect_count_axis_degenerate(const GridSet& s);

// Ordered rectangle quadruples in S passing the filter; O(|S|^2 q).
RectangleCount rect_count_all(const GridSet& s, const SideFilter& filter = SideFilter::none(),
                              bool with_by_sides = false);
// O(|S|^4) reference over classify_rectangle.
RectangleCount rect_count_all_bruteforce(const GridSet& s, const SideFilter& filter = SideFilter::none());

// Non-trivial energy tuples of X whose projected rectangle passes the filter.
std::uint64_t energy_count_filtered(const ParaboloidSet& x, const SideFilter& filter);

// Axis-parallel oriented rectangles (a,c) -> (b,c) -> (b,d) -> (a,d) in S with
// a - b and c - d both in A, found by walking the geometric vertex cycle.
std::uint64_t axis_rectangles_with_differences(const GridSet& s, const MultiplicativeSubgroup& a);

struct BijectionReport {
  bool holds = true;
  std::uint64_t quadruples_checked = 0;
  std::uint64_t energy_tuples = 0;
  std::uint64_t rectangles = 0;
  std::uint64_t nontrivial_tuples = 0;
  std::uint64_t nondegenerate_rectangles = 0;
  // Aggregate counts agree with energy_count / energy_nontrivial / rect_count_all.
  bool counts_match = true;
  std::optional<EnergyTuple> counterexample;
};

// Checks, for every (a,b,c,d) in X^4, that a + b = c + d exactly when the
// projections taken as (a,c,b,d) form a rectangle, and that non-trivial tuples
// are exactly the non-degenerate rectangles. Throws kWrongResidue unless q = 3 mod 4.
BijectionReport bijection_check(const ParaboloidSet& x);

struct ParaboloidBound {
  std::uint64_t energy = 0;  // E+(P)
  std::uint64_t bound = 0;   // 2 q^5
  double ratio = 0.0;
  bool pass = false;
};
ParaboloidBound paraboloid_energy_bound_check(const Field& f);

}  // namespace fqlab
