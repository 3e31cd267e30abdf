#include <gtest/gtest.h>

#include <set>

#include "fqlab/constructions.hpp"
#include "fqlab/error.hpp"

namespace fqlab {
namespace {

TEST(RngTest, DeterministicAndSplit) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.engine()(), b.engine()());
  Rng c = Rng(42).split(0), d = Rng(42).split(1);
  EXPECT_NE(c.engine()(), d.engine()());
  EXPECT_EQ(Rng(42).split(3).stream(), Rng(42).split(3).stream());
  Rng e(1);
  for (int i = 0; i < 1000; ++i) {
    const auto x = e.below(7);
    EXPECT_LT(x, 7u);
    const double u = e.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_THROW(e.below(0), Error);
}

TEST(RngTest, RandomSubsetSize) {
  const Field f = Field::make(7);
  Rng rng(3);
  EXPECT_EQ(random_grid_subset(f, 0, rng).size(), 0u);
  EXPECT_EQ(random_grid_subset(f, 30, rng).size(), 30u);
  EXPECT_EQ(random_grid_subset(f, 49, rng), GridSet::full(f));
  EXPECT_THROW(random_grid_subset(f, 50, rng), Error);
}

TEST(SpencerTest, FrozenValues) {
  EXPECT_EQ(spencer_bound(4, 49, 343), 12u);
  EXPECT_EQ(spencer_bound(4, 49, 98), 18u);
  EXPECT_EQ(spencer_root(4, 49, 98), 24u);
  // Graphs (k = 2): r = n^2 / (2m).
  EXPECT_EQ(spencer_root(2, 10, 25), 2u);
  EXPECT_EQ(spencer_bound(2, 10, 25), 1u);
  try {
    spencer_bound(4, 49, 12);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewEdges);
  }
  EXPECT_THROW(spencer_bound(1, 10, 10), Error);
}

TEST(SpencerTest, RootIsMaximal) {
  for (std::uint64_t n : {49u, 121u, 361u}) {
    for (std::uint64_t m : {n, n * 2, n * 7}) {
      const std::uint64_t r = spencer_root(4, n, m);
      const long double lhs = static_cast<long double>(r) * r * r * 4 * m;
      const long double next = static_cast<long double>(r + 1) * (r + 1) * (r + 1) * 4 * m;
      const long double rhs = static_cast<long double>(n) * n * n * n;
      EXPECT_LE(lhs, rhs);
      EXPECT_GT(next, rhs);
    }
  }
}

TEST(HypergraphTest, SquaresAreEdges) {
  const Field f = Field::make(7);
  const HypergraphInstance h = square_hypergraph(f, f.one());
  EXPECT_EQ(h.m(), 98u);
  EXPECT_EQ(h.n, 49u);
  for (const auto& e : h.edges) {
    EXPECT_TRUE(std::is_sorted(e.begin(), e.end()));
    EXPECT_EQ(std::set<std::uint32_t>(e.begin(), e.end()).size(), 4u);
  }
  for (const Square& sq : enumerate_squares(f, Elem{3})) EXPECT_TRUE(square_on_circle(f, sq, Elem{3}));
  EXPECT_THROW(square_hypergraph(f, f.zero()), Error);
}

TEST(SquareFreeTest, CertificatesAreZero) {
  for (std::uint32_t q : {7u, 11u}) {
    const Field f = Field::make(q);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const SquareFreeResult r = square_free_independent_set(f, f.one(), seed);
      EXPECT_EQ(r.edges_inside, 0u);
      EXPECT_EQ(r.certificate_rectangles, 0u);
      EXPECT_EQ(r.certificate_energy, 0u);
      EXPECT_EQ(r.achieved_size, r.plane.size());
      EXPECT_EQ(r.lifted.size(), r.plane.size());
    }
  }
}

TEST(SquareFreeTest, Reproducible) {
  const Field f = Field::make(11);
  EXPECT_EQ(square_free_independent_set(f, Elem{2}, 5).plane, square_free_independent_set(f, Elem{2}, 5).plane);
}

TEST(EnergyFreeTest, CertificateAndDeterminism) {
  for (std::uint32_t q : {19u, 23u}) {
    const Field f = Field::make(q);
    const EnergyFreeResult a = random_energy_free(f, 7);
    EXPECT_EQ(a.certificate_nontrivial, 0u);
    EXPECT_GE(static_cast<double>(a.achieved_size), q / 8.0);
    EXPECT_EQ(a.achieved_size + a.deleted, a.sampled);
    EXPECT_EQ(random_energy_free(f, 7).set, a.set);
  }
  EXPECT_THROW(random_energy_free(Field::make(13, 1, true), 1), Error);
}

TEST(PairFreeTest, GreedyResultIsFree) {
  const Field f = Field::make(7);
  const PairFreeResult r = pair_free_search(f, Elem{1}, Elem{2}, 3);
  EXPECT_EQ(r.certificate_rectangles, 0u);
  EXPECT_TRUE(r.ratio_is_square);
  // A non-square ratio admits no rectangle at all, so the full plane survives.
  const PairFreeResult n = pair_free_search(f, Elem{1}, Elem{3}, 3);
  EXPECT_FALSE(n.ratio_is_square);
  EXPECT_EQ(n.best_size, 49u);
}

TEST(PairFreeTest, CompletesRectangle) {
  const Field f = Field::make(7);
  const GridSet s = GridSet::from_points(f, {{Elem{0}, Elem{0}}, {Elem{1}, Elem{0}}, {Elem{1}, Elem{1}}});
  const SideFilter any = SideFilter::none();
  EXPECT_TRUE(completes_rectangle(s, {Elem{0}, Elem{1}}, any));
  EXPECT_FALSE(completes_rectangle(s, {Elem{0}, Elem{2}}, any));
  EXPECT_FALSE(completes_rectangle(s, {Elem{0}, Elem{1}}, SideFilter::pair(f, Elem{2}, Elem{2})));
}

}  // namespace
}  // namespace fqlab
