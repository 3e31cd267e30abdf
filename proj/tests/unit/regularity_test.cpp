#include <gtest/gtest.h>

#include <cmath>

#include "fqlab/constructions.hpp"
#include "fqlab/error.hpp"
#include "fqlab/regularity.hpp"

namespace fqlab {
namespace {

GridFunction random_balanced(const Field& f, std::uint64_t seed) {
  Rng rng(seed, 5);
  std::vector<double> v(f.q() * f.q());
  for (double& x : v) x = rng.uniform() - 0.5;
  return GridFunction(f, std::move(v));
}

TEST(PartitionTest, RefineSplitsAtoms) {
  const Partition t = Partition::trivial(5);
  EXPECT_EQ(t.atom_count(), 1u);
  const Partition r = t.refine({1, 0, 1, 0, 0});
  EXPECT_EQ(r.atom_count(), 2u);
  EXPECT_EQ(r.atoms()[0], (std::vector<std::uint32_t>{0, 2}));
  EXPECT_EQ(r.atom_of(3), 1u);
  EXPECT_EQ(r.complexity(), 1u);
  const Partition r2 = r.refine({1, 1, 0, 0, 0});
  EXPECT_EQ(r2.atom_count(), 4u);
  EXPECT_EQ(r2.complexity(), 2u);
  // Refining by a union of atoms changes nothing.
  EXPECT_EQ(r2.refine({1, 0, 1, 0, 0}), r2);
  EXPECT_EQ(Partition::discrete(5).atom_count(), 5u);
}

TEST(PartitionTest, FromAtomsValidates) {
  EXPECT_NO_THROW(Partition::from_atoms(3, {{2}, {0, 1}}));
  EXPECT_THROW(Partition::from_atoms(3, {{0}, {1}}), Error);
  EXPECT_THROW(Partition::from_atoms(3, {{0, 1}, {1, 2}}), Error);
  EXPECT_THROW(Partition::from_atoms(3, {{0, 1, 2}, {}}), Error);
  EXPECT_EQ(Partition::from_atoms(3, {{2}, {0, 1}}).atoms()[0], (std::vector<std::uint32_t>{0, 1}));
}

TEST(ConditionalExpectationTest, PreservesAtomSums) {
  const Field f = Field::make(7);
  Rng rng(9);
  const GridSet s = random_grid_subset(f, 20, rng);
  const Partition b = Partition::trivial(7).refine({1, 1, 0, 0, 1, 0, 0});
  const Partition c = Partition::trivial(7).refine({0, 1, 1, 1, 0, 0, 0});
  const GridFunction g = conditional_expectation(s, b, c);
  double total = 0.0;
  for (double x : g.values()) total += x;
  EXPECT_NEAR(total, 20.0, 1e-12);
  const auto counts = atom_counts(s, b, c);
  std::uint64_t n = 0;
  for (auto x : counts) n += x;
  EXPECT_EQ(n, 20u);
  // Discrete partitions reproduce the indicator.
  const GridFunction id = conditional_expectation(s, Partition::discrete(7), Partition::discrete(7));
  const GridFunction ind = GridFunction::indicator(s);
  for (std::size_t i = 0; i < 49; ++i) EXPECT_DOUBLE_EQ(id.values()[i], ind.values()[i]);
}

TEST(WitnessTest, MeetsGuarantee) {
  for (std::uint32_t q : {7u, 11u, 19u}) {
    const Field f = Field::make(q);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const GridFunction h = random_balanced(f, seed * q);
      const Witness w = find_witness(h);
      const double norm = box_norm(h);
      EXPECT_GE(std::abs(w.correlation), std::pow(norm, 4) / 4 - 1e-12) << q << " " << seed;
    }
  }
}

TEST(WitnessTest, NeverBeatsBruteForceAtQ3) {
  const Field f = Field::make(3);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const GridFunction h = random_balanced(f, seed);
    const Witness fast = find_witness(h);
    const Witness best = find_witness_bruteforce(h);
    EXPECT_LE(std::abs(fast.correlation), std::abs(best.correlation) + 1e-12);
    EXPECT_GE(std::abs(best.correlation), std::pow(box_norm(h), 4) / 4 - 1e-12);
  }
}

TEST(WitnessTest, ZeroFunction) {
  const Witness w = find_witness(GridFunction::constant(Field::make(7), 0.0));
  EXPECT_EQ(w.correlation, 0.0);
}

TEST(RegularityTest, IterationBound) {
  EXPECT_EQ(regularity_iteration_bound(1.0), 16u);
  EXPECT_EQ(regularity_iteration_bound(0.5), 4096u);
  EXPECT_EQ(regularity_iteration_bound(0.3), 243866u);
  EXPECT_THROW(weak_regularity(GridSet::full(Field::make(7)), 0.0), Error);
  EXPECT_THROW(weak_regularity(GridSet::full(Field::make(7)), 1.5), Error);
}

TEST(RegularityTest, DecompositionInvariants) {
  for (std::uint32_t q : {11u, 19u}) {
    const Field f = Field::make(q);
    for (double eps : {0.5, 0.3, 0.15}) {
      Rng rng(q, static_cast<std::uint64_t>(eps * 100));
      const GridSet s = random_grid_subset(f, q * q / 2, rng);
      const Decomposition d = weak_regularity(s, eps);
      EXPECT_LE(d.box_norm_h, eps + 1e-12);
      EXPECT_LE(d.iterations, d.iteration_bound);
      EXPECT_EQ(d.trace.size(), d.iterations);
      EXPECT_LE(d.b.complexity(), d.iterations);
      for (const IterationRecord& r : d.trace) EXPECT_TRUE(r.increment_ok);
      // g + h = 1_S and g is the atom average.
      const GridFunction ind = GridFunction::indicator(s);
      for (std::size_t i = 0; i < ind.values().size(); ++i)
        ASSERT_NEAR(d.g.values()[i] + d.h.values()[i], ind.values()[i], 1e-12);
      for (double x : d.g.values()) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
      }
    }
  }
}

TEST(PipelineTest, AllRowsHold) {
  const Field f = Field::make(11);
  Rng rng(4);
  const GridSet s = random_grid_subset(f, 85, rng);
  const PipelineReport r = subgroup_rectangle_pipeline(s, MultiplicativeSubgroup::whole(f), 0.3);
  EXPECT_TRUE(r.pass);
  for (const PipelineRow& row : r.rows) EXPECT_TRUE(row.pass) << row.name;
  EXPECT_NEAR(static_cast<double>(r.axis_count), r.predicted_count, 1e-6 * r.predicted_count);
  EXPECT_GE(r.geometric_count, r.axis_count);
  EXPECT_EQ(r.set_size, 85u);
}

TEST(PipelineTest, WrongResidue) {
  const Field f = Field::make(13, 1, true);
  try {
    subgroup_rectangle_pipeline(GridSet::full(f), MultiplicativeSubgroup::whole(f), 0.3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWrongResidue);
  }
}

}  // namespace
}  // namespace fqlab
