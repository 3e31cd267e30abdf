#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fqlab/error.hpp"
#include "fqlab/field.hpp"

namespace fqlab {
namespace {

TEST(FieldTest, RejectsBadParameters) {
  EXPECT_THROW(Field::make(9), Error);
  try {
    Field::make(13);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWrongResidue);
  }
  try {
    Field::make(15);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonPrime);
  }
  EXPECT_NO_THROW(Field::make(13, 1, true));
  EXPECT_THROW(Field::make(7, 0), Error);
}

TEST(FieldTest, PrimeFieldMatchesIntegerArithmetic) {
  for (std::uint32_t p : {3u, 7u, 11u, 19u, 23u}) {
    const Field f = Field::make(p);
    for (std::uint32_t x = 0; x < p; ++x) {
      for (std::uint32_t y = 0; y < p; ++y) {
        EXPECT_EQ(f.add(Elem{x}, Elem{y}).value, (x + y) % p);
        EXPECT_EQ(f.mul(Elem{x}, Elem{y}).value, (x * y) % p);
        EXPECT_EQ(f.sub(Elem{x}, Elem{y}).value, (x + p - y) % p);
      }
    }
    EXPECT_EQ(f.from_int(-1).value, p - 1);
  }
}

// Field axioms over every element of small extension fields.
TEST(FieldTest, AxiomsHoldExhaustively) {
  for (auto [p, k] : {std::pair{3u, 1u}, {7u, 1u}, {3u, 3u}, {7u, 3u}, {3u, 2u}, {5u, 2u}}) {
    const Field f = Field::make(p, k, true);
    const std::uint32_t q = f.q();
    for (std::uint32_t a = 0; a < q; ++a) {
      const Elem x{a};
      EXPECT_EQ(f.add(x, f.neg(x)), f.zero());
      if (a) EXPECT_EQ(f.mul(x, f.inv(x)), f.one());
      for (std::uint32_t b = 0; b < q; ++b) {
        const Elem y{b};
        EXPECT_EQ(f.mul(x, y), f.mul(y, x));
        for (std::uint32_t c = 0; c < q; c += 3) {
          const Elem z{c};
          ASSERT_EQ(f.mul(x, f.add(y, z)), f.add(f.mul(x, y), f.mul(x, z)));
          ASSERT_EQ(f.mul(f.mul(x, y), z), f.mul(x, f.mul(y, z)));
        }
      }
    }
  }
}

TEST(FieldTest, ModulusIsSmallestIrreducible) {
  EXPECT_EQ(Field::make(3, 2, true).modulus(), (std::vector<std::uint32_t>{1, 0, 1}));
  // x^3 + 2x^2 + 1 over F_3: (1,0,0), (1,0,1) have roots.
  EXPECT_EQ(Field::make(3, 3).modulus(), (std::vector<std::uint32_t>{1, 0, 2, 1}));
  EXPECT_TRUE(is_irreducible({1, 0, 2, 1}, 3));
  EXPECT_FALSE(is_irreducible({1, 0, 1, 1}, 3));
  EXPECT_TRUE(Field::make(7).modulus().empty());
}

TEST(FieldTest, CoefficientRoundTrip) {
  const Field f = Field::make(3, 3);
  for (std::uint32_t x = 0; x < f.q(); ++x) {
    EXPECT_EQ(f.from_coeffs(f.coeffs(Elem{x})).value, x);
  }
  EXPECT_EQ(f.coeffs(Elem{5}), (std::vector<std::uint32_t>{2, 1, 0}));
}

TEST(FieldTest, DivisionByZeroThrows) {
  const Field f = Field::make(7);
  try {
    f.inv(f.zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivisionByZero);
  }
}

TEST(FieldTest, TraceIsAdditiveAndCharacterSumsVanish) {
  for (auto [p, k] : {std::pair{7u, 1u}, {3u, 3u}, {7u, 3u}, {11u, 1u}}) {
    const Field f = Field::make(p, k);
    std::complex<double> sum = 0.0;
    for (std::uint32_t x = 0; x < f.q(); ++x) {
      sum += f.chi(Elem{x});
      for (std::uint32_t y = 0; y < f.q(); y += 2) {
        EXPECT_EQ(f.trace(f.add(Elem{x}, Elem{y})), (f.trace(Elem{x}) + f.trace(Elem{y})) % p);
      }
    }
    EXPECT_LT(std::abs(sum), kCharacterTolerance);
    EXPECT_EQ(f.trace(f.one()), k % p);
  }
}

TEST(FieldTest, MinusOneIsNonSquareInSupportedRegime) {
  for (auto [p, k] : {std::pair{3u, 1u}, {7u, 1u}, {11u, 1u}, {3u, 3u}, {7u, 3u}, {43u, 1u}}) {
    const Field f = Field::make(p, k);
    EXPECT_FALSE(f.is_square(f.neg(f.one())));
    std::uint32_t squares = 0;
    for (std::uint32_t x = 1; x < f.q(); ++x) squares += f.is_square(Elem{x});
    EXPECT_EQ(squares, (f.q() - 1) / 2);
  }
}

TEST(FieldTest, PrimitiveRootHasFullOrder) {
  EXPECT_EQ(Field::make(7).primitive_root().value, 3u);
  EXPECT_EQ(Field::make(11).primitive_root().value, 2u);
  EXPECT_EQ(Field::make(19).primitive_root().value, 2u);
  for (auto [p, k] : {std::pair{23u, 1u}, {3u, 3u}, {7u, 3u}}) {
    const Field f = Field::make(p, k);
    EXPECT_EQ(f.order(f.primitive_root()), f.q() - 1);
  }
}

TEST(SubgroupTest, OrdersAndMembership) {
  const Field f = Field::make(7);
  const auto a = MultiplicativeSubgroup::of_order(f, 3);
  std::vector<std::uint32_t> got;
  for (Elem e : a.elements()) got.push_back(e.value);
  EXPECT_EQ(got, (std::vector<std::uint32_t>{1, 2, 4}));
  EXPECT_TRUE(a.contains(Elem{2}));
  EXPECT_FALSE(a.contains(Elem{3}));
  EXPECT_FALSE(a.contains(Elem{0}));
  EXPECT_EQ(MultiplicativeSubgroup::whole(f).order(), 6u);
  EXPECT_EQ(subgroup_orders(f), (std::vector<std::uint64_t>{1, 2, 3, 6}));
  try {
    MultiplicativeSubgroup::of_order(f, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotADivisor);
  }
}

TEST(SubgroupTest, ClosedUnderMultiplication) {
  const Field f = Field::make(3, 3);
  for (std::uint64_t d : subgroup_orders(f)) {
    const auto a = MultiplicativeSubgroup::of_order(f, d);
    ASSERT_EQ(a.order(), d);
    for (Elem x : a.elements()) {
      for (Elem y : a.elements()) EXPECT_TRUE(a.contains(f.mul(x, y)));
      EXPECT_EQ(f.pow(x, d), f.one());
    }
  }
}

}  // namespace
}  // namespace fqlab
