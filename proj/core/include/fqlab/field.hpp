#pragma once

// Exact arithmetic in F_q, q = p^k, backed by precomputed operation tables.
//
// Elements are identified by their canonical index: the coefficient vector
// (c_0, ..., c_{k-1}) of the residue polynomial, read as the base-p integer
// c_0 + c_1 p + ... + c_{k-1} p^{k-1}. Index 0 is zero and index 1 is one, and
// the first p indices are the prime subfield.

#include <complex>
#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace fqlab {

struct Elem {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(Elem, Elem) = default;
};

// Largest field order the tables are built for.
inline constexpr std::uint32_t kMaxFieldOrder = 1024;

// Absolute tolerance for comparisons involving character sums.
inline constexpr double kCharacterTolerance = 1e-9;

bool is_prime(std::uint64_t n);

class Field {
 public:
  // Builds F_{p^k}. The modulus is the lexicographically smallest monic
  // irreducible polynomial of degree k, comparing (c_0, ..., c_{k-1}) with c_0
  // most significant. Throws kNonPrime, kWrongResidue (q mod 4 != 3 unless
  // allowed) or kInvalidParameters (k == 0, q too large).
  static Field make(std::uint32_t p, std::uint32_t k = 1, bool allow_non_3mod4 = false);

  std::uint32_t p() const { return impl_->p; }
  std::uint32_t k() const { return impl_->k; }
  std::uint32_t q() const { return impl_->q; }
  // Full monic modulus, low-to-high including the leading 1; empty for k = 1.
  const std::vector<std::uint32_t>& modulus() const { return impl_->modulus; }
  bool allow_non_3mod4() const { return impl_->allow_non_3mod4; }
  // q = 3 (mod 4), the regime where -1 is a non-square.
  bool supported_regime() const { return impl_->q % 4 == 3; }
  // "p k c0,c1,..." as used in headers of point files and reports.
  std::string describe() const;

  Elem zero() const { return Elem{0}; }
  Elem one() const { return Elem{1}; }
  // Image of an integer under Z -> F_p -> F_q.
  Elem from_int(std::int64_t n) const;
  Elem element(std::uint32_t index) const;

  std::vector<std::uint32_t> coeffs(Elem x) const;
  Elem from_coeffs(const std::vector<std::uint32_t>& coeffs) const;

  Elem add(Elem x, Elem y) const { return Elem{impl_->add[idx(x, y)]}; }
  Elem sub(Elem x, Elem y) const { return add(x, neg(y)); }
  Elem mul(Elem x, Elem y) const { return Elem{impl_->mul[idx(x, y)]}; }
  Elem neg(Elem x) const { return Elem{impl_->neg[x.value]}; }
  // Throws kDivisionByZero on zero.
  Elem inv(Elem x) const;
  Elem div(Elem x, Elem y) const { return mul(x, inv(y)); }
  Elem pow(Elem x, std::uint64_t e) const;
  Elem square(Elem x) const { return mul(x, x); }
  Elem half() const { return inv(from_int(2)); }

  // Absolute trace to F_p, returned as a residue in [0, p).
  std::uint32_t trace(Elem x) const { return impl_->trace[x.value]; }
  // chi(x) = exp(2 pi i Tr(x) / p).
  std::complex<double> chi(Elem x) const { return impl_->chi[x.value]; }

  bool is_square(Elem x) const { return impl_->is_square[x.value] != 0; }
  // Multiplicative order of a nonzero element.
  std::uint64_t order(Elem x) const;
  // Smallest canonical element of order q - 1.
  Elem primitive_root() const { return Elem{impl_->primitive_root}; }

  // Raw tables, row-major [x * q + y]; for inner loops.
  const std::uint32_t* add_table() const { return impl_->add.data(); }
  const std::uint32_t* mul_table() const { return impl_->mul.data(); }
  const std::uint32_t* neg_table() const { return impl_->neg.data(); }

  friend bool operator==(const Field& a, const Field& b) {
    return a.impl_ == b.impl_ ||
           (a.p() == b.p() && a.k() == b.k() && a.modulus() == b.modulus());
  }

 private:
  struct Impl {
    std::uint32_t p = 0;
    std::uint32_t k = 0;
    std::uint32_t q = 0;
    bool allow_non_3mod4 = false;
    std::vector<std::uint32_t> modulus;
    std::vector<std::uint32_t> add;
    std::vector<std::uint32_t> mul;
    std::vector<std::uint32_t> neg;
    std::vector<std::uint32_t> inv;
    std::vector<std::uint32_t> trace;
    std::vector<std::complex<double>> chi;
    std::vector<std::uint8_t> is_square;
    std::uint32_t primitive_root = 0;
  };

  explicit Field(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::size_t idx(Elem x, Elem y) const {
    return static_cast<std::size_t>(x.value) * impl_->q + y.value;
  }

  std::shared_ptr<const Impl> impl_;
};

// Monic irreducibility test over F_p by trial division; coefficients low-to-high.
bool is_irreducible(const std::vector<std::uint32_t>& monic, std::uint32_t p);

class MultiplicativeSubgroup {
 public:
  // {g^{j (q-1)/d} : 0 <= j < d} for the field's primitive root g.
  // Throws kNotADivisor when d does not divide q - 1.
  static MultiplicativeSubgroup of_order(const Field& field, std::uint64_t d);
  static MultiplicativeSubgroup whole(const Field& field) {
    return of_order(field, field.q() - 1);
  }

  std::uint64_t order() const { return elements_.size(); }
  const std::vector<Elem>& elements() const { return elements_; }
  Elem generator() const { return generator_; }
  bool contains(Elem x) const { return member_[x.value] != 0; }
  const Field& field() const { return field_; }

 private:
  MultiplicativeSubgroup(Field field, std::vector<Elem> elements, Elem generator);

  Field field_;
  std::vector<Elem> elements_;
  Elem generator_;
  std::vector<std::uint8_t> member_;
};

// All divisors of q - 1 in increasing order.
std::vector<std::uint64_t> subgroup_orders(const Field& field);

}  // namespace fqlab
