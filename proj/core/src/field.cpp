#include "fqlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fqlab/error.hpp"

namespace fqlab {
namespace {

using Poly = std::vector<std::uint32_t>;  // low-to-high, trimmed

void trim(Poly& f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
}

std::uint32_t inv_mod(std::uint32_t a, std::uint32_t p) {
  // p is prime and small; Fermat.
  std::uint64_t result = 1, base = a % p;
  for (std::uint64_t e = p - 2; e > 0; e >>= 1) {
    if (e & 1) result = result * base % p;
    base = base * base % p;
  }
  return static_cast<std::uint32_t>(result);
}

// Remainder of f modulo g (g non-zero, trimmed).
Poly poly_mod(Poly f, const Poly& g, std::uint32_t p) {
  trim(f);
  const std::size_t dg = g.size() - 1;
  const std::uint32_t lead_inv = inv_mod(g.back(), p);
  while (f.size() > dg) {
    const std::size_t shift = f.size() - 1 - dg;
    const std::uint64_t factor = static_cast<std::uint64_t>(f.back()) * lead_inv % p;
    for (std::size_t i = 0; i <= dg; ++i) {
      const std::uint64_t sub = factor * g[i] % p;
      f[shift + i] = static_cast<std::uint32_t>((f[shift + i] + p - sub) % p);
    }
    trim(f);
  }
  return f;
}

Poly poly_mul(const Poly& a, const Poly& b, std::uint32_t p) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      out[i + j] = static_cast<std::uint32_t>(
          (out[i + j] + static_cast<std::uint64_t>(a[i]) * b[j]) % p);
    }
  }
  trim(out);
  return out;
}

Poly index_to_poly(std::uint32_t index, std::uint32_t p, std::uint32_t k) {
  Poly f(k, 0);
  for (std::uint32_t i = 0; i < k; ++i) {
    f[i] = index % p;
    index /= p;
  }
  trim(f);
  return f;
}

std::uint32_t poly_to_index(const Poly& f, std::uint32_t p) {
  std::uint32_t index = 0;
  for (std::size_t i = f.size(); i-- > 0;) index = index * p + f[i];
  return index;
}

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

bool is_irreducible(const std::vector<std::uint32_t>& monic, std::uint32_t p) {
  Poly f = monic;
  trim(f);
  if (f.size() < 2) return false;
  const std::size_t degree = f.size() - 1;
  if (degree == 1) return true;
  // Any factorization has a monic factor of degree <= degree / 2.
  for (std::size_t d = 1; d <= degree / 2; ++d) {
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < d; ++i) count *= p;
    for (std::uint64_t low = 0; low < count; ++low) {
      Poly g = index_to_poly(static_cast<std::uint32_t>(low), p, static_cast<std::uint32_t>(d));
      g.resize(d, 0);
      g.push_back(1);
      if (poly_mod(f, g, p).empty()) return false;
    }
  }
  return true;
}

Field Field::make(std::uint32_t p, std::uint32_t k, bool allow_non_3mod4) {
  if (!is_prime(p)) throw Error(ErrorCode::kNonPrime, "p = " + std::to_string(p) + " is not prime");
  if (k == 0) throw Error(ErrorCode::kInvalidParameters, "extension degree k must be >= 1");
  std::uint64_t q64 = 1;
  for (std::uint32_t i = 0; i < k; ++i) {
    q64 *= p;
    if (q64 > kMaxFieldOrder) {
      throw Error(ErrorCode::kInvalidParameters,
                  "field order exceeds " + std::to_string(kMaxFieldOrder));
    }
  }
  const auto q = static_cast<std::uint32_t>(q64);
  if (q % 4 != 3 && !allow_non_3mod4) {
    throw Error(ErrorCode::kWrongResidue,
                "q = " + std::to_string(q) + " is " + std::to_string(q % 4) + " mod 4");
  }

  auto impl = std::make_shared<Impl>();
  impl->p = p;
  impl->k = k;
  impl->q = q;
  impl->allow_non_3mod4 = allow_non_3mod4;

  Poly modulus;
  if (k > 1) {
    // Lexicographic in (c_0, ..., c_{k-1}) with c_0 most significant.
    std::vector<std::uint32_t> c(k, 0);
    for (;;) {
      Poly candidate = c;
      candidate.push_back(1);
      if (is_irreducible(candidate, p)) {
        modulus = candidate;
        break;
      }
      std::size_t pos = k;
      while (pos > 0 && ++c[pos - 1] == p) c[--pos] = 0;
      if (pos == 0) throw Error(ErrorCode::kInvalidParameters, "no irreducible modulus found");
    }
    impl->modulus = modulus;
  }

  const std::size_t qq = static_cast<std::size_t>(q) * q;
  impl->add.resize(qq);
  impl->mul.resize(qq);
  impl->neg.resize(q);
  impl->inv.assign(q, 0);

  std::vector<Poly> polys(q);
  for (std::uint32_t i = 0; i < q; ++i) polys[i] = index_to_poly(i, p, k);

  for (std::uint32_t i = 0; i < q; ++i) {
    Poly negated = polys[i];
    for (auto& c : negated) c = (p - c) % p;
    trim(negated);
    impl->neg[i] = poly_to_index(negated, p);
    for (std::uint32_t j = 0; j < q; ++j) {
      Poly sum(k, 0);
      for (std::uint32_t t = 0; t < k; ++t) {
        const std::uint32_t a = t < polys[i].size() ? polys[i][t] : 0;
        const std::uint32_t b = t < polys[j].size() ? polys[j][t] : 0;
        sum[t] = (a + b) % p;
      }
      trim(sum);
      impl->add[static_cast<std::size_t>(i) * q + j] = poly_to_index(sum, p);

      Poly prod = poly_mul(polys[i], polys[j], p);
      if (k > 1) prod = poly_mod(prod, modulus, p);
      impl->mul[static_cast<std::size_t>(i) * q + j] = poly_to_index(prod, p);
    }
  }
  for (std::uint32_t i = 1; i < q; ++i) {
    for (std::uint32_t j = 1; j < q; ++j) {
      if (impl->mul[static_cast<std::size_t>(i) * q + j] == 1) {
        impl->inv[i] = j;
        break;
      }
    }
  }

  impl->is_square.assign(q, 0);
  for (std::uint32_t i = 0; i < q; ++i) impl->is_square[impl->mul[static_cast<std::size_t>(i) * q + i]] = 1;

  Field field(impl);

  impl->trace.resize(q);
  impl->chi.resize(q);
  for (std::uint32_t i = 0; i < q; ++i) {
    Elem acc = field.zero();
    Elem frob{i};
    for (std::uint32_t t = 0; t < k; ++t) {
      acc = field.add(acc, frob);
      frob = field.pow(frob, p);
    }
    // The trace lies in the prime subfield, i.e. has index < p.
    impl->trace[i] = acc.value;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(acc.value) / p;
    impl->chi[i] = std::polar(1.0, angle);
  }

  for (std::uint32_t i = 1; i < q; ++i) {
    if (field.order(Elem{i}) == q - 1) {
      impl->primitive_root = i;
      break;
    }
  }
  return field;
}

std::string Field::describe() const {
  std::ostringstream out;
  out << p() << ' ' << k();
  if (!modulus().empty()) {
    out << ' ';
    for (std::size_t i = 0; i < modulus().size(); ++i) out << (i ? "," : "") << modulus()[i];
  }
  return out.str();
}

Elem Field::from_int(std::int64_t n) const {
  const std::int64_t p64 = p();
  return Elem{static_cast<std::uint32_t>(((n % p64) + p64) % p64)};
}

Elem Field::element(std::uint32_t index) const {
  if (index >= q()) {
    throw Error(ErrorCode::kInvalidParameters,
                "element index " + std::to_string(index) + " out of range for q = " + std::to_string(q()));
  }
  return Elem{index};
}

std::vector<std::uint32_t> Field::coeffs(Elem x) const {
  std::vector<std::uint32_t> out(k(), 0);
  std::uint32_t v = x.value;
  for (std::uint32_t i = 0; i < k(); ++i) {
    out[i] = v % p();
    v /= p();
  }
  return out;
}

Elem Field::from_coeffs(const std::vector<std::uint32_t>& c) const {
  if (c.size() != k()) throw Error(ErrorCode::kInvalidParameters, "coefficient vector must have length k");
  std::uint32_t index = 0;
  for (std::size_t i = c.size(); i-- > 0;) {
    if (c[i] >= p()) throw Error(ErrorCode::kInvalidParameters, "coefficient out of range");
    index = index * p() + c[i];
  }
  return Elem{index};
}

Elem Field::inv(Elem x) const {
  if (x.value == 0) throw Error(ErrorCode::kDivisionByZero, "inverse of zero");
  return Elem{impl_->inv[x.value]};
}

Elem Field::pow(Elem x, std::uint64_t e) const {
  Elem result = one();
  Elem base = x;
  for (; e > 0; e >>= 1) {
    if (e & 1) result = mul(result, base);
    base = mul(base, base);
  }
  return result;
}

std::uint64_t Field::order(Elem x) const {
  if (x.value == 0) throw Error(ErrorCode::kDivisionByZero, "zero has no multiplicative order");
  std::uint64_t n = 1;
  for (Elem y = x; y != one(); y = mul(y, x)) ++n;
  return n;
}

MultiplicativeSubgroup::MultiplicativeSubgroup(Field field, std::vector<Elem> elements, Elem generator)
    : field_(std::move(field)), elements_(std::move(elements)), generator_(generator) {
  member_.assign(field_.q(), 0);
  for (Elem x : elements_) member_[x.value] = 1;
}

MultiplicativeSubgroup MultiplicativeSubgroup::of_order(const Field& field, std::uint64_t d) {
  const std::uint64_t n = field.q() - 1;
  if (d == 0 || n % d != 0) {
    throw Error(ErrorCode::kNotADivisor,
                std::to_string(d) + " does not divide q - 1 = " + std::to_string(n));
  }
  const Elem generator = field.pow(field.primitive_root(), n / d);
  std::vector<Elem> elements;
  elements.reserve(d);
  Elem x = field.one();
  for (std::uint64_t j = 0; j < d; ++j) {
    elements.push_back(x);
    x = field.mul(x, generator);
  }
  std::sort(elements.begin(), elements.end());
  return MultiplicativeSubgroup(field, std::move(elements), generator);
}

std::vector<std::uint64_t> subgroup_orders(const Field& field) {
  std::vector<std::uint64_t> out;
  const std::uint64_t n = field.q() - 1;
  for (std::uint64_t d = 1; d <= n; ++d) {
    if (n % d == 0) out.push_back(d);
  }
  return out;
}

}  // namespace fqlab
