#include "fqlab/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fqlab/error.hpp"

namespace fqlab {
namespace {

using u128 = unsigned __int128;
constexpr u128 kSaturate = ~static_cast<u128>(0);

u128 mul_sat(u128 a, u128 b) {
  if (a != 0 && b > kSaturate / a) return kSaturate;
  return a * b;
}

u128 pow_sat(u128 base, std::uint64_t e) {
  u128 out = 1;
  for (std::uint64_t i = 0; i < e; ++i) out = mul_sat(out, base);
  return out;
}

constexpr std::uint32_t kEnergyFreeAttempts = 32;

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(splitmix64(seed ^ splitmix64(stream))) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

bool Rng::bernoulli(double p) { return uniform() < p; }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidParameters, "empty range");
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

GridSet random_grid_subset(const Field& f, std::uint64_t size, Rng& rng) {
  const std::uint32_t n = f.q() * f.q();
  if (size > n) throw Error(ErrorCode::kInvalidParameters, "subset larger than the plane");
  std::vector<std::uint32_t> idx(n);
  for (std::uint32_t i = 0; i < n; ++i) idx[i] = i;
  GridSet s(f);
  for (std::uint64_t i = 0; i < size; ++i) {
    std::swap(idx[i], idx[i + rng.below(n - i)]);
    s.insert(plane_point(f, idx[i]));
  }
  return s;
}

std::uint64_t spencer_root(std::uint64_t k, std::uint64_t n, std::uint64_t m) {
  if (k < 2) throw Error(ErrorCode::kInvalidParameters, "uniformity must be at least 2");
  if (static_cast<u128>(m) * k < n) throw Error(ErrorCode::kTooFewEdges, "need m >= n / k");
  const u128 rhs = pow_sat(n, k);
  const u128 km = static_cast<u128>(k) * m;
  // Largest r with r^{k-1} k m <= n^k; r <= n^{k/(k-1)} <= n^2.
  std::uint64_t lo = 0, hi = n > 0 ? std::min<u128>(static_cast<u128>(n) * n, 1ull << 62) : 0;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo + 1) / 2;
    if (mul_sat(pow_sat(mid, k - 1), km) <= rhs) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

std::uint64_t spencer_bound(std::uint64_t k, std::uint64_t n, std::uint64_t m) {
  const std::uint64_t r = spencer_root(k, n, m);
  return static_cast<std::uint64_t>((static_cast<u128>(k - 1) * r + k - 1) / k);
}

EnergyFreeResult random_energy_free(const Field& f, std::uint64_t seed) {
  if (!f.supported_regime()) throw Error(ErrorCode::kWrongResidue, "construction needs q = 3 mod 4");
  const std::uint32_t q = f.q();
  const double prob = 1.0 / (2.0 * q);
  EnergyFreeResult out{ParaboloidSet(f)};
  out.seed = seed;
  out.target_size = q / 8.0;
  for (std::uint32_t attempt = 0; attempt < kEnergyFreeAttempts; ++attempt) {
    const std::uint64_t s = seed + attempt;
    Rng rng(s);
    std::vector<Point3> sample;
    for (std::uint32_t i = 0; i < q * q; ++i) {
      if (rng.bernoulli(prob)) sample.push_back(lift(f, plane_point(f, i)));
    }
    const ParaboloidSet x = ParaboloidSet::from_points(f, sample);
    const auto tuples = nontrivial_energy_tuples(x);
    std::vector<Point3> removed;
    auto gone = [&removed](const Point3& p) { return std::binary_search(removed.begin(), removed.end(), p); };
    for (const EnergyTuple& t : tuples) {
      if (std::any_of(t.begin(), t.end(), gone)) continue;
      const Point3 victim = *std::min_element(t.begin(), t.end());
      removed.insert(std::upper_bound(removed.begin(), removed.end(), victim), victim);
    }
    std::vector<Point3> kept;
    for (const Point3& p : x.points()) {
      if (!gone(p)) kept.push_back(p);
    }
    out.set = ParaboloidSet::from_points(f, kept);
    out.seed_used = s;
    out.attempts = attempt + 1;
    out.sampled = x.size();
    out.deleted = removed.size();
    out.nontrivial_tuples = tuples.size();
    out.achieved_size = out.set.size();
    out.certificate_nontrivial = energy_nontrivial_bruteforce(out.set);
    if (static_cast<double>(out.achieved_size) >= out.target_size && out.certificate_nontrivial == 0) return out;
  }
  throw Error(ErrorCode::kConstructionFailed,
              "no energy-free set of size >= q/8 after " + std::to_string(kEnergyFreeAttempts) + " attempts");
}

HypergraphInstance square_hypergraph(const Field& f, Elem lambda) {
  HypergraphInstance h;
  h.k = 4;
  h.n = static_cast<std::uint64_t>(f.q()) * f.q();
  for (const Square& sq : enumerate_squares(f, lambda)) {
    h.edges.push_back({plane_index(f, sq[0]), plane_index(f, sq[1]), plane_index(f, sq[2]), plane_index(f, sq[3])});
  }
  const std::uint64_t q = f.q();
  if (h.m() > q * q * q) throw Error(ErrorCode::kConstructionFailed, "square hypergraph has more than q^3 edges");
  return h;
}

bool square_on_circle(const Field& f, const Square& square, Elem lambda) {
  const Point2 c = square_center(f, square);
  const Elem r = f.mul(f.half(), lambda);
  return std::all_of(square.begin(), square.end(), [&](Point2 v) { return quadrance(f, v, c) == r; });
}

std::uint64_t edges_inside(const HypergraphInstance& h, const std::vector<std::uint8_t>& member) {
  std::uint64_t n = 0;
  for (const auto& e : h.edges) {
    if (member[e[0]] && member[e[1]] && member[e[2]] && member[e[3]]) ++n;
  }
  return n;
}

SquareFreeResult square_free_independent_set(const Field& f, Elem lambda, std::uint64_t seed, std::uint32_t attempts) {
  if (!f.supported_regime()) throw Error(ErrorCode::kWrongResidue, "construction needs q = 3 mod 4");
  if (attempts == 0) throw Error(ErrorCode::kInvalidParameters, "need at least one attempt");
  const HypergraphInstance h = square_hypergraph(f, lambda);
  const double n = static_cast<double>(h.n);
  const double m = static_cast<double>(h.m());
  const double t = std::clamp(std::cbrt(std::pow(n, 4) / (4.0 * m)) / n, 0.0, 1.0);

  SquareFreeResult out{GridSet(f), ParaboloidSet(f), lambda};
  out.seed = seed;
  out.attempts = attempts;
  out.probability = t;
  out.edges = h.m();
  out.spencer = spencer_bound(4, h.n, h.m());

  std::vector<std::uint8_t> best;
  std::uint64_t best_size = 0;
  const Rng root(seed);
  for (std::uint32_t attempt = 0; attempt < attempts; ++attempt) {
    Rng rng = root.split(attempt);
    std::vector<std::uint8_t> member(h.n, 0);
    for (std::uint64_t v = 0; v < h.n; ++v) member[v] = rng.bernoulli(t);
    for (const auto& e : h.edges) {
      if (member[e[0]] && member[e[1]] && member[e[2]] && member[e[3]]) member[e[0]] = 0;
    }
    const std::uint64_t size = std::count(member.begin(), member.end(), 1);
    if (best.empty() || size > best_size) {
      best = std::move(member);
      best_size = size;
      out.best_attempt = attempt;
    }
  }

  for (std::uint32_t i = 0; i < h.n; ++i) {
    if (best[i]) out.plane.insert(plane_point(f, i));
  }
  out.lifted = ParaboloidSet::lift_of(out.plane);
  out.achieved_size = out.plane.size();
  out.edges_inside = edges_inside(h, best);
  const SideFilter filter = SideFilter::pair(f, lambda, lambda);
  out.certificate_rectangles = rect_count_all(out.plane, filter).ordered_total;
  out.certificate_energy = energy_count_filtered(out.lifted, filter);
  return out;
}

bool completes_rectangle(const GridSet& s, Point2 p, const SideFilter& filter) {
  const Field& f = s.field();
  const std::uint32_t q = f.q();
  const std::uint32_t n = q * q;
  for (std::uint32_t iz = 0; iz < n; ++iz) {
    if (!s.contains_index(iz)) continue;
    const Point2 z = plane_point(f, iz);
    if (z == p) continue;
    const Point2 d = sub(f, p, z);
    const Elem lam = dot(f, d, d);
    if (lam == f.zero()) continue;
    const Point2 e = perp(f, d);
    for (std::uint32_t k = 1; k < q; ++k) {
      const Elem kk{k};
      const Point2 y = add(f, z, scale(f, kk, e));
      if (!s.contains(y)) continue;
      const Elem beta = f.mul(f.square(kk), lam);
      if (!filter.accepts(lam, beta)) continue;
      if (s.contains(add(f, p, sub(f, y, z)))) return true;
    }
  }
  return false;
}

PairFreeResult pair_free_search(const Field& f, Elem lambda, Elem beta, std::uint64_t seed, std::uint32_t restarts) {
  const SideFilter filter = SideFilter::pair(f, lambda, beta);
  if (restarts == 0) throw Error(ErrorCode::kInvalidParameters, "need at least one restart");
  PairFreeResult out{GridSet(f), lambda, beta};
  out.ratio_is_square = f.is_square(f.div(beta, lambda));
  out.seed = seed;
  out.restarts = restarts;
  const std::uint32_t n = f.q() * f.q();
  const Rng root(seed);
  for (std::uint32_t r = 0; r < restarts; ++r) {
    Rng rng = root.split(r);
    std::vector<std::uint32_t> order(n);
    for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
    for (std::uint32_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    GridSet s(f);
    for (std::uint32_t i : order) {
      const Point2 p = plane_point(f, i);
      if (!completes_rectangle(s, p, filter)) s.insert(p);
    }
    if (s.size() > out.plane.size()) out.plane = std::move(s);
  }
  out.best_size = out.plane.size();
  out.density = static_cast<double>(out.best_size) / n;
  out.certificate_rectangles = rect_count_all(out.plane, filter).ordered_total;
  return out;
}

}  // namespace fqlab
