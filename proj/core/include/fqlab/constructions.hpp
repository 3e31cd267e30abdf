#pragma once

// Configuration-free sets: random deletion on the paraboloid, independent
// sets of the square hypergraph, and the Spencer independence bound.

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "fqlab/energy.hpp"
#include "fqlab/field.hpp"
#include "fqlab/geometry.hpp"

namespace fqlab {

// std::mt19937_64 seeded through splitmix64 from (seed, stream), so that
// substreams of one seed are independent and reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  Rng split(std::uint64_t stream) const { return Rng(seed_, stream_ * 0x9E3779B97F4A7C15ull + stream + 1); }

  double uniform();  // [0, 1)
  bool bernoulli(double p);
  std::uint64_t below(std::uint64_t n);  // uniform in [0, n)
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Uniform subset of F_q^2 with exactly `size` points (partial Fisher-Yates).
GridSet random_grid_subset(const Field& f, std::uint64_t size, Rng& rng);

// ceil((1 - 1/k) r) with r = floor((n^k / (k m))^{1/(k-1)}), in exact integer
// arithmetic. Throws kTooFewEdges when m < n / k and kInvalidParameters for k < 2.
std::uint64_t spencer_bound(std::uint64_t k, std::uint64_t n, std::uint64_t m);
// The integer r above.
std::uint64_t spencer_root(std::uint64_t k, std::uint64_t n, std::uint64_t m);

struct EnergyFreeResult {
  ParaboloidSet set;
  std::uint64_t seed = 0;       // requested seed
  std::uint64_t seed_used = 0;  // seed of the accepted attempt
  std::uint32_t attempts = 0;
  std::uint64_t sampled = 0;
  std::uint64_t deleted = 0;
  std::uint64_t nontrivial_tuples = 0;  // in the sample, before deletion
  double target_size = 0.0;             // q / 8
  std::uint64_t achieved_size = 0;
  // Recount of E+_nt on the result by the O(|X|^4) oracle.
  std::uint64_t certificate_nontrivial = 0;
};

// Keeps each point of the paraboloid with probability 1/(2q), then deletes the
// smallest point of every non-trivial energy tuple still intact, tuples taken
// in sorted order. Retries with seed + 1, .. while the result has fewer than
// q/8 points; throws kConstructionFailed after 32 attempts.
EnergyFreeResult random_energy_free(const Field& f, std::uint64_t seed);

struct HypergraphInstance {
  std::uint32_t k = 4;
  std::uint64_t n = 0;
  std::vector<std::array<std::uint32_t, 4>> edges;  // sorted vertex indices, sorted list
  std::uint64_t m() const { return edges.size(); }
};

// Vertices are plane indices x * q + y; edges are the squares of side
// quadrance lambda. Throws kZeroSide.
HypergraphInstance square_hypergraph(const Field& f, Elem lambda);

// The four vertices lie on the circle of quadrance radius lambda / 2 about the centre.
bool square_on_circle(const Field& f, const Square& square, Elem lambda);

// Number of edges with all four vertices in the membership vector.
std::uint64_t edges_inside(const HypergraphInstance& h, const std::vector<std::uint8_t>& member);

struct SquareFreeResult {
  GridSet plane;
  ParaboloidSet lifted;
  Elem lambda;
  std::uint64_t seed = 0;
  std::uint32_t attempts = 0;
  std::uint32_t best_attempt = 0;
  double probability = 0.0;
  std::uint64_t edges = 0;
  std::uint64_t spencer = 0;
  std::uint64_t achieved_size = 0;
  std::uint64_t edges_inside = 0;           // recheck against the hypergraph
  std::uint64_t certificate_rectangles = 0; // (lambda, lambda) rectangles in the plane set
  std::uint64_t certificate_energy = 0;     // (lambda, lambda) energy tuples in the lift
};

// Probabilistic deletion on square_hypergraph(f, lambda), best of `attempts`
// substreams of `seed`.
SquareFreeResult square_free_independent_set(const Field& f, Elem lambda, std::uint64_t seed,
                                             std::uint32_t attempts = 8);

// True when adding p to s would complete a rectangle whose sides pass the
// filter, p being one of its vertices. Only non-degenerate rectangles count.
bool completes_rectangle(const GridSet& s, Point2 p, const SideFilter& filter);

struct PairFreeResult {
  GridSet plane;
  Elem lambda, beta;
  bool ratio_is_square = false;  // beta / lambda a square: (lambda, beta) rectangles exist
  std::uint64_t seed = 0;
  std::uint32_t restarts = 0;
  std::uint64_t best_size = 0;
  double density = 0.0;                     // best_size / q^2
  std::uint64_t certificate_rectangles = 0; // rect_count_all with the pair filter
};

// Randomized greedy insertion in shuffled order, best of `restarts` runs.
PairFreeResult pair_free_search(const Field& f, Elem lambda, Elem beta, std::uint64_t seed,
                                std::uint32_t restarts = 4);

}  // namespace fqlab
