#pragma once

// Partitions of F_q, conditional expectations on product atoms, the weak
// regularity split S = g + h, and the rectangle counting pipeline built on it.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fqlab/field.hpp"
#include "fqlab/fourier.hpp"
#include "fqlab/geometry.hpp"

namespace fqlab {

// A partition of {0, .., n-1} (canonical element indices) together with the
// sets that generated it. Atoms are kept sorted by their smallest element.
class Partition {
 public:
  static Partition trivial(std::uint32_t n);
  static Partition discrete(std::uint32_t n);
  // Throws kInvalidParameters unless the atoms are nonempty, disjoint and cover.
  static Partition from_atoms(std::uint32_t n, std::vector<std::vector<std::uint32_t>> atoms);

  // Splits every atom into its parts inside and outside `set` (membership
  // vector of length n) and records `set` as a generator.
  Partition refine(const std::vector<std::uint8_t>& set) const;

  std::uint32_t ground_size() const { return static_cast<std::uint32_t>(atom_of_.size()); }
  const std::vector<std::vector<std::uint32_t>>& atoms() const { return atoms_; }
  std::size_t atom_count() const { return atoms_.size(); }
  std::uint32_t atom_of(std::uint32_t x) const { return atom_of_[x]; }
  // Generators as sorted element lists.
  const std::vector<std::vector<std::uint32_t>>& generators() const { return generators_; }
  std::size_t complexity() const { return generators_.size(); }

  friend bool operator==(const Partition& a, const Partition& b) { return a.atoms_ == b.atoms_; }

 private:
  Partition() = default;
  void index_atoms();

  std::vector<std::vector<std::uint32_t>> atoms_;
  std::vector<std::uint32_t> atom_of_;
  std::vector<std::vector<std::uint32_t>> generators_;
};

// |S cap (B_i x C_j)| at index i * |C| + j.
std::vector<std::uint64_t> atom_counts(const GridSet& s, const Partition& b, const Partition& c);

// E(S | B v C): on B_i x C_j the value |S cap (B_i x C_j)| / (|B_i| |C_j|).
GridFunction conditional_expectation(const GridSet& s, const Partition& b, const Partition& c);

struct Witness {
  std::vector<std::uint8_t> u;  // membership over the first coordinate
  std::vector<std::uint8_t> w;  // membership over the second coordinate
  double correlation = 0.0;     // E_{a,c} h(a,c) 1_U(a) 1_W(c)
  // The (b, d) maximizing |E_{a,c} h(a,c) h(a,d) h(b,c)|, and that value.
  std::uint32_t b = 0, d = 0;
  double pair_value = 0.0;
};

// Guarantees |correlation| >= box_norm(h)^4 / 4. For h = 0 returns empty sets.
Witness find_witness(const GridFunction& h);
// Maximum of |E h 1_U 1_W| over all 2^q x 2^q set pairs; only for q <= 12.
Witness find_witness_bruteforce(const GridFunction& h);

struct IterationRecord {
  double box_norm_h = 0.0;
  double correlation = 0.0;
  double energy_before = 0.0;  // E g^2 before refining
  double energy_after = 0.0;
  std::uint64_t u_size = 0, w_size = 0;
  bool increment_ok = false;   // energy_after - energy_before >= correlation^2 - 1e-9
};

struct Decomposition {
  GridFunction g;
  GridFunction h;
  double epsilon = 0.0;
  double box_norm_h = 0.0;
  std::uint64_t iterations = 0;
  std::uint64_t iteration_bound = 0;  // ceil(16 eps^-8)
  Partition b;
  Partition c;
  std::vector<std::uint64_t> counts;  // atom_counts for (b, c)
  std::vector<IterationRecord> trace;
};

// ceil(16 / eps^8), saturating at UINT64_MAX.
std::uint64_t regularity_iteration_bound(double epsilon);

// Throws kInvalidParameters unless 0 < epsilon <= 1.
Decomposition weak_regularity(const GridSet& s, double epsilon);

struct PipelineRow {
  std::string name;
  std::string relation;  // "<=", ">=" or "=="
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct PipelineReport {
  explicit PipelineReport(Decomposition d) : decomposition(std::move(d)) {}

  Decomposition decomposition;
  std::uint64_t set_size = 0;
  std::uint64_t subgroup_order = 0;
  double eps_sigma = 0.0;
  double accumulated_error = 0.0;
  double n_s = 0.0, n_g = 0.0, m_s = 0.0, m_g = 0.0, box_h = 0.0;
  std::vector<PipelineRow> rows;
  // q^4 N(S,S,S,S) |A|^2 / q^2.
  double predicted_count = 0.0;
  // Ordered (a, b, c, d) with a - b, c - d in A and all four corners in S.
  std::uint64_t axis_count = 0;
  // Non-degenerate ordered rectangles in S, any direction, side quadrances in A.
  std::uint64_t geometric_count = 0;
  // (|S|/q^2)^4 minus every verified error term; conclusive when positive.
  double chain_lower_bound = 0.0;
  bool conclusive = false;
  bool pass = false;
};

// Throws kWrongResidue unless q = 3 mod 4 and kInvalidParameters for epsilon
// outside (0, 1].
PipelineReport subgroup_rectangle_pipeline(const GridSet& s, const MultiplicativeSubgroup& a, double epsilon);

}  // namespace fqlab
