#pragma once

// Discrete Fourier analysis on F_q and F_q^2 with the trace character, the
// subgroup measure sigma, the counting forms M and N, and the box norm.
//
//   f^(m) = q^{-n} sum_x chi(-m.x) f(x),     f(x) = sum_m f^(m) chi(m.x).
//
// Grid functions are stored row-major: value(a, c) at index a * q + c, where a
// is the first coordinate.

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "fqlab/field.hpp"
#include "fqlab/geometry.hpp"

namespace fqlab {

class LineFunction {
 public:
  LineFunction(Field field, std::vector<double> values);
  static LineFunction constant(const Field& field, double c);

  const Field& field() const { return field_; }
  double operator()(Elem x) const { return values_[x.value]; }
  std::span<const double> values() const { return values_; }
  double mean() const;

 private:
  Field field_;
  std::vector<double> values_;
};

class GridFunction {
 public:
  // Throws kInvalidParameters if a value leaves [-1, 1] or the size is not q^2.
  GridFunction(Field field, std::vector<double> values);
  static GridFunction constant(const Field& field, double c);
  static GridFunction indicator(const GridSet& s);

  const Field& field() const { return field_; }
  std::uint32_t q() const { return field_.q(); }
  double operator()(std::uint32_t a, std::uint32_t c) const { return values_[a * field_.q() + c]; }
  std::span<const double> values() const { return values_; }
  // Row slice c -> f(a, c).
  std::span<const double> row(std::uint32_t a) const {
    return std::span<const double>(values_).subspan(static_cast<std::size_t>(a) * field_.q(), field_.q());
  }

 private:
  Field field_;
  std::vector<double> values_;
};

struct SpectralFunction {
  Field field;
  int dims = 1;
  std::vector<std::complex<double>> coeffs;  // index m (n = 1) or m1 * q + m2 (n = 2)
};

// n in {1, 2}; values.size() must be q^n. The two-variable transform is
// evaluated one axis at a time.
SpectralFunction dft(const Field& f, std::span<const double> values, int n);
SpectralFunction dft(const Field& f, std::span<const std::complex<double>> values, int n);
std::vector<std::complex<double>> idft(const SpectralFunction& spectrum);
// O(q^{2n}) direct evaluation of the defining sum; reference for dft.
SpectralFunction dft_direct(const Field& f, std::span<const double> values, int n);

// sum_m |f^(m)|^2.
double spectral_energy(const SpectralFunction& s);

struct SigmaMeasure {
  MultiplicativeSubgroup subgroup;
  std::vector<double> values;  // q / |A| on A, 0 elsewhere
  SpectralFunction spectrum;
  double max_offzero = 0.0;      // max_{m != 0} |sigma^(m)|
  double normalized_constant = 0.0;  // max_offzero |A| / q^{1/2}
  bool meets_size_condition = false; // |A| >= q^{2/3}
  double weight() const { return values.empty() ? 0.0 : static_cast<double>(spectrum.field.q()) / subgroup.order(); }
};

SigmaMeasure sigma_profile(const MultiplicativeSubgroup& a);

// M(f1, f2, f3, f4) = E_{a,b,c,d} f1(a,c) f2(a,d) f3(b,c) f4(b,d), in O(q^3).
double form_M(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3, const GridFunction& f4);
// O(q^4) reference.
double form_M_naive(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3,
                    const GridFunction& f4);
// M(f, f, f, f)^{1/4}; round-off below zero is clamped.
double box_norm(const GridFunction& f);

enum class FormMode {
  // The defining quadruple sum.
  kNaive,
  // Restrict (a, b) to the support of sigma(a - b); evaluate the inner (c, d)
  // sum over differences in A, or over the complement of A when smaller.
  kFast,
  // Inner (c, d) sum through sum_m sigma^(m) conj(u^(m)) u'^(m).
  kSpectral,
};

// N = E_{a,b,c,d} f1(a,c) f2(a,d) f3(b,c) f4(b,d) sigma(a - b) sigma(c - d).
double form_N(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3, const GridFunction& f4,
              const SigmaMeasure& sigma, FormMode mode = FormMode::kFast);

struct SpectralGap {
  double weighted = 0.0;          // E_{x,y} f(x) g(y) sigma(x - y)
  double product_of_means = 0.0;  // (E f)(E g)
  double gap = 0.0;               // |weighted - product_of_means|
  double spectral_sum = 0.0;      // |sum_{m != 0} sigma^(m) conj(f^(m)) g^(m)|
  double bound = 0.0;             // max_offzero ||f^||_2 ||g^||_2
  bool pass = false;              // gap <= bound and gap == spectral_sum, within 1e-9
};

SpectralGap vtk_gap(const LineFunction& f, const LineFunction& g, const SigmaMeasure& sigma);

struct VonNeumannRow {
  int j = 0;                  // 1-based index of the isolated function
  double box_power = 0.0;     // M(f_j, f_j, f_j, f_j)
  double n_fourth = 0.0;      // |N|^4
  double half_step = 0.0;     // R: E f_j f_j f' f' sigma over the column pair
  double mean_square = 0.0;   // E_{a,b} |J(a, b)|^2
  double rhs = 0.0;           // M(f_j..) + accumulated error
  bool pass = false;
};

// Both Cauchy-Schwarz steps with each O(q^{1/2}/|A|) term replaced by the
// exactly computed e = 2 eps_A + eps_A^2, eps_A = max_{m != 0} |sigma^(m)|:
//   |N|^2 <= R + e,   R^2 <= E|J|^2 <= M(f_j,..) + e,   so
//   |N|^4 <= M(f_j,..) + 3e + e^2.
struct VonNeumannReport {
  double n_value = 0.0;
  double eps_sigma = 0.0;
  double step_error = 0.0;         // e
  double accumulated_error = 0.0;  // 3e + e^2
  std::array<VonNeumannRow, 4> rows;
  bool pass = false;
  // min_j box_norm(f_j) + accumulated_error^{1/4}.
  double norm_bound = 0.0;
};

VonNeumannReport von_neumann_check(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3,
                                   const GridFunction& f4, const SigmaMeasure& sigma);

// Exact accumulated error term used by von_neumann_check.
double von_neumann_error(double eps_sigma);

}  // namespace fqlab
