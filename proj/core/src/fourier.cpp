#include "fqlab/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fqlab/error.hpp"

namespace fqlab {
namespace {

constexpr double kRangeSlack = 1e-12;

// W[m * q + x] = chi(sign * m * x).
std::vector<std::complex<double>> character_matrix(const Field& f, bool negate) {
  const std::uint32_t q = f.q();
  std::vector<std::complex<double>> w(static_cast<std::size_t>(q) * q);
  for (std::uint32_t m = 0; m < q; ++m) {
    for (std::uint32_t x = 0; x < q; ++x) {
      Elem e = f.mul(Elem{m}, Elem{x});
      if (negate) e = f.neg(e);
      w[static_cast<std::size_t>(m) * q + x] = f.chi(e);
    }
  }
  return w;
}

std::vector<std::complex<double>> transform(const Field& f, std::span<const std::complex<double>> values, int n,
                                            bool inverse) {
  const std::uint32_t q = f.q();
  const auto w = character_matrix(f, !inverse);
  const double norm = inverse ? 1.0 : 1.0 / q;
  if (n == 1) {
    std::vector<std::complex<double>> out(q);
    for (std::uint32_t m = 0; m < q; ++m) {
      std::complex<double> acc = 0.0;
      for (std::uint32_t x = 0; x < q; ++x) acc += w[m * q + x] * values[x];
      out[m] = acc * norm;
    }
    return out;
  }
  // chi(-(m1 x1 + m2 x2)) = chi(-m1 x1) chi(-m2 x2): second axis, then first.
  std::vector<std::complex<double>> partial(static_cast<std::size_t>(q) * q);
  for (std::uint32_t x1 = 0; x1 < q; ++x1) {
    for (std::uint32_t m2 = 0; m2 < q; ++m2) {
      std::complex<double> acc = 0.0;
      for (std::uint32_t x2 = 0; x2 < q; ++x2) acc += w[m2 * q + x2] * values[x1 * q + x2];
      partial[x1 * q + m2] = acc * norm;
    }
  }
  std::vector<std::complex<double>> out(static_cast<std::size_t>(q) * q);
  for (std::uint32_t m1 = 0; m1 < q; ++m1) {
    for (std::uint32_t m2 = 0; m2 < q; ++m2) {
      std::complex<double> acc = 0.0;
      for (std::uint32_t x1 = 0; x1 < q; ++x1) acc += w[m1 * q + x1] * partial[x1 * q + m2];
      out[m1 * q + m2] = acc * norm;
    }
  }
  return out;
}

void check_dims(const Field& f, std::size_t size, int n) {
  const std::size_t q = f.q();
  if ((n != 1 && n != 2) || size != (n == 1 ? q : q * q)) {
    throw Error(ErrorCode::kInvalidParameters, "transform needs n in {1,2} and q^n values");
  }
}

void check_same_field(const GridFunction& a, const GridFunction& b) {
  if (!(a.field() == b.field())) throw Error(ErrorCode::kFieldMismatch, "grid functions over different fields");
}

// E_{c,d} u(c) u'(d) sigma(s (c - d)) with s = -1 when reflected, through the
// support of sigma or its complement, whichever is smaller.
class PairKernel {
 public:
  PairKernel(const SigmaMeasure& sigma, bool reflect) : q_(sigma.spectrum.field.q()), weight_(sigma.weight()) {
    const Field& f = sigma.spectrum.field;
    std::vector<std::uint32_t> in, out;
    for (std::uint32_t x = 0; x < q_; ++x) {
      (sigma.subgroup.contains(Elem{x}) ? in : out).push_back(x);
    }
    use_complement_ = out.size() < in.size();
    // Store s * beta so that d = c - s * beta.
    for (std::uint32_t beta : use_complement_ ? out : in) {
      shifts_.push_back(reflect ? f.neg(Elem{beta}).value : beta);
    }
    // sub_[c * k + i] = c - shifts_[i].
    sub_.resize(static_cast<std::size_t>(q_) * shifts_.size());
    for (std::uint32_t c = 0; c < q_; ++c) {
      for (std::size_t i = 0; i < shifts_.size(); ++i) {
        sub_[c * shifts_.size() + i] = f.sub(Elem{c}, Elem{shifts_[i]}).value;
      }
    }
  }

  // Unnormalized sum_{c - d in sA} u(c) u'(d).
  double support_sum(const double* u, const double* v) const {
    const std::size_t k = shifts_.size();
    double total = 0.0;
    for (std::uint32_t c = 0; c < q_; ++c) {
      if (u[c] == 0.0) continue;
      double inner = 0.0;
      const std::uint32_t* row = &sub_[c * k];
      for (std::size_t i = 0; i < k; ++i) inner += v[row[i]];
      total += u[c] * inner;
    }
    if (!use_complement_) return total;
    const double su = std::accumulate(u, u + q_, 0.0);
    const double sv = std::accumulate(v, v + q_, 0.0);
    return su * sv - total;
  }

  // E_{c,d} u(c) u'(d) sigma(s (c - d)).
  double mean(const double* u, const double* v) const {
    return support_sum(u, v) * weight_ / (static_cast<double>(q_) * q_);
  }

 private:
  std::uint32_t q_;
  double weight_;
  bool use_complement_ = false;
  std::vector<std::uint32_t> shifts_;
  std::vector<std::uint32_t> sub_;
};

struct Quad {
  const GridFunction* f[4];
};

double form_N_naive(const Quad& fs, const SigmaMeasure& sigma) {
  const Field& f = fs.f[0]->field();
  const std::uint32_t q = f.q();
  const auto& sig = sigma.values;
  double total = 0.0;
  for (std::uint32_t a = 0; a < q; ++a) {
    for (std::uint32_t b = 0; b < q; ++b) {
      const double sab = sig[f.sub(Elem{a}, Elem{b}).value];
      double inner = 0.0;
      for (std::uint32_t c = 0; c < q; ++c) {
        const double x = (*fs.f[0])(a, c) * (*fs.f[2])(b, c);
        for (std::uint32_t d = 0; d < q; ++d) {
          inner += x * (*fs.f[1])(a, d) * (*fs.f[3])(b, d) * sab * sig[f.sub(Elem{c}, Elem{d}).value];
        }
      }
      total += inner;
    }
  }
  const double q2 = static_cast<double>(q) * q;
  return total / (q2 * q2);
}

double form_N_fast(const Quad& fs, const SigmaMeasure& sigma) {
  const Field& f = fs.f[0]->field();
  const std::uint32_t q = f.q();
  const PairKernel kernel(sigma, false);
  std::vector<double> u(q), v(q);
  double total = 0.0;
  for (std::uint32_t a = 0; a < q; ++a) {
    const auto r1 = fs.f[0]->row(a), r2 = fs.f[1]->row(a);
    for (Elem alpha : sigma.subgroup.elements()) {
      const std::uint32_t b = f.sub(Elem{a}, alpha).value;
      const auto r3 = fs.f[2]->row(b), r4 = fs.f[3]->row(b);
      for (std::uint32_t c = 0; c < q; ++c) {
        u[c] = r1[c] * r3[c];
        v[c] = r2[c] * r4[c];
      }
      total += kernel.support_sum(u.data(), v.data());
    }
  }
  const double w = sigma.weight();
  const double q2 = static_cast<double>(q) * q;
  return total * w * w / (q2 * q2);
}

double form_N_spectral(const Quad& fs, const SigmaMeasure& sigma) {
  const Field& f = fs.f[0]->field();
  const std::uint32_t q = f.q();
  const auto w = character_matrix(f, true);
  const auto& sh = sigma.spectrum.coeffs;
  std::vector<std::complex<double>> uh(q), vh(q);
  double total = 0.0;
  for (std::uint32_t a = 0; a < q; ++a) {
    const auto r1 = fs.f[0]->row(a), r2 = fs.f[1]->row(a);
    for (Elem alpha : sigma.subgroup.elements()) {
      const std::uint32_t b = f.sub(Elem{a}, alpha).value;
      const auto r3 = fs.f[2]->row(b), r4 = fs.f[3]->row(b);
      for (std::uint32_t m = 0; m < q; ++m) {
        std::complex<double> su = 0.0, sv = 0.0;
        for (std::uint32_t c = 0; c < q; ++c) {
          su += w[m * q + c] * (r1[c] * r3[c]);
          sv += w[m * q + c] * (r2[c] * r4[c]);
        }
        uh[m] = su / static_cast<double>(q);
        vh[m] = sv / static_cast<double>(q);
      }
      std::complex<double> inner = 0.0;
      for (std::uint32_t m = 0; m < q; ++m) inner += sh[m] * std::conj(uh[m]) * vh[m];
      total += inner.real();
    }
  }
  // E_{a,b} sigma(a - b) (.) with sigma = q/|A| on the visited pairs.
  return total * sigma.weight() / (static_cast<double>(q) * q);
}

}  // namespace

LineFunction::LineFunction(Field field, std::vector<double> values)
    : field_(std::move(field)), values_(std::move(values)) {
  if (values_.size() != field_.q()) throw Error(ErrorCode::kInvalidParameters, "line function needs q values");
  for (double v : values_) {
    if (!(std::abs(v) <= 1.0 + kRangeSlack)) throw Error(ErrorCode::kInvalidParameters, "value outside [-1, 1]");
  }
}

LineFunction LineFunction::constant(const Field& field, double c) {
  return LineFunction(field, std::vector<double>(field.q(), c));
}

double LineFunction::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

GridFunction::GridFunction(Field field, std::vector<double> values)
    : field_(std::move(field)), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(field_.q()) * field_.q()) {
    throw Error(ErrorCode::kInvalidParameters, "grid function needs q^2 values");
  }
  for (double v : values_) {
    if (!(std::abs(v) <= 1.0 + kRangeSlack)) throw Error(ErrorCode::kInvalidParameters, "value outside [-1, 1]");
  }
}

GridFunction GridFunction::constant(const Field& field, double c) {
  return GridFunction(field, std::vector<double>(static_cast<std::size_t>(field.q()) * field.q(), c));
}

GridFunction GridFunction::indicator(const GridSet& s) {
  std::vector<double> v(s.membership().begin(), s.membership().end());
  return GridFunction(s.field(), std::move(v));
}

SpectralFunction dft(const Field& f, std::span<const double> values, int n) {
  check_dims(f, values.size(), n);
  std::vector<std::complex<double>> c(values.begin(), values.end());
  return {f, n, transform(f, c, n, false)};
}

SpectralFunction dft(const Field& f, std::span<const std::complex<double>> values, int n) {
  check_dims(f, values.size(), n);
  return {f, n, transform(f, values, n, false)};
}

std::vector<std::complex<double>> idft(const SpectralFunction& spectrum) {
  check_dims(spectrum.field, spectrum.coeffs.size(), spectrum.dims);
  return transform(spectrum.field, spectrum.coeffs, spectrum.dims, true);
}

SpectralFunction dft_direct(const Field& f, std::span<const double> values, int n) {
  check_dims(f, values.size(), n);
  const std::uint32_t q = f.q();
  const std::size_t size = values.size();
  std::vector<std::complex<double>> out(size);
  for (std::size_t m = 0; m < size; ++m) {
    std::complex<double> acc = 0.0;
    for (std::size_t x = 0; x < size; ++x) {
      Elem phase;
      if (n == 1) {
        phase = f.mul(Elem{static_cast<std::uint32_t>(m)}, Elem{static_cast<std::uint32_t>(x)});
      } else {
        const Point2 mm = plane_point(f, static_cast<std::uint32_t>(m));
        const Point2 xx = plane_point(f, static_cast<std::uint32_t>(x));
        phase = dot(f, mm, xx);
      }
      acc += f.chi(f.neg(phase)) * values[x];
    }
    out[m] = acc / static_cast<double>(n == 1 ? q : static_cast<std::size_t>(q) * q);
  }
  return {f, n, std::move(out)};
}

double spectral_energy(const SpectralFunction& s) {
  double total = 0.0;
  for (const auto& c : s.coeffs) total += std::norm(c);
  return total;
}

SigmaMeasure sigma_profile(const MultiplicativeSubgroup& a) {
  const Field& f = a.field();
  const std::uint32_t q = f.q();
  std::vector<double> values(q, 0.0);
  const double weight = static_cast<double>(q) / static_cast<double>(a.order());
  for (Elem x : a.elements()) values[x.value] = weight;
  SpectralFunction spectrum = dft(f, values, 1);
  double max_offzero = 0.0;
  for (std::uint32_t m = 1; m < q; ++m) max_offzero = std::max(max_offzero, std::abs(spectrum.coeffs[m]));
  const std::uint64_t d = a.order();
  SigmaMeasure out{a, std::move(values), std::move(spectrum), max_offzero,
                   max_offzero * static_cast<double>(d) / std::sqrt(static_cast<double>(q)),
                   d * d * d >= static_cast<std::uint64_t>(q) * q};
  return out;
}

double form_M(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3, const GridFunction& f4) {
  check_same_field(f1, f2);
  check_same_field(f1, f3);
  check_same_field(f1, f4);
  const std::uint32_t q = f1.q();
  double total = 0.0;
  for (std::uint32_t a = 0; a < q; ++a) {
    const auto r1 = f1.row(a), r2 = f2.row(a);
    for (std::uint32_t b = 0; b < q; ++b) {
      const auto r3 = f3.row(b), r4 = f4.row(b);
      double left = 0.0, right = 0.0;
      for (std::uint32_t c = 0; c < q; ++c) {
        left += r1[c] * r3[c];
        right += r2[c] * r4[c];
      }
      total += left * right;
    }
  }
  const double q2 = static_cast<double>(q) * q;
  return total / (q2 * q2);
}

double form_M_naive(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3,
                    const GridFunction& f4) {
  const std::uint32_t q = f1.q();
  double total = 0.0;
  for (std::uint32_t a = 0; a < q; ++a)
    for (std::uint32_t b = 0; b < q; ++b)
      for (std::uint32_t c = 0; c < q; ++c)
        for (std::uint32_t d = 0; d < q; ++d) total += f1(a, c) * f2(a, d) * f3(b, c) * f4(b, d);
  const double q2 = static_cast<double>(q) * q;
  return total / (q2 * q2);
}

double box_norm(const GridFunction& f) { return std::pow(std::max(0.0, form_M(f, f, f, f)), 0.25); }

double form_N(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3, const GridFunction& f4,
              const SigmaMeasure& sigma, FormMode mode) {
  check_same_field(f1, f2);
  check_same_field(f1, f3);
  check_same_field(f1, f4);
  if (!(f1.field() == sigma.spectrum.field)) throw Error(ErrorCode::kFieldMismatch, "sigma over another field");
  const Quad fs{{&f1, &f2, &f3, &f4}};
  switch (mode) {
    case FormMode::kNaive: return form_N_naive(fs, sigma);
    case FormMode::kFast: return form_N_fast(fs, sigma);
    case FormMode::kSpectral: return form_N_spectral(fs, sigma);
  }
  return 0.0;
}

SpectralGap vtk_gap(const LineFunction& f, const LineFunction& g, const SigmaMeasure& sigma) {
  const Field& field = f.field();
  const std::uint32_t q = field.q();
  SpectralGap out;
  double weighted = 0.0;
  for (std::uint32_t x = 0; x < q; ++x) {
    for (std::uint32_t y = 0; y < q; ++y) {
      weighted += f(Elem{x}) * g(Elem{y}) * sigma.values[field.sub(Elem{x}, Elem{y}).value];
    }
  }
  out.weighted = weighted / (static_cast<double>(q) * q);
  out.product_of_means = f.mean() * g.mean();
  out.gap = std::abs(out.weighted - out.product_of_means);

  const SpectralFunction fh = dft(field, f.values(), 1);
  const SpectralFunction gh = dft(field, g.values(), 1);
  std::complex<double> sum = 0.0;
  for (std::uint32_t m = 1; m < q; ++m) sum += sigma.spectrum.coeffs[m] * std::conj(fh.coeffs[m]) * gh.coeffs[m];
  out.spectral_sum = std::abs(sum);
  out.bound = sigma.max_offzero * std::sqrt(spectral_energy(fh)) * std::sqrt(spectral_energy(gh));
  out.pass = out.gap <= out.bound + kCharacterTolerance &&
             std::abs(out.gap - out.spectral_sum) <= kCharacterTolerance;
  return out;
}

double von_neumann_error(double eps_sigma) {
  const double e = 2.0 * eps_sigma + eps_sigma * eps_sigma;
  return 3.0 * e + e * e;
}

VonNeumannReport von_neumann_check(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3,
                                   const GridFunction& f4, const SigmaMeasure& sigma) {
  const std::uint32_t q = f1.q();
  VonNeumannReport report;
  report.n_value = form_N(f1, f2, f3, f4, sigma, FormMode::kFast);
  report.eps_sigma = sigma.max_offzero;
  report.step_error = 2.0 * report.eps_sigma + report.eps_sigma * report.eps_sigma;
  report.accumulated_error = von_neumann_error(report.eps_sigma);
  const double e = report.step_error;
  const double n2 = report.n_value * report.n_value;

  // Isolating f_j: swapping c <-> d maps (f1,f2,f3,f4) to (f2,f1,f4,f3) and
  // reflects sigma(c - d); swapping a <-> b maps it to (f3,f4,f1,f2).
  const GridFunction* fs[4] = {&f1, &f2, &f3, &f4};
  constexpr int kPrimary[4] = {0, 1, 2, 3};
  constexpr int kPartner[4] = {1, 0, 3, 2};
  constexpr bool kReflect[4] = {false, true, false, true};

  report.pass = true;
  double min_box = 1.0;
  std::vector<double> u(q), v(q);
  for (int j = 0; j < 4; ++j) {
    const GridFunction& g1 = *fs[kPrimary[j]];
    const GridFunction& g2 = *fs[kPartner[j]];
    const PairKernel kernel(sigma, kReflect[j]);
    double sum_j = 0.0, sum_j2 = 0.0;
    for (std::uint32_t a = 0; a < q; ++a) {
      for (std::uint32_t b = 0; b < q; ++b) {
        for (std::uint32_t c = 0; c < q; ++c) {
          u[c] = g1(a, c) * g1(b, c);
          v[c] = g2(a, c) * g2(b, c);
        }
        const double jab = kernel.mean(u.data(), v.data());
        sum_j += jab;
        sum_j2 += jab * jab;
      }
    }
    VonNeumannRow& row = report.rows[j];
    row.j = j + 1;
    row.box_power = std::max(0.0, form_M(g1, g1, g1, g1));
    row.half_step = sum_j / (static_cast<double>(q) * q);
    row.mean_square = sum_j2 / (static_cast<double>(q) * q);
    row.n_fourth = n2 * n2;
    row.rhs = row.box_power + report.accumulated_error;
    const double tol = kCharacterTolerance;
    row.pass = n2 <= row.half_step + e + tol && row.half_step * row.half_step <= row.mean_square + tol &&
               row.mean_square <= row.box_power + e + tol && row.n_fourth <= row.rhs + tol;
    report.pass = report.pass && row.pass;
    min_box = std::min(min_box, std::pow(row.box_power, 0.25));
  }
  report.norm_bound = min_box + std::pow(report.accumulated_error, 0.25);
  return report;
}

}  // namespace fqlab
