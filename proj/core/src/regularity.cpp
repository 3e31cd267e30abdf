#include "fqlab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fqlab/energy.hpp"
#include "fqlab/error.hpp"

namespace fqlab {
namespace {

constexpr double kTol = 1e-9;

std::vector<double> expectation_values(const Partition& b, const Partition& c,
                                       const std::vector<std::uint64_t>& counts) {
  const std::uint32_t q = b.ground_size();
  std::vector<double> values(static_cast<std::size_t>(q) * q);
  const std::size_t nc = c.atom_count();
  for (std::uint32_t a = 0; a < q; ++a) {
    const std::uint32_t i = b.atom_of(a);
    const double bi = static_cast<double>(b.atoms()[i].size());
    for (std::uint32_t x = 0; x < q; ++x) {
      const std::uint32_t j = c.atom_of(x);
      values[a * q + x] = static_cast<double>(counts[i * nc + j]) / (bi * static_cast<double>(c.atoms()[j].size()));
    }
  }
  return values;
}

// E g^2 straight from the atom counts.
double expectation_energy(const Partition& b, const Partition& c, const std::vector<std::uint64_t>& counts) {
  const double q = b.ground_size();
  const std::size_t nc = c.atom_count();
  double total = 0.0;
  for (std::size_t i = 0; i < b.atom_count(); ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      const double n = static_cast<double>(counts[i * nc + j]);
      total += n * n / (static_cast<double>(b.atoms()[i].size()) * static_cast<double>(c.atoms()[j].size()));
    }
  }
  return total / (q * q);
}

double set_correlation(const GridFunction& h, const std::vector<std::uint8_t>& u, const std::vector<std::uint8_t>& w) {
  const std::uint32_t q = h.q();
  double total = 0.0;
  for (std::uint32_t a = 0; a < q; ++a) {
    if (!u[a]) continue;
    const auto row = h.row(a);
    for (std::uint32_t c = 0; c < q; ++c) {
      if (w[c]) total += row[c];
    }
  }
  return total / (static_cast<double>(q) * q);
}

// The sign set {r > 0} or {r < 0} with the larger |sum of r|.
std::vector<std::uint8_t> best_sign_set(const std::vector<double>& r) {
  double pos = 0.0, neg = 0.0;
  for (double x : r) (x > 0 ? pos : neg) += x;
  const bool take_pos = pos >= -neg;
  std::vector<std::uint8_t> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = take_pos ? r[i] > 0 : r[i] < 0;
  return out;
}

// r(a) = sum_c h(a,c) wt(c), or the transposed sum.
std::vector<double> apply(const GridFunction& h, const std::vector<double>& wt, bool transpose) {
  const std::uint32_t q = h.q();
  std::vector<double> r(q, 0.0);
  for (std::uint32_t a = 0; a < q; ++a) {
    for (std::uint32_t c = 0; c < q; ++c) {
      if (transpose) {
        r[c] += h(a, c) * wt[a];
      } else {
        r[a] += h(a, c) * wt[c];
      }
    }
  }
  return r;
}

std::vector<double> as_weights(const std::vector<std::uint8_t>& set) { return {set.begin(), set.end()}; }

std::vector<double> positive_part(std::span<const double> v, double sign) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, sign * v[i]);
  return out;
}

bool within(double value, double bound, const std::string& relation) {
  if (relation == "<=") return value <= bound + kTol;
  if (relation == ">=") return value + kTol >= bound;
  return std::abs(value - bound) <= kTol * std::max(1.0, std::abs(bound));
}

}  // namespace

Partition Partition::trivial(std::uint32_t n) {
  Partition p;
  std::vector<std::uint32_t> all(n);
  for (std::uint32_t x = 0; x < n; ++x) all[x] = x;
  if (n > 0) p.atoms_.push_back(std::move(all));
  p.atom_of_.resize(n);
  p.index_atoms();
  return p;
}

Partition Partition::discrete(std::uint32_t n) {
  Partition p;
  for (std::uint32_t x = 0; x < n; ++x) p.atoms_.push_back({x});
  p.atom_of_.resize(n);
  p.index_atoms();
  return p;
}

Partition Partition::from_atoms(std::uint32_t n, std::vector<std::vector<std::uint32_t>> atoms) {
  std::vector<std::uint8_t> seen(n, 0);
  for (auto& atom : atoms) {
    if (atom.empty()) throw Error(ErrorCode::kInvalidParameters, "empty atom");
    std::sort(atom.begin(), atom.end());
    for (std::uint32_t x : atom) {
      if (x >= n || seen[x]) throw Error(ErrorCode::kInvalidParameters, "atoms overlap or leave the ground set");
      seen[x] = 1;
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw Error(ErrorCode::kInvalidParameters, "atoms do not cover the ground set");
  }
  std::sort(atoms.begin(), atoms.end());
  Partition p;
  p.atoms_ = std::move(atoms);
  p.atom_of_.resize(n);
  p.index_atoms();
  return p;
}

void Partition::index_atoms() {
  for (std::uint32_t i = 0; i < atoms_.size(); ++i) {
    for (std::uint32_t x : atoms_[i]) atom_of_[x] = i;
  }
}

Partition Partition::refine(const std::vector<std::uint8_t>& set) const {
  if (set.size() != atom_of_.size()) throw Error(ErrorCode::kInvalidParameters, "refining set has the wrong size");
  Partition p;
  for (const auto& atom : atoms_) {
    std::vector<std::uint32_t> in, out;
    for (std::uint32_t x : atom) (set[x] ? in : out).push_back(x);
    if (!in.empty()) p.atoms_.push_back(std::move(in));
    if (!out.empty()) p.atoms_.push_back(std::move(out));
  }
  std::sort(p.atoms_.begin(), p.atoms_.end());
  p.atom_of_.resize(atom_of_.size());
  p.index_atoms();
  p.generators_ = generators_;
  std::vector<std::uint32_t> gen;
  for (std::uint32_t x = 0; x < set.size(); ++x) {
    if (set[x]) gen.push_back(x);
  }
  p.generators_.push_back(std::move(gen));
  return p;
}

std::vector<std::uint64_t> atom_counts(const GridSet& s, const Partition& b, const Partition& c) {
  const std::uint32_t q = s.field().q();
  if (b.ground_size() != q || c.ground_size() != q) {
    throw Error(ErrorCode::kInvalidParameters, "partitions must be of F_q");
  }
  const std::size_t nc = c.atom_count();
  std::vector<std::uint64_t> counts(b.atom_count() * nc, 0);
  for (std::uint32_t a = 0; a < q; ++a) {
    for (std::uint32_t x = 0; x < q; ++x) {
      if (s.contains_index(a * q + x)) ++counts[b.atom_of(a) * nc + c.atom_of(x)];
    }
  }
  return counts;
}

GridFunction conditional_expectation(const GridSet& s, const Partition& b, const Partition& c) {
  return GridFunction(s.field(), expectation_values(b, c, atom_counts(s, b, c)));
}

Witness find_witness(const GridFunction& h) {
  const std::uint32_t q = h.q();
  Witness out;
  out.u.assign(q, 0);
  out.w.assign(q, 0);
  const auto hv = h.values();
  if (std::all_of(hv.begin(), hv.end(), [](double x) { return x == 0.0; })) return out;

  // K = H H^T, Phi = K^T H / q^2, so Phi(b,d) = E_{a,c} h(a,c) h(a,d) h(b,c).
  std::vector<double> k(static_cast<std::size_t>(q) * q, 0.0);
  for (std::uint32_t a = 0; a < q; ++a) {
    for (std::uint32_t b = 0; b <= a; ++b) {
      double acc = 0.0;
      for (std::uint32_t c = 0; c < q; ++c) acc += hv[a * q + c] * hv[b * q + c];
      k[a * q + b] = k[b * q + a] = acc;
    }
  }
  const double norm = 1.0 / (static_cast<double>(q) * q);
  double best = -1.0;
  for (std::uint32_t b = 0; b < q; ++b) {
    for (std::uint32_t d = 0; d < q; ++d) {
      double acc = 0.0;
      for (std::uint32_t a = 0; a < q; ++a) acc += k[a * q + b] * hv[a * q + d];
      acc *= norm;
      if (std::abs(acc) > best) {
        best = std::abs(acc);
        out.b = b;
        out.d = d;
        out.pair_value = acc;
      }
    }
  }

  std::vector<double> u(q), w(q);
  for (std::uint32_t a = 0; a < q; ++a) u[a] = h(a, out.d);
  for (std::uint32_t c = 0; c < q; ++c) w[c] = h(out.b, c);

  // Plain sign sets, then two-step roundings. The roundings alone already
  // reach |pair_value| / 4: one of the four sign parts of (u, w) carries a
  // quarter of the bilinear form, and rounding one side at a time never loses.
  std::vector<std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>> candidates;
  auto sign_set = [q](const std::vector<double>& v, double sign) {
    std::vector<std::uint8_t> out(q);
    for (std::uint32_t i = 0; i < q; ++i) out[i] = sign * v[i] > 0;
    return out;
  };
  for (double su : {1.0, -1.0}) {
    for (double sw : {1.0, -1.0}) candidates.emplace_back(sign_set(u, su), sign_set(w, sw));
  }
  for (double sign : {1.0, -1.0}) {
    auto uu = best_sign_set(apply(h, positive_part(w, sign), false));
    auto ww = best_sign_set(apply(h, as_weights(uu), true));
    candidates.emplace_back(std::move(uu), std::move(ww));
  }
  for (double sign : {1.0, -1.0}) {
    auto ww = best_sign_set(apply(h, positive_part(u, sign), true));
    auto uu = best_sign_set(apply(h, as_weights(ww), false));
    candidates.emplace_back(std::move(uu), std::move(ww));
  }

  double best_corr = -1.0;
  for (auto& [cu, cw] : candidates) {
    const double corr = set_correlation(h, cu, cw);
    if (std::abs(corr) > best_corr) {
      best_corr = std::abs(corr);
      out.u = cu;
      out.w = cw;
      out.correlation = corr;
    }
  }
  return out;
}

Witness find_witness_bruteforce(const GridFunction& h) {
  const std::uint32_t q = h.q();
  if (q > 12) throw Error(ErrorCode::kInvalidParameters, "brute-force witness search needs q <= 12");
  Witness out;
  out.u.assign(q, 0);
  out.w.assign(q, 0);
  double best = 0.0;
  std::vector<std::uint8_t> u(q), w(q);
  for (std::uint32_t mu = 0; mu < (1u << q); ++mu) {
    for (std::uint32_t i = 0; i < q; ++i) u[i] = (mu >> i) & 1;
    for (std::uint32_t mw = 0; mw < (1u << q); ++mw) {
      for (std::uint32_t i = 0; i < q; ++i) w[i] = (mw >> i) & 1;
      const double corr = set_correlation(h, u, w);
      if (std::abs(corr) > best) {
        best = std::abs(corr);
        out.u = u;
        out.w = w;
        out.correlation = corr;
      }
    }
  }
  return out;
}

std::uint64_t regularity_iteration_bound(double epsilon) {
  const double bound = std::ceil(16.0 / std::pow(epsilon, 8));
  if (!(bound < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(bound);
}

Decomposition weak_regularity(const GridSet& s, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error(ErrorCode::kInvalidParameters, "epsilon must lie in (0, 1]");
  const Field& f = s.field();
  const std::uint32_t q = f.q();
  const auto& member = s.membership();

  Partition b = Partition::trivial(q), c = Partition::trivial(q);
  std::vector<std::uint64_t> counts = atom_counts(s, b, c);
  std::vector<IterationRecord> trace;
  const std::uint64_t bound = regularity_iteration_bound(epsilon);

  auto split = [&](const std::vector<std::uint64_t>& cnt) {
    std::vector<double> g = expectation_values(b, c, cnt);
    std::vector<double> h(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) h[i] = static_cast<double>(member[i]) - g[i];
    return std::pair{GridFunction(f, std::move(g)), GridFunction(f, std::move(h))};
  };

  auto [g, h] = split(counts);
  double box = box_norm(h);
  while (box > epsilon && trace.size() < bound) {
    const Witness wit = find_witness(h);
    IterationRecord rec;
    rec.box_norm_h = box;
    rec.correlation = wit.correlation;
    rec.energy_before = expectation_energy(b, c, counts);
    rec.u_size = std::count(wit.u.begin(), wit.u.end(), 1);
    rec.w_size = std::count(wit.w.begin(), wit.w.end(), 1);
    b = b.refine(wit.u);
    c = c.refine(wit.w);
    counts = atom_counts(s, b, c);
    rec.energy_after = expectation_energy(b, c, counts);
    rec.increment_ok = rec.energy_after - rec.energy_before >= wit.correlation * wit.correlation - kTol;
    trace.push_back(rec);
    std::tie(g, h) = split(counts);
    box = box_norm(h);
  }

  return Decomposition{std::move(g), std::move(h), epsilon, box, trace.size(), bound,
                       std::move(b), std::move(c), std::move(counts), std::move(trace)};
}

PipelineReport subgroup_rectangle_pipeline(const GridSet& s, const MultiplicativeSubgroup& a, double epsilon) {
  const Field& f = s.field();
  if (!f.supported_regime()) throw Error(ErrorCode::kWrongResidue, "rectangle pipeline needs q = 3 mod 4");
  if (!(a.field() == f)) throw Error(ErrorCode::kFieldMismatch, "subgroup over another field");
  const std::uint32_t q = f.q();
  const double qd = q;

  PipelineReport rep(weak_regularity(s, epsilon));
  const Decomposition& dec = rep.decomposition;
  const SigmaMeasure sigma = sigma_profile(a);
  const GridFunction sf = GridFunction::indicator(s);
  rep.set_size = s.size();
  rep.subgroup_order = a.order();
  rep.eps_sigma = sigma.max_offzero;
  rep.accumulated_error = von_neumann_error(sigma.max_offzero);
  rep.box_h = dec.box_norm_h;
  rep.n_s = form_N(sf, sf, sf, sf, sigma);
  rep.n_g = form_N(dec.g, dec.g, dec.g, dec.g, sigma);
  rep.m_s = form_M(sf, sf, sf, sf);
  rep.m_g = form_M(dec.g, dec.g, dec.g, dec.g);

  auto add_row = [&rep](std::string name, std::string relation, double value, double bound) {
    const bool pass = within(value, bound, relation);
    rep.rows.push_back({std::move(name), std::move(relation), value, bound, pass});
  };

  add_row("box-norm-h", "<=", rep.box_h, epsilon);

  // All 16 terms of N(g + h, ..): slot i takes h when bit (3 - i) is set.
  double expansion = 0.0, cross_bounds = 0.0;
  for (int mask = 0; mask < 16; ++mask) {
    const GridFunction* fs[4];
    std::string pattern;
    for (int i = 0; i < 4; ++i) {
      const bool use_h = (mask >> (3 - i)) & 1;
      fs[i] = use_h ? &dec.h : &dec.g;
      pattern += use_h ? 'h' : 'g';
    }
    if (mask == 0) {
      expansion += rep.n_g;
      continue;
    }
    const VonNeumannReport vn = von_neumann_check(*fs[0], *fs[1], *fs[2], *fs[3], sigma);
    double bound = std::numeric_limits<double>::infinity();
    for (const auto& row : vn.rows) bound = std::min(bound, std::pow(row.rhs, 0.25));
    expansion += vn.n_value;
    cross_bounds += bound;
    add_row("N[" + pattern + "]", "<=", std::abs(vn.n_value), bound);
    if (!vn.pass) rep.rows.back().pass = false;
  }
  add_row("expansion-sum", "==", expansion, rep.n_s);
  add_row("N(S)-N(g)", "<=", std::abs(rep.n_s - rep.n_g), cross_bounds);
  add_row("M(S)-M(g)", "<=", std::abs(rep.m_s - rep.m_g), 15.0 * rep.box_h);

  // Atom factorization of N(g,g,g,g) over product atoms.
  const Partition& pb = dec.b;
  const Partition& pc = dec.c;
  const std::size_t nb = pb.atom_count(), nc = pc.atom_count();
  auto pair_sigma = [&](const Partition& p) {
    const std::size_t n = p.atom_count();
    std::vector<double> out(n * n, 0.0);
    for (std::uint32_t x = 0; x < q; ++x) {
      for (Elem alpha : a.elements()) out[p.atom_of(x) * n + p.atom_of(f.sub(Elem{x}, alpha).value)] += 1.0;
    }
    for (double& v : out) v *= sigma.weight() / (qd * qd);
    return out;
  };
  const std::vector<double> sb = pair_sigma(pb), sc = pair_sigma(pc);
  std::vector<double> mu(nb), nu(nc);
  for (std::size_t i = 0; i < nb; ++i) mu[i] = pb.atoms()[i].size() / qd;
  for (std::size_t j = 0; j < nc; ++j) nu[j] = pc.atoms()[j].size() / qd;
  auto normalized_gap = [&](const std::vector<double>& sp, const std::vector<double>& m) {
    double worst = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t k = 0; k < m.size(); ++k)
        worst = std::max(worst, std::abs(sp[i * m.size() + k] - m[i] * m[k]) / std::sqrt(m[i] * m[k]));
    return worst;
  };
  add_row("atom-gap-B", "<=", normalized_gap(sb, mu), rep.eps_sigma);
  add_row("atom-gap-C", "<=", normalized_gap(sc, nu), rep.eps_sigma);

  std::vector<double> gv(nb * nc);
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = 0; j < nc; ++j)
      gv[i * nc + j] = dec.counts[i * nc + j] / (static_cast<double>(pb.atoms()[i].size()) * pc.atoms()[j].size());
  double factorized = 0.0, factor_bound = 0.0;
  std::vector<double> prod(nc);
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t i2 = 0; i2 < nb; ++i2) {
      for (std::size_t j = 0; j < nc; ++j) prod[j] = gv[i * nc + j] * gv[i2 * nc + j];
      const double x = mu[i] * mu[i2];
      const double ex = rep.eps_sigma * std::sqrt(x);
      double col = 0.0, col_bound = 0.0;
      for (std::size_t j = 0; j < nc; ++j) {
        for (std::size_t j2 = 0; j2 < nc; ++j2) {
          const double pp = prod[j] * prod[j2];
          const double y = nu[j] * nu[j2];
          const double ey = rep.eps_sigma * std::sqrt(y);
          col += pp * sc[j * nc + j2];
          col_bound += pp * (ex * (y + ey) + x * ey);
        }
      }
      factorized += sb[i * nb + i2] * col;
      factor_bound += col_bound;
    }
  }
  add_row("atom-identity", "==", factorized, rep.n_g);
  add_row("N(g)-M(g)", "<=", std::abs(rep.n_g - rep.m_g), factor_bound);

  const double density = static_cast<double>(s.size()) / (qd * qd);
  add_row("M(S)-density", ">=", rep.m_s, std::pow(density, 4));

  const double d = static_cast<double>(a.order());
  rep.predicted_count = qd * qd * rep.n_s * d * d;
  rep.axis_count = axis_rectangles_with_differences(s, a);
  rep.geometric_count = rect_count_all(s, SideFilter::subgroup(a)).nondegenerate;
  {
    const double ac = static_cast<double>(rep.axis_count);
    const bool pass = std::abs(ac - rep.predicted_count) <= 1e-6 * std::max(1.0, ac);
    rep.rows.push_back({"axis-count", "==", ac, rep.predicted_count, pass});
    rep.rows.push_back({"geometric-count", ">=", static_cast<double>(rep.geometric_count), ac,
                        rep.geometric_count >= rep.axis_count});
  }

  rep.chain_lower_bound = std::pow(density, 4) - 15.0 * rep.box_h - factor_bound - cross_bounds;
  rep.conclusive = rep.n_s > 0.0 && rep.chain_lower_bound > 0.0;
  rep.pass = std::all_of(rep.rows.begin(), rep.rows.end(), [](const PipelineRow& r) { return r.pass; });
  if (dec.box_norm_h > epsilon) rep.pass = false;
  for (const auto& rec : dec.trace) rep.pass = rep.pass && rec.increment_ok;
  return rep;
}

}  // namespace fqlab
