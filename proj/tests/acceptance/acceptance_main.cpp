// Desk-scale acceptance run: one PASS/FAIL line per criterion, exit 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fqlab/constructions.hpp"
#include "fqlab/energy.hpp"
#include "fqlab/error.hpp"
#include "fqlab/fourier.hpp"
#include "fqlab/harness.hpp"
#include "fqlab/regularity.hpp"

namespace {

using namespace fqlab;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ParaboloidSet random_lift(const Field& f, std::uint64_t size, Rng& rng) {
  return ParaboloidSet::lift_of(random_grid_subset(f, size, rng));
}

GridFunction random_function(const Field& f, Rng& rng, double lo, double hi) {
  std::vector<double> v(f.q() * f.q());
  for (double& x : v) x = lo + (hi - lo) * rng.uniform();
  return GridFunction(f, std::move(v));
}

Outcome bijection() {
  std::uint64_t sets = 0, quads = 0, bad = 0;
  for (std::uint32_t q : {3u, 7u, 11u}) {
    const Field f = Field::make(q);
    Rng rng(1, q);
    for (int i = 0; i < 20; ++i) {
      const std::uint64_t cap = std::min<std::uint64_t>(40, q * q);
      const ParaboloidSet x = random_lift(f, 1 + rng.below(cap), rng);
      const BijectionReport r = bijection_check(x);
      ++sets;
      quads += r.quadruples_checked;
      bad += !(r.holds && r.counts_match);
    }
  }
  return {bad == 0, fmt("%llu sets, %llu quadruples, %llu exceptions", (unsigned long long)sets,
                        (unsigned long long)quads, (unsigned long long)bad)};
}

Outcome oracle_equivalence() {
  int mismatches = 0;
  const std::uint32_t qs[] = {7, 11, 19};
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const Field f = Field::make(qs[i % 3]);
    const ParaboloidSet x = random_lift(f, 1 + rng.below(50), rng);
    if (energy_count(x) != energy_count_bruteforce(x)) ++mismatches;
    if (energy_nontrivial(x) != energy_nontrivial_bruteforce(x)) ++mismatches;
  }
  return {mismatches == 0, fmt("50 instances, %d mismatches", mismatches)};
}

Outcome axis_lower_bound() {
  using u128 = unsigned __int128;
  int failures = 0, tight = 0;
  for (std::uint32_t q : {7u, 11u, 19u}) {
    const Field f = Field::make(q);
    Rng rng(3, q);
    for (int i = 0; i < 100; ++i) {
      const GridSet s = random_grid_subset(f, rng.below(q * q + 1), rng);
      const u128 lhs = static_cast<u128>(rect_count_axis(s)) * q * q * q * q;
      const u128 n = s.size();
      if (lhs < n * n * n * n) ++failures;
    }
    const std::uint64_t full = rect_count_axis(GridSet::full(f));
    tight += full == static_cast<std::uint64_t>(q) * q * q * q;
  }
  return {failures == 0 && tight == 3, fmt("300 sets, %d below bound, equality at full plane for %d/3 q", failures, tight)};
}

Outcome paraboloid_upper() {
  std::string detail;
  bool ok = true;
  for (std::uint32_t q : {3u, 7u, 11u, 19u, 23u}) {
    const ParaboloidBound b = paraboloid_energy_bound_check(Field::make(q));
    const std::uint64_t qq = q;
    ok &= b.pass && b.energy <= 2 * qq * qq * qq * qq * qq;
    detail += fmt("q=%u ratio %.4f; ", q, b.ratio);
  }
  return {ok, detail};
}

Outcome lower_scan() {
  bool ok = true;
  std::string detail;
  for (std::uint32_t q : {19u, 23u, 31u}) {
    const Field f = Field::make(q);
    const auto size = static_cast<std::uint64_t>(2 * std::ceil(std::pow(static_cast<double>(q), 5.0 / 3.0)));
    double lo = INFINITY, hi = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Rng rng(seed, 5);
      const ParaboloidSet x = random_lift(f, size, rng);
      const double ent = static_cast<double>(energy_nontrivial(x));
      const double ratio = ent * q * q * q / std::pow(static_cast<double>(size), 4);
      ok &= ent > 0 && ratio > 0;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    detail += fmt("q=%u |X|=%llu ratio [%.4f, %.4f]; ", q, (unsigned long long)size, lo, hi);
  }
  return {ok, detail};
}

Outcome sigma_spectrum() {
  double worst = 0.0, worst_zero = 0.0;
  int groups = 0;
  for (std::uint32_t q : {7u, 11u, 19u, 23u, 31u, 43u}) {
    const Field f = Field::make(q);
    for (std::uint64_t d : subgroup_orders(f)) {
      const SigmaMeasure s = sigma_profile(MultiplicativeSubgroup::of_order(f, d));
      worst_zero = std::max(worst_zero, std::abs(s.spectrum.coeffs[0] - 1.0));
      worst = std::max(worst, s.normalized_constant);
      ++groups;
    }
  }
  return {worst_zero <= 1e-9 && worst <= 2.0,
          fmt("%d subgroups, max |sigma^(0) - 1| %.2e, max normalized constant %.4f", groups, worst_zero, worst)};
}

Outcome spectral_gap() {
  int pairs = 0, failures = 0;
  double worst_identity = 0.0;
  for (std::uint32_t q : {7u, 19u}) {
    const Field f = Field::make(q);
    Rng rng(7, q);
    for (std::uint64_t d : subgroup_orders(f)) {
      const SigmaMeasure sigma = sigma_profile(MultiplicativeSubgroup::of_order(f, d));
      for (int i = 0; i < 100; ++i) {
        std::vector<double> u(q), v(q);
        for (std::uint32_t x = 0; x < q; ++x) {
          u[x] = rng.bernoulli(0.5) ? 1.0 : -1.0;
          v[x] = rng.bernoulli(0.5) ? 1.0 : -1.0;
        }
        const SpectralGap g = vtk_gap(LineFunction(f, u), LineFunction(f, v), sigma);
        const double id = std::abs(g.gap - g.spectral_sum);
        worst_identity = std::max(worst_identity, id);
        if (id > 1e-9 || g.gap > sigma.max_offzero + 1e-9) ++failures;
        ++pairs;
      }
    }
  }
  return {failures == 0, fmt("%d pairs over all subgroups, %d failures, max identity error %.2e", pairs, failures,
                             worst_identity)};
}

Outcome box_norm_control() {
  int failures = 0;
  double slack = INFINITY;
  Rng rng(8);
  const std::uint32_t qs[] = {7, 11, 19};
  for (int i = 0; i < 200; ++i) {
    const Field f = Field::make(qs[i % 3]);
    std::array<GridFunction, 4> fs = {random_function(f, rng, -1, 1), random_function(f, rng, -1, 1),
                                      random_function(f, rng, -1, 1), random_function(f, rng, -1, 1)};
    const double m = form_M(fs[0], fs[1], fs[2], fs[3]);
    double best = INFINITY;
    for (const auto& g : fs) best = std::min(best, box_norm(g));
    slack = std::min(slack, best - std::abs(m));
    if (std::abs(m) > best + 1e-9) ++failures;
  }
  return {failures == 0, fmt("200 quadruples, %d failures, min slack %.3e", failures, slack)};
}

Outcome form_agreement() {
  double worst = 0.0;
  double naive_s = 0.0, fast_s = 0.0;
  for (std::uint32_t q : {7u, 11u, 19u}) {
    const Field f = Field::make(q);
    Rng rng(9, q);
    const auto orders = subgroup_orders(f);
    for (int i = 0; i < 100; ++i) {
      const SigmaMeasure sigma = sigma_profile(MultiplicativeSubgroup::of_order(f, orders[i % orders.size()]));
      const auto a = random_function(f, rng, 0, 1), b = random_function(f, rng, 0, 1),
                 c = random_function(f, rng, 0, 1), d = random_function(f, rng, 0, 1);
      auto t0 = Clock::now();
      const double naive = form_N(a, b, c, d, sigma, FormMode::kNaive);
      const double tn = seconds_since(t0);
      t0 = Clock::now();
      const double fast = form_N(a, b, c, d, sigma, FormMode::kFast);
      const double tf = seconds_since(t0);
      if (q == 19) {
        naive_s += tn;
        fast_s += tf;
      }
      worst = std::max(worst, std::abs(naive - fast) / std::max(std::abs(naive), 1e-300));
    }
  }
  return {worst <= 1e-6 && fast_s < naive_s,
          fmt("max relative error %.2e; q=19 naive %.3fs, fast %.3fs", worst, naive_s, fast_s)};
}

Outcome weak_regularity_check() {
  int runs = 0, failures = 0;
  std::uint64_t max_iter = 0;
  for (std::uint32_t q : {11u, 19u}) {
    const Field f = Field::make(q);
    for (double eps : {0.5, 0.3}) {
      Rng rng(10, q * 100 + static_cast<std::uint64_t>(eps * 10));
      for (int i = 0; i < 10; ++i) {
        const GridSet s = random_grid_subset(f, 1 + rng.below(q * q), rng);
        const Decomposition d = weak_regularity(s, eps);
        bool ok = d.box_norm_h <= eps && box_norm(d.h) <= eps;
        ok &= d.iterations <= d.iteration_bound && d.iteration_bound == regularity_iteration_bound(eps);
        const auto ind = GridFunction::indicator(s);
        for (std::size_t k = 0; k < ind.values().size(); ++k)
          ok &= std::abs(d.g.values()[k] + d.h.values()[k] - ind.values()[k]) <= 1e-12;
        for (const IterationRecord& r : d.trace)
          ok &= r.energy_after - r.energy_before >= r.correlation * r.correlation - 1e-9;
        failures += !ok;
        max_iter = std::max(max_iter, d.iterations);
        ++runs;
      }
    }
  }
  return {failures == 0, fmt("%d decompositions, %d failures, max iterations %llu", runs, failures,
                             (unsigned long long)max_iter)};
}

// Sum over a - b, c - d in A of S(a,c) S(a,d) S(b,c) S(b,d), by direct loops.
std::uint64_t axis_subgroup_oracle(const GridSet& s, const MultiplicativeSubgroup& a) {
  const Field& f = s.field();
  const std::uint32_t q = f.q();
  std::uint64_t n = 0;
  for (std::uint32_t x = 0; x < q; ++x)
    for (Elem u : a.elements()) {
      const Elem b = f.sub(Elem{x}, u);
      for (std::uint32_t c = 0; c < q; ++c) {
        if (!s.contains({Elem{x}, Elem{c}}) || !s.contains({b, Elem{c}})) continue;
        for (Elem v : a.elements()) {
          const Elem d = f.sub(Elem{c}, v);
          n += s.contains({Elem{x}, d}) && s.contains({b, d});
        }
      }
    }
  return n;
}

Outcome pipeline() {
  bool ok = true;
  std::string detail;
  for (std::uint32_t q : {7u, 11u, 19u}) {
    const Field f = Field::make(q);
    const PipelineReport r = subgroup_rectangle_pipeline(GridSet::full(f), MultiplicativeSubgroup::whole(f), 0.3);
    ok &= r.pass;
    for (const PipelineRow& row : r.rows) ok &= row.pass;
  }
  detail += "full plane all rows at q=7,11,19; ";
  const Field f = Field::make(19);
  Rng rng(11);
  const auto size = static_cast<std::uint64_t>(std::ceil(0.7 * 19 * 19));
  const GridSet s = random_grid_subset(f, size, rng);
  const auto a = MultiplicativeSubgroup::whole(f);
  const PipelineReport r = subgroup_rectangle_pipeline(s, a, 0.3);
  const std::uint64_t oracle = axis_subgroup_oracle(s, a);
  ok &= r.n_s > 0;
  ok &= static_cast<double>(r.axis_count) >= r.predicted_count * (1 - 1e-9);
  ok &= r.axis_count == oracle && r.geometric_count >= r.axis_count;
  for (const PipelineRow& row : r.rows) ok &= row.pass;
  detail += fmt("q=19 |S|=%llu N=%.6f predicted %.1f axis %llu oracle %llu geometric %llu", (unsigned long long)size,
                r.n_s, r.predicted_count, (unsigned long long)r.axis_count, (unsigned long long)oracle,
                (unsigned long long)r.geometric_count);
  return {ok, detail};
}

Outcome square_free() {
  bool ok = true;
  std::string detail;
  for (std::uint32_t q : {7u, 11u, 19u}) {
    const Field f = Field::make(q);
    const Elem lambda = f.one();
    const HypergraphInstance h = square_hypergraph(f, lambda);
    ok &= h.m() <= static_cast<std::uint64_t>(q) * q * q;
    for (const Square& sq : enumerate_squares(f, lambda)) ok &= square_on_circle(f, sq, lambda);
    int hits = 0;
    std::uint64_t spencer = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const SquareFreeResult r = square_free_independent_set(f, lambda, seed);
      ok &= r.certificate_rectangles == 0 && r.certificate_energy == 0 && r.edges_inside == 0;
      hits += 2 * r.achieved_size >= r.spencer;
      spencer = r.spencer;
    }
    ok &= hits >= 10;
    detail += fmt("q=%u m=%llu spencer %llu, %d/20 at half; ", q, (unsigned long long)h.m(),
                  (unsigned long long)spencer, hits);
  }
  return {ok, detail};
}

Outcome energy_free() {
  bool ok = true;
  std::string detail;
  for (std::uint32_t q : {19u, 23u, 31u}) {
    const Field f = Field::make(q);
    double total = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const EnergyFreeResult r = random_energy_free(f, seed);
      ok &= r.certificate_nontrivial == 0 && energy_nontrivial_bruteforce(r.set) == 0;
      total += static_cast<double>(r.achieved_size);
    }
    const double mean = total / 20;
    ok &= mean >= q / 4.0;
    detail += fmt("q=%u mean %.2f (q/4 = %.2f); ", q, mean, q / 4.0);
  }
  return {ok, detail};
}

Outcome spencer() {
  const std::uint64_t v = spencer_bound(4, 49, 343);
  bool too_few = false;
  try {
    spencer_bound(4, 49, 12);
  } catch (const Error& e) {
    too_few = e.code() == ErrorCode::kTooFewEdges;
  }
  return {v == 12 && too_few, fmt("(4, 49, 343) -> %llu; m < n/k %s", (unsigned long long)v,
                                  too_few ? "rejected" : "accepted")};
}

Outcome determinism() {
  int experiments = 0, differ = 0;
  for (const ExperimentInfo& info : experiment_registry()) {
    ExperimentConfig c;
    c.experiment = info.name;
    c.p = 7;
    c.seeds = {1, 2, 3};
    if (info.name == "conjecture-search") {
      c.lambda = 1;
      c.beta = 2;
    }
    const std::string a = report_to_json(run_experiment(c), false).dump(2);
    const std::string b = report_to_json(run_experiment(c), false).dump(2);
    differ += a != b;
    ++experiments;
  }
  return {differ == 0, fmt("%d experiments run twice, %d differ", experiments, differ)};
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"bijection", 10, bijection},
      {"energy-oracles", 30, oracle_equivalence},
      {"axis-rectangle-lower-bound", 10, axis_lower_bound},
      {"paraboloid-upper-bound", 30, paraboloid_upper},
      {"nontrivial-energy-scan", 120, lower_scan},
      {"sigma-spectrum", 10, sigma_spectrum},
      {"spectral-gap", 10, spectral_gap},
      {"box-norm-control", 30, box_norm_control},
      {"form-agreement", 120, form_agreement},
      {"weak-regularity", 300, weak_regularity_check},
      {"rectangle-pipeline", 300, pipeline},
      {"square-free-construction", 180, square_free},
      {"energy-free-construction", 180, energy_free},
      {"spencer-calculator", 1, spencer},
      {"determinism", 60, determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Criterion& c = criteria[i];
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double t = seconds_since(t0);
    const bool pass = o.pass && t <= c.budget_seconds;
    failed += !pass;
    std::printf("%s %2zu %s: %s [%.2fs / %.0fs]\n", pass ? "PASS" : "FAIL", i + 1, c.name, o.detail.c_str(), t,
                c.budget_seconds);
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
