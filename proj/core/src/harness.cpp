#include "fqlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "fqlab/constructions.hpp"
#include "fqlab/energy.hpp"
#include "fqlab/error.hpp"
#include "fqlab/fourier.hpp"
#include "fqlab/geometry.hpp"
#include "fqlab/regularity.hpp"

namespace fqlab {
namespace {

using Clock = std::chrono::steady_clock;

Json num(double x) { return round12(x); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::kInvalidParameters, "bad value '" + std::string(value) + "' for " + std::string(key));
}

std::uint64_t parse_uint(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (v.empty() || v[0] == '-') bad_value(key, value);
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (*end != '\0') bad_value(key, value);
  return x;
}

double parse_double(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(x)) bad_value(key, value);
  return x;
}

bool parse_bool(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  bad_value(key, value);
}

// Smallest n with n^3 >= q^5.
std::uint64_t ceil_q53(std::uint64_t q) {
  const std::uint64_t q5 = q * q * q * q * q;
  std::uint64_t n = static_cast<std::uint64_t>(std::cbrt(static_cast<double>(q5)));
  while (n > 0 && (n - 1) * (n - 1) * (n - 1) >= q5) --n;
  while (n * n * n < q5) ++n;
  return n;
}

std::uint64_t plane_size(const Field& f) { return static_cast<std::uint64_t>(f.q()) * f.q(); }

// Explicit size, else ceil(density q^2), else the experiment default.
std::uint64_t resolve_size(const ExperimentConfig& c, const Field& f, std::uint64_t fallback) {
  const std::uint64_t n = plane_size(f);
  std::uint64_t size = fallback;
  if (c.size) {
    size = *c.size;
  } else if (c.density) {
    size = static_cast<std::uint64_t>(std::ceil(*c.density * static_cast<double>(n) - 1e-9));
  }
  if (size > n) {
    throw Error(ErrorCode::kInvalidParameters, "size " + std::to_string(size) + " exceeds q^2 = " + std::to_string(n));
  }
  return size;
}

Elem resolve_side(const Field& f, std::optional<std::uint32_t> v, std::uint32_t fallback, const char* key) {
  const std::uint32_t x = v.value_or(fallback);
  if (x >= f.q()) throw Error(ErrorCode::kInvalidParameters, std::string(key) + " must be a field element below q");
  if (x == 0) throw Error(ErrorCode::kZeroSide, std::string(key) + " must be non-zero");
  return Elem{x};
}

// Smallest divisor d of q - 1 with d^3 >= q^2.
std::uint64_t default_subgroup(const Field& f) {
  const std::uint64_t q = f.q();
  for (std::uint64_t d : subgroup_orders(f)) {
    if (d * d * d >= q * q) return d;
  }
  return q - 1;
}

MultiplicativeSubgroup resolve_subgroup(const ExperimentConfig& c, const Field& f, std::uint64_t fallback) {
  return MultiplicativeSubgroup::of_order(f, c.subgroup.value_or(fallback));
}

double resolve_epsilon(const ExperimentConfig& c, double fallback) {
  const double eps = c.epsilon.value_or(fallback);
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::kInvalidParameters, "epsilon must lie in (0, 1]");
  return eps;
}

void add_check(RunRow& row, std::string name, std::string relation, Json lhs, Json rhs, bool pass) {
  row.checks.push_back({std::move(name), std::move(relation), std::move(lhs), std::move(rhs), pass});
  row.pass = row.pass && pass;
}

Json point_list(const std::vector<Point2>& pts) {
  Json out = Json::array();
  for (Point2 u : pts) out.push_back({u.x.value, u.y.value});
  return out;
}

Json point_list(const std::vector<Point3>& pts) {
  Json out = Json::array();
  for (const Point3& w : pts) out.push_back({w.x.value, w.y.value, w.z.value});
  return out;
}

Json sets_json(const std::vector<std::vector<std::uint32_t>>& sets) {
  Json out = Json::array();
  for (const auto& s : sets) out.push_back(s);
  return out;
}

using u128 = unsigned __int128;

// ---- experiments ----------------------------------------------------------

RunRow run_thm12(const Field& f, const ExperimentConfig& c, std::uint64_t seed) {
  RunRow row;
  const std::uint64_t q = f.q();
  const std::uint64_t size = resolve_size(c, f, std::min(plane_size(f), 2 * ceil_q53(q)));
  Rng rng(seed);
  const ParaboloidSet x = ParaboloidSet::lift_of(random_grid_subset(f, size, rng));
  const std::uint64_t ent = energy_nontrivial(x);
  const double ratio = static_cast<double>(ent) * std::pow(static_cast<double>(q), 3) / std::pow(static_cast<double>(size), 4);
  row.values["size"] = size;
  row.values["E_nt"] = ent;
  row.values["ratio"] = num(ratio);
  row.values["ceil_q_5_3"] = ceil_q53(q);
  add_check(row, "E_nt>0", ">", ent, 0, ent > 0);
  return row;
}

RunRow run_lem22(const Field& f, const ExperimentConfig& c, std::uint64_t seed) {
  RunRow row;
  const std::uint64_t q = f.q();
  const std::uint64_t size = resolve_size(c, f, (plane_size(f) + 1) / 2);
  Rng rng(seed);
  const GridSet s = random_grid_subset(f, size, rng);
  const std::uint64_t rec = rect_count_axis(s);
  const std::uint64_t deg = rect_count_axis_degenerate(s);
  const RectangleCount all = rect_count_all(s);
  const u128 lhs = static_cast<u128>(rec) * q * q * q * q;
  const u128 rhs = static_cast<u128>(size) * size * size * size;
  const double lower = std::pow(static_cast<double>(size) / static_cast<double>(q), 4);
  row.values["size"] = size;
  row.values["rect_axis"] = rec;
  row.values["lower_bound"] = num(lower);
  row.values["axis_degenerate"] = deg;
  row.values["axis_degenerate_bound"] = 2 * size * q;
  row.values["rect_all_nondegenerate"] = all.nondegenerate;
  row.values["rect_all_degenerate"] = all.degenerate;
  add_check(row, "rect_axis>=(|S|/q)^4", ">=", rec, num(lower), lhs >= rhs);
  add_check(row, "axis_degenerate<=2|S|q", "<=", deg, 2 * size * q, deg <= 2 * size * q);
  const std::uint64_t expected_deg = 2 * size * size - size;
  add_check(row, "all_degenerate==2|S|^2-|S|", "==", all.degenerate, expected_deg, all.degenerate == expected_deg);
  return row;
}

RunRow run_parab(const Field& f, const ExperimentConfig&, std::uint64_t) {
  RunRow row;
  const ParaboloidBound b = paraboloid_energy_bound_check(f);
  row.values["energy"] = b.energy;
  row.values["bound"] = b.bound;
  row.values["ratio"] = num(b.ratio);
  add_check(row, "E(P)<=2q^5", "<=", b.energy, b.bound, b.pass);
  return row;
}

RunRow run_thm31(const Field& f, const ExperimentConfig& c, std::uint64_t seed) {
  RunRow row;
  const std::uint64_t n = plane_size(f);
  const std::uint64_t size = resolve_size(c, f, static_cast<std::uint64_t>(std::ceil(0.7 * static_cast<double>(n))));
  const MultiplicativeSubgroup a = resolve_subgroup(c, f, f.q() - 1);
  const double eps = resolve_epsilon(c, 0.3);
  Rng rng(seed);
  const GridSet s = random_grid_subset(f, size, rng);
  const PipelineReport rep = subgroup_rectangle_pipeline(s, a, eps);
  const Decomposition& dec = rep.decomposition;

  row.values["size"] = size;
  row.values["subgroup"] = a.order();
  row.values["epsilon"] = num(eps);
  row.values["eps_sigma"] = num(rep.eps_sigma);
  row.values["accumulated_error"] = num(rep.accumulated_error);
  row.values["iterations"] = dec.iterations;
  row.values["iteration_bound"] = dec.iteration_bound;
  row.values["atoms_B"] = dec.b.atom_count();
  row.values["atoms_C"] = dec.c.atom_count();
  row.values["box_h"] = num(rep.box_h);
  row.values["N_S"] = num(rep.n_s);
  row.values["N_g"] = num(rep.n_g);
  row.values["M_S"] = num(rep.m_s);
  row.values["M_g"] = num(rep.m_g);
  row.values["predicted_count"] = num(rep.predicted_count);
  row.values["axis_count"] = rep.axis_count;
  row.values["geometric_count"] = rep.geometric_count;
  row.values["chain_lower_bound"] = num(rep.chain_lower_bound);
  row.values["N_positive"] = rep.n_s > 0.0;
  row.values["conclusive"] = rep.conclusive;
  Json terms = Json::array();
  for (const PipelineRow& r : rep.rows) {
    terms.push_back({{"name", r.name}, {"relation", r.relation}, {"value", num(r.value)}, {"bound", num(r.bound)},
                     {"pass", r.pass}});
  }
  row.values["terms"] = std::move(terms);
  row.values["generators_B"] = sets_json(dec.b.generators());
  row.values["generators_C"] = sets_json(dec.c.generators());
  Json trace = Json::array();
  for (const IterationRecord& it : dec.trace) {
    trace.push_back({{"box_norm_h", num(it.box_norm_h)},
                     {"correlation", num(it.correlation)},
                     {"energy_before", num(it.energy_before)},
                     {"energy_after", num(it.energy_after)},
                     {"u_size", it.u_size},
                     {"w_size", it.w_size},
                     {"increment_ok", it.increment_ok}});
  }
  row.values["trace"] = std::move(trace);

  for (const PipelineRow& r : rep.rows) add_check(row, r.name, r.relation, num(r.value), num(r.bound), r.pass);
  add_check(row, "iterations<=bound", "<=", dec.iterations, dec.iteration_bound, dec.iterations <= dec.iteration_bound);
  const bool increments = std::all_of(dec.trace.begin(), dec.trace.end(), [](const auto& r) { return r.increment_ok; });
  add_check(row, "energy-increments", "true", increments, true, increments);
  return row;
}

RunRow run_thm15(const Field& f, const ExperimentConfig& c, std::uint64_t seed) {
  RunRow row;
  const std::uint64_t q = f.q();
  const std::uint64_t n = plane_size(f);
  const std::uint64_t size = resolve_size(c, f, static_cast<std::uint64_t>(std::ceil(0.7 * static_cast<double>(n))));
  const MultiplicativeSubgroup a = resolve_subgroup(c, f, default_subgroup(f));
  Rng rng(seed);
  const GridSet s = random_grid_subset(f, size, rng);
  const ParaboloidSet x = ParaboloidSet::lift_of(s);
  const SideFilter filter = SideFilter::subgroup(a);
  const std::uint64_t ea = energy_count_filtered(x, filter);
  const std::uint64_t geo = rect_count_all(s, filter).nondegenerate;
  const double d = static_cast<double>(a.order());
  const double reference = std::pow(static_cast<double>(size), 4) * d * d / std::pow(static_cast<double>(q), 5);
  row.values["size"] = size;
  row.values["subgroup"] = a.order();
  row.values["meets_size_condition"] = a.order() * a.order() * a.order() >= q * q;
  row.values["E_A"] = ea;
  row.values["reference"] = num(reference);
  row.values["ratio"] = num(static_cast<double>(ea) / reference);
  add_check(row, "E_A>0", ">", ea, 0, ea > 0);
  add_check(row, "E_A==rectangles", "==", ea, geo, ea == geo);
  return row;
}

RunRow run_prop14(const Field& f, const ExperimentConfig& c, std::uint64_t seed) {
  RunRow row;
  const std::uint64_t q = f.q();
  const Elem lambda = resolve_side(f, c.lambda, 1, "lambda");
  const SquareFreeResult r = square_free_independent_set(f, lambda, seed);
  bool on_circle = true;
  for (const Square& sq : enumerate_squares(f, lambda)) on_circle = on_circle && square_on_circle(f, sq, lambda);
  const bool half = 2 * r.achieved_size >= r.spencer;
  row.values["lambda"] = lambda.value;
  row.values["edges"] = r.edges;
  row.values["q3"] = q * q * q;
  row.values["probability"] = num(r.probability);
  row.values["spencer"] = r.spencer;
  row.values["achieved_size"] = r.achieved_size;
  row.values["half_spencer"] = half;
  row.values["best_attempt"] = r.best_attempt;
  row.values["certificate_rectangles"] = r.certificate_rectangles;
  row.values["certificate_energy"] = r.certificate_energy;
  row.values["points"] = point_list(r.lifted.points());
  add_check(row, "certificate_rectangles==0", "==", r.certificate_rectangles, 0, r.certificate_rectangles == 0);
  add_check(row, "certificate_energy==0", "==", r.certificate_energy, 0, r.certificate_energy == 0);
  add_check(row, "edges_inside==0", "==", r.edges_inside, 0, r.edges_inside == 0);
  add_check(row, "edges<=q^3", "<=", r.edges, q * q * q, r.edges <= q * q * q);
  add_check(row, "edges_on_circles", "true", on_circle, true, on_circle);
  add_check(row, "lift_size", "==", r.lifted.size(), r.achieved_size, r.lifted.size() == r.achieved_size);
  return row;
}

RunRow run_energy_free(const Field& f, const ExperimentConfig&, std::uint64_t seed) {
  RunRow row;
  const EnergyFreeResult r = random_energy_free(f, seed);
  row.values["sampled"] = r.sampled;
  row.values["nontrivial_tuples"] = r.nontrivial_tuples;
  row.values["deleted"] = r.deleted;
  row.values["achieved_size"] = r.achieved_size;
  row.values["target_size"] = num(r.target_size);
  row.values["attempts"] = r.attempts;
  row.values["seed_used"] = r.seed_used;
  row.values["certificate_nontrivial"] = r.certificate_nontrivial;
  row.values["points"] = point_list(r.set.points());
  add_check(row, "certificate_nontrivial==0", "==", r.certificate_nontrivial, 0, r.certificate_nontrivial == 0);
  add_check(row, "achieved>=q/8", ">=", r.achieved_size, num(r.target_size),
            static_cast<double>(r.achieved_size) >= r.target_size);
  add_check(row, "deleted<=tuples", "<=", r.deleted, r.nontrivial_tuples, r.deleted <= r.nontrivial_tuples);
  return row;
}

RunRow run_bijection(const Field& f, const ExperimentConfig& c, std::uint64_t seed) {
  RunRow row;
  const std::uint64_t size = resolve_size(c, f, std::min<std::uint64_t>(40, plane_size(f)));
  Rng rng(seed);
  const ParaboloidSet x = ParaboloidSet::lift_of(random_grid_subset(f, size, rng));
  const BijectionReport b = bijection_check(x);
  row.values["size"] = size;
  row.values["quadruples"] = b.quadruples_checked;
  row.values["energy_tuples"] = b.energy_tuples;
  row.values["rectangles"] = b.rectangles;
  row.values["nontrivial_tuples"] = b.nontrivial_tuples;
  row.values["nondegenerate_rectangles"] = b.nondegenerate_rectangles;
  add_check(row, "per-quadruple", "true", b.holds, true, b.holds);
  add_check(row, "aggregate-counts", "true", b.counts_match, true, b.counts_match);
  return row;
}

RunRow run_exponent(const Field& f, const ExperimentConfig& c, std::uint64_t seed) {
  RunRow row;
  const double q = f.q();
  std::vector<std::uint64_t> sizes;
  if (c.size || c.density) {
    sizes.push_back(resolve_size(c, f, 0));
  } else {
    for (double t : {1.25, 1.5, 1.75, 2.0}) {
      sizes.push_back(std::min(plane_size(f), static_cast<std::uint64_t>(std::ceil(std::pow(q, t) - 1e-9))));
    }
  }
  Json scan = Json::array();
  Rng rng(seed);
  for (std::uint64_t n : sizes) {
    const ParaboloidSet x = ParaboloidSet::lift_of(random_grid_subset(f, n, rng));
    const EnergyReport e = energy_report(x);
    const double ln = std::log(static_cast<double>(n));
    Json entry = {{"size", n}, {"E", e.total}, {"E_nt", e.nontrivial}};
    entry["exponent_E"] = n > 1 ? num(std::log(static_cast<double>(e.total)) / ln) : Json(nullptr);
    entry["exponent_E_nt"] = n > 1 && e.nontrivial > 0 ? num(std::log(static_cast<double>(e.nontrivial)) / ln) : Json(nullptr);
    scan.push_back(std::move(entry));
  }
  row.values["reference_exponent"] = num(99.0 / 41.0);
  row.values["scan"] = std::move(scan);
  return row;
}

RunRow run_conjecture(const Field& f, const ExperimentConfig& c, std::uint64_t seed) {
  RunRow row;
  const Elem lambda = resolve_side(f, c.lambda, 0, "lambda");
  const Elem beta = resolve_side(f, c.beta, 0, "beta");
  const PairFreeResult r = pair_free_search(f, lambda, beta, seed);
  row.values["lambda"] = lambda.value;
  row.values["beta"] = beta.value;
  row.values["ratio_is_square"] = r.ratio_is_square;
  row.values["best_size"] = r.best_size;
  row.values["density"] = num(r.density);
  row.values["restarts"] = r.restarts;
  row.values["certificate_rectangles"] = r.certificate_rectangles;
  row.values["points"] = point_list(r.plane.points());
  add_check(row, "certificate_rectangles==0", "==", r.certificate_rectangles, 0, r.certificate_rectangles == 0);
  return row;
}

using Runner = std::function<RunRow(const Field&, const ExperimentConfig&, std::uint64_t)>;
using Aggregator = std::function<void(const Field&, const std::vector<const RunRow*>&, std::vector<Check>&)>;

void half_spencer_majority(const Field& f, const std::vector<const RunRow*>& rows, std::vector<Check>& out) {
  std::uint64_t hits = 0;
  for (const RunRow* r : rows) hits += r->values["half_spencer"].get<bool>() ? 1 : 0;
  const std::uint64_t need = (rows.size() + 1) / 2;
  out.push_back({"q=" + std::to_string(f.q()) + " half-spencer on half the seeds", ">=", hits, need, hits >= need});
}

void mean_size_quarter(const Field& f, const std::vector<const RunRow*>& rows, std::vector<Check>& out) {
  double total = 0.0;
  for (const RunRow* r : rows) total += r->values["achieved_size"].get<double>();
  const double mean = rows.empty() ? 0.0 : total / static_cast<double>(rows.size());
  const double quarter = f.q() / 4.0;
  out.push_back({"q=" + std::to_string(f.q()) + " mean size>=q/4", ">=", num(mean), num(quarter), mean >= quarter});
}

struct Entry {
  ExperimentInfo info;
  Runner run;
  Aggregator aggregate;
  bool needs_pair = false;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> list = {
      {{"thm12-lower", "non-trivial energy of random X on the paraboloid against |X|^4/q^3",
        "--size|--density (default 2*ceil(q^(5/3)))", false, true},
       run_thm12, nullptr},
      {{"lem22-rect", "axis rectangle count against (|S|/q)^4 and the degenerate terms",
        "--size|--density (default 0.5)", false, true},
       run_lem22, nullptr},
      {{"parab-upper", "energy of the whole paraboloid against 2q^5", "none", false, false}, run_parab, nullptr},
      {{"thm31-pipeline", "regularity split and subgroup rectangle counting chain",
        "--size|--density (default 0.7) --subgroup (default q-1) --epsilon (default 0.3)", false, true},
       run_thm31, nullptr},
      {{"thm15-subgroup", "energy with both sides in A against |X|^4|A|^2/q^5",
        "--size|--density (default 0.7) --subgroup (default smallest d with d^3 >= q^2)", false, true},
       run_thm15, nullptr},
      {{"prop14-construct", "square-free independent sets and the Spencer bound", "--lambda (default 1)", false, true},
       run_prop14, half_spencer_majority},
      {{"random-energy-free", "random deletion to an energy-free set on the paraboloid", "none", false, true},
       run_energy_free, mean_size_quarter},
      {{"bijection-audit", "energy tuples against rectangles, quadruple by quadruple",
        "--size|--density (default min(40, q^2))", false, true},
       run_bijection, nullptr},
      {{"exponent-scan", "log E / log |X| and log E_nt / log |X| next to 99/41 (measurement only)",
        "--size|--density (default |X| = q^1.25 .. q^2)", true, true},
       run_exponent, nullptr},
      {{"conjecture-search", "greedy search for large (lambda, beta)-rectangle-free sets (measurement only)",
        "--lambda --beta (required)", true, true},
       run_conjecture, nullptr, true},
  };
  return list;
}

const Entry& find_entry(std::string_view name) {
  for (const Entry& e : entries()) {
    if (e.info.name == name) return e;
  }
  throw Error(ErrorCode::kUnknownExperiment, "no experiment named '" + std::string(name) + "'");
}

Json check_to_json(const Check& c) {
  return {{"name", c.name}, {"relation", c.relation}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"pass", c.pass}};
}

Check check_from_json(const Json& j) {
  return {j.at("name").get<std::string>(), j.at("relation").get<std::string>(), j.at("lhs"), j.at("rhs"),
          j.at("pass").get<bool>()};
}

Json config_echo(const ExperimentConfig& c, const std::vector<Field>& fields) {
  Json j;
  j["experiment"] = c.experiment;
  Json qs = Json::array();
  for (const Field& f : fields) qs.push_back({{"p", f.p()}, {"k", f.k()}, {"q", f.q()}});
  j["fields"] = std::move(qs);
  j["density"] = c.density ? num(*c.density) : Json(nullptr);
  j["size"] = c.size ? Json(*c.size) : Json(nullptr);
  j["subgroup"] = c.subgroup ? Json(*c.subgroup) : Json(nullptr);
  j["epsilon"] = c.epsilon ? num(*c.epsilon) : Json(nullptr);
  j["lambda"] = c.lambda ? Json(*c.lambda) : Json(nullptr);
  j["beta"] = c.beta ? Json(*c.beta) : Json(nullptr);
  j["seeds"] = c.seeds;
  j["slow"] = c.slow;
  return j;
}

std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

void apply_setting(ExperimentConfig& c, std::string_view key_in, std::string_view value) {
  const std::string key = trim(key_in);
  if (key == "experiment") {
    c.experiment = trim(value);
  } else if (key == "p") {
    c.p = static_cast<std::uint32_t>(parse_uint(key, value));
  } else if (key == "k") {
    c.k = static_cast<std::uint32_t>(parse_uint(key, value));
  } else if (key == "density") {
    c.density = parse_double(key, value);
    if (!(*c.density > 0.0 && *c.density <= 1.0)) bad_value(key, value);
  } else if (key == "size") {
    c.size = parse_uint(key, value);
  } else if (key == "subgroup") {
    c.subgroup = parse_uint(key, value);
  } else if (key == "epsilon") {
    c.epsilon = parse_double(key, value);
  } else if (key == "lambda") {
    c.lambda = static_cast<std::uint32_t>(parse_uint(key, value));
  } else if (key == "beta") {
    c.beta = static_cast<std::uint32_t>(parse_uint(key, value));
  } else if (key == "seeds") {
    c.seeds.clear();
    std::stringstream ss{std::string(value)};
    std::string item;
    while (std::getline(ss, item, ',')) c.seeds.push_back(parse_uint(key, item));
    if (c.seeds.empty()) bad_value(key, value);
  } else if (key == "out") {
    c.out = trim(value);
  } else if (key == "format") {
    c.format = trim(value);
    if (c.format != "json" && c.format != "csv") bad_value(key, value);
  } else if (key == "slow") {
    c.slow = parse_bool(key, value);
  } else if (key == "threads") {
    c.threads = static_cast<unsigned>(parse_uint(key, value));
  } else {
    throw Error(ErrorCode::kInvalidParameters, "unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config_text(std::string_view text) {
  ExperimentConfig c;
  std::stringstream ss{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidParameters, "config line " + std::to_string(lineno) + " has no '='");
    }
    apply_setting(c, line.substr(0, eq), line.substr(eq + 1));
  }
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::vector<Field> resolve_fields(const ExperimentConfig& c) {
  std::vector<Field> out;
  if (c.p) {
    out.push_back(Field::make(*c.p, c.k));
    return out;
  }
  std::vector<std::uint32_t> primes = {7, 11, 19};
  if (c.slow) primes.insert(primes.end(), {23, 31, 43});
  for (std::uint32_t p : primes) out.push_back(Field::make(p, 1));
  return out;
}

const std::vector<ExperimentInfo>& experiment_registry() {
  static const std::vector<ExperimentInfo> infos = [] {
    std::vector<ExperimentInfo> v;
    for (const Entry& e : entries()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

const ExperimentInfo& find_experiment(std::string_view name) { return find_entry(name).info; }

Report run_experiment(const ExperimentConfig& config) {
  const Entry& entry = find_entry(config.experiment);
  if (config.seeds.empty()) throw Error(ErrorCode::kInvalidParameters, "seeds must be non-empty");
  if (entry.needs_pair && (!config.lambda || !config.beta)) {
    throw Error(ErrorCode::kInvalidParameters,
                std::string("missing parameter ") + (!config.lambda ? "lambda" : "beta"));
  }
  const std::vector<Field> fields = resolve_fields(config);

  // Parameter validation up front, so that usage errors surface before any work.
  for (const Field& f : fields) {
    if (config.size || config.density) resolve_size(config, f, 0);
    if (config.subgroup) MultiplicativeSubgroup::of_order(f, *config.subgroup);
    if (config.epsilon) resolve_epsilon(config, 0.3);
    if (config.lambda) resolve_side(f, config.lambda, 1, "lambda");
    if (config.beta) resolve_side(f, config.beta, 1, "beta");
  }

  struct Task {
    std::size_t field;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (entry.info.seeded) {
      for (std::uint64_t s : config.seeds) tasks.push_back({i, s});
    } else {
      tasks.push_back({i, 0});
    }
  }

  const auto start = Clock::now();
  std::vector<RunRow> rows(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto t0 = Clock::now();
      try {
        const Field& f = fields[tasks[i].field];
        RunRow row = entry.run(f, config, tasks[i].seed);
        row.p = f.p();
        row.k = f.k();
        row.q = f.q();
        row.seed = tasks[i].seed;
        row.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        rows[i] = std::move(row);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  Report report;
  report.experiment = entry.info.name;
  report.measurement_only = entry.info.measurement_only;
  report.config = config_echo(config, fields);
  report.runs = std::move(rows);
  if (entry.aggregate) {
    for (const Field& f : fields) {
      std::vector<const RunRow*> of_q;
      for (const RunRow& r : report.runs) {
        if (r.q == f.q()) of_q.push_back(&r);
      }
      entry.aggregate(f, of_q, report.aggregate);
    }
  }
  report.pass = std::all_of(report.runs.begin(), report.runs.end(), [](const RunRow& r) { return r.pass; }) &&
                std::all_of(report.aggregate.begin(), report.aggregate.end(), [](const Check& c) { return c.pass; });
  report.total_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

Json report_to_json(const Report& report, bool with_timing) {
  Json j;
  j["experiment"] = report.experiment;
  j["measurement_only"] = report.measurement_only;
  j["config"] = report.config;
  Json runs = Json::array();
  std::size_t checks = 0, failed = 0;
  for (const RunRow& r : report.runs) {
    Json jr;
    jr["q"] = r.q;
    jr["p"] = r.p;
    jr["k"] = r.k;
    jr["seed"] = r.seed;
    jr["values"] = r.values;
    Json jc = Json::array();
    for (const Check& c : r.checks) {
      jc.push_back(check_to_json(c));
      ++checks;
      failed += c.pass ? 0 : 1;
    }
    jr["checks"] = std::move(jc);
    jr["pass"] = r.pass;
    runs.push_back(std::move(jr));
  }
  j["runs"] = std::move(runs);
  Json agg = Json::array();
  for (const Check& c : report.aggregate) {
    agg.push_back(check_to_json(c));
    ++checks;
    failed += c.pass ? 0 : 1;
  }
  j["aggregate"] = std::move(agg);
  j["summary"] = {{"runs", report.runs.size()},
                  {"checks", checks},
                  {"failed", failed},
                  {"pass", report.pass},
                  {"exit_code", report.exit_code()}};
  if (with_timing) {
    Json per = Json::array();
    for (const RunRow& r : report.runs) per.push_back(r.seconds);
    j["timing"] = {{"total_seconds", report.total_seconds}, {"run_seconds", std::move(per)}};
  }
  return j;
}

Report report_from_json(const Json& j) {
  Report r;
  r.experiment = j.at("experiment").get<std::string>();
  r.measurement_only = j.at("measurement_only").get<bool>();
  r.config = j.at("config");
  const Json* timing = j.contains("timing") ? &j.at("timing") : nullptr;
  std::size_t i = 0;
  for (const Json& jr : j.at("runs")) {
    RunRow row;
    row.q = jr.at("q").get<std::uint32_t>();
    row.p = jr.at("p").get<std::uint32_t>();
    row.k = jr.at("k").get<std::uint32_t>();
    row.seed = jr.at("seed").get<std::uint64_t>();
    row.values = jr.at("values");
    for (const Json& c : jr.at("checks")) row.checks.push_back(check_from_json(c));
    row.pass = jr.at("pass").get<bool>();
    if (timing) row.seconds = timing->at("run_seconds").at(i).get<double>();
    r.runs.push_back(std::move(row));
    ++i;
  }
  for (const Json& c : j.at("aggregate")) r.aggregate.push_back(check_from_json(c));
  r.pass = j.at("summary").at("pass").get<bool>();
  if (timing) r.total_seconds = timing->at("total_seconds").get<double>();
  return r;
}

std::string report_to_csv(const Report& report) {
  std::vector<std::string> keys;
  for (const RunRow& r : report.runs) {
    for (auto it = r.values.begin(); it != r.values.end(); ++it) {
      if (it.value().is_structured()) continue;
      if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) keys.push_back(it.key());
    }
  }
  std::ostringstream out;
  out << "q,seed";
  for (const auto& k : keys) out << ',' << k;
  out << ",pass\n";
  for (const RunRow& r : report.runs) {
    out << r.q << ',' << r.seed;
    for (const auto& k : keys) out << ',' << (r.values.contains(k) ? csv_cell(r.values.at(k)) : "");
    out << ',' << (r.pass ? "true" : "false") << '\n';
  }
  return out.str();
}

void emit_report(const Report& report, const std::string& format, const std::string& path, std::ostream& fallback) {
  std::string text;
  if (format == "json") {
    text = report_to_json(report).dump(2) + "\n";
  } else if (format == "csv") {
    text = report_to_csv(report);
  } else {
    throw Error(ErrorCode::kInvalidParameters, "format must be json or csv");
  }
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace fqlab
