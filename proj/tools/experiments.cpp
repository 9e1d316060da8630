#include "experiments.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "CLI11.hpp"

#include "qrec/diffscan.hpp"
#include "qrec/errors.hpp"
#include "qrec/expsum.hpp"
#include "qrec/orbits.hpp"
#include "qrec/poly.hpp"
#include "qrec/systems.hpp"

namespace qrec::cli {

namespace {

json json_int(const Int& x) {
  if (x.fits_slong_p()) return json(x.get_si());
  return json(x.get_str());
}

json json_ext(const ExtInt& x) { return x.is_infinite() ? json("inf") : json_int(x.value()); }

json json_ints(const std::vector<Int>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(json_int(x));
  return a;
}

json json_mat(const IntMat& m) {
  json a = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) a.push_back(json_ints(m.row_vec(i)));
  return a;
}

json json_rows(const std::vector<std::vector<Int>>& rows) {
  json a = json::array();
  for (const auto& r : rows) a.push_back(json_ints(r));
  return a;
}

std::string rat_str(const Rat& r) { return r.get_str(); }

std::string num_str(Real x) { return real_str(x, 17); }

Int to_int(const json& v, const std::string& what) {
  if (v.is_number_integer()) return v.is_number_unsigned() ? Int(v.get<std::uint64_t>()) : Int(v.get<std::int64_t>());
  if (v.is_string()) {
    Int x;
    if (x.set_str(v.get<std::string>(), 10) == 0) return x;
  }
  throw UsageError(what + ": expected an integer, got " + v.dump());
}

Rat to_rat(const json& v, const std::string& what) {
  if (v.is_number_integer()) return Rat(to_int(v, what));
  if (v.is_number_float()) return exact_rat(v.get<double>());
  if (v.is_string()) {
    Rat x;
    if (x.set_str(v.get<std::string>(), 10) == 0 && x.get_den() != 0) {
      x.canonicalize();
      return x;
    }
  }
  throw UsageError(what + ": expected a rational number, got " + v.dump());
}

std::vector<Int> int_list(const json& v, const std::string& what) {
  if (!v.is_array()) throw UsageError(what + ": expected a list");
  std::vector<Int> out;
  for (const auto& x : v) out.push_back(to_int(x, what));
  return out;
}

std::vector<std::int64_t> i64_list(const json& v, const std::string& what) {
  std::vector<std::int64_t> out;
  for (const auto& x : int_list(v, what)) {
    if (!x.fits_slong_p()) throw UsageError(what + ": value out of range");
    out.push_back(x.get_si());
  }
  return out;
}

IntMat int_matrix(const json& v, const std::string& what) {
  if (!v.is_array() || v.empty()) throw UsageError(what + ": expected a nonempty list of rows");
  std::vector<std::vector<Int>> rows;
  for (const auto& r : v) rows.push_back(int_list(r, what));
  for (const auto& r : rows)
    if (r.size() != rows[0].size() || r.empty()) throw UsageError(what + ": rows must share a positive length");
  return IntMat::from_rows(rows);
}

// One component per entry; each component lists monomial coefficients c_0, c_1, ...
PolyVec poly_from_json(const json& v, const std::string& what) {
  if (!v.is_array() || v.empty()) throw UsageError(what + ": expected a nonempty list of components");
  std::vector<IntValuedPoly> comps;
  for (const auto& c : v) {
    if (!c.is_array() || c.empty()) throw UsageError(what + ": each component is a nonempty coefficient list");
    std::vector<Rat> coeffs;
    for (const auto& x : c) coeffs.push_back(to_rat(x, what));
    try {
      comps.push_back(IntValuedPoly::from_monomial(coeffs));
    } catch (const std::invalid_argument& e) {
      throw UsageError(what + ": " + e.what());
    }
  }
  return PolyVec(std::move(comps));
}

json poly_json(const PolyVec& p) {
  json a = json::array();
  for (const auto& c : p.components()) {
    json row = json::array();
    for (const auto& x : c.monomial()) row.push_back(x.get_den() == 1 ? json_int(x.get_num()) : json(rat_str(x)));
    a.push_back(row);
  }
  return a;
}

QBoundOptions qbound_options(const ExperimentConfig& c) {
  QBoundOptions o;
  o.hua_constant = c.get_real("hua_constant");
  o.q0_cap = c.get_uint("q0_cap");
  return o;
}

json qbound_json(const QBound& q) {
  json j;
  j["q0"] = q.q0;
  j["q"] = json_int(q.q);
  return j;
}

Table coverage_table(const CoverageReport& r) {
  Table t{{"k", "covered", "total", "fraction", "covered_verdict", "total_verdict", "full"}, {}};
  for (const auto& c : r.per_k)
    t.rows.push_back({std::to_string(c.k), std::to_string(c.covered), std::to_string(c.total),
                      num_str(static_cast<Real>(c.fraction())), std::to_string(c.covered_verdict),
                      std::to_string(c.total_verdict), c.full() ? "true" : "false"});
  return t;
}

json coverage_json(const CoverageReport& r) {
  json j;
  j["form"] = r.form;
  j["range"] = r.range;
  j["verdict_range"] = r.verdict_range;
  j["smallest_k"] = r.smallest_k ? json(*r.smallest_k) : json(nullptr);
  json rows = json::array();
  for (const auto& c : r.per_k) {
    json x;
    x["k"] = c.k;
    x["covered"] = c.covered;
    x["total"] = c.total;
    x["covered_verdict"] = c.covered_verdict;
    x["total_verdict"] = c.total_verdict;
    rows.push_back(x);
  }
  j["per_k"] = rows;
  j["note"] = "finite-window evidence only";
  return j;
}

json certificate_json(const FleeingCertificate& c) {
  json j;
  j["N"] = c.word_length;
  j["Q"] = json_ext(c.index);
  j["invariantFactors"] = json_ints(c.invariant_factors);
  j["generators"] = json_rows(c.generators);
  j["fullRank"] = c.full_rank;
  return j;
}

json span_json(const OrbitSpanCertificate& s) {
  json j = certificate_json(s.certificate);
  j["stable_depth"] = s.stable_depth;
  j["span_history"] = s.span_history;
  return j;
}

// ---- systems helpers -----------------------------------------------------

const std::vector<KeySpec> kSystemKeys = {
    {"moduli", Kind::List, nullptr, "moduli m_1..m_s of G"},
    {"action", Kind::List, nullptr, "images of the Z^r generators (default: coordinate action)"},
    {"set", Kind::List, nullptr, "members of B as flat indices or coordinate lists"},
    {"lattice", Kind::List, nullptr, "B = a_1 Z x ... x a_s Z"},
    {"density", Kind::Real, nullptr, "random B with this density (needs --seed)"},
    {"seed", Kind::Integer, nullptr, "random seed"},
};

FiniteSystem build_system(const ExperimentConfig& c) {
  const auto moduli_i = i64_list(c.get("moduli"), "--moduli");
  std::vector<std::uint64_t> moduli;
  for (auto m : moduli_i) {
    if (m <= 0) throw UsageError("--moduli: entries must be positive");
    moduli.push_back(static_cast<std::uint64_t>(m));
  }
  if (moduli.empty()) throw UsageError("--moduli: needs at least one modulus");
  std::vector<std::vector<std::int64_t>> action;
  if (c.has("action")) {
    for (const auto& g : c.get("action")) action.push_back(i64_list(g, "--action"));
  } else {
    for (std::size_t j = 0; j < moduli.size(); ++j) {
      std::vector<std::int64_t> e(moduli.size(), 0);
      e[j] = 1;
      action.push_back(e);
    }
  }
  try {
    return FiniteSystem(moduli, action);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

MeasSet build_set(const ExperimentConfig& c, const FiniteSystem& sys) {
  const int chosen = int(c.has("set")) + int(c.has("lattice")) + int(c.has("density"));
  if (chosen != 1) throw UsageError("give exactly one of --set, --lattice, --density");
  if (c.has("set")) {
    std::vector<std::size_t> members;
    for (const auto& x : c.get("set")) {
      if (x.is_array()) {
        std::vector<std::uint64_t> coords;
        for (auto v : i64_list(x, "--set")) coords.push_back(static_cast<std::uint64_t>(v));
        if (coords.size() != sys.moduli().size()) throw UsageError("--set: coordinate list has wrong length");
        members.push_back(sys.index(coords));
      } else {
        const Int v = to_int(x, "--set");
        if (v < 0 || v >= static_cast<unsigned long>(sys.size())) throw UsageError("--set: element outside the group");
        members.push_back(v.get_ui());
      }
    }
    return MeasSet::from_indices(sys, members);
  }
  if (c.has("lattice")) {
    const auto steps = i64_list(c.get("lattice"), "--lattice");
    if (steps.size() != sys.moduli().size()) throw UsageError("--lattice: one step per modulus");
    std::vector<bool> bits(sys.size());
    for (std::size_t x = 0; x < sys.size(); ++x) {
      const auto co = sys.coords(x);
      bool in = true;
      for (std::size_t i = 0; i < co.size(); ++i) {
        if (steps[i] <= 0) throw UsageError("--lattice: steps must be positive");
        in = in && co[i] % static_cast<std::uint64_t>(steps[i]) == 0;
      }
      bits[x] = in;
    }
    return MeasSet(sys, std::move(bits));
  }
  const double density = c.get_real("density");
  if (!(density > 0 && density <= 1)) throw UsageError("--density must lie in (0, 1]");
  return MeasSet::random(sys, density, c.seed());
}

json trace_json(const IncrementTrace& t) {
  json j;
  j["initial_density"] = rat_str(t.initial_density);
  json steps = json::array();
  for (const auto& s : t.steps) {
    json x;
    x["q"] = json_int(s.q);
    x["k"] = json_int(s.k);
    x["component"] = s.component;
    x["density"] = rat_str(s.density);
    steps.push_back(x);
  }
  j["steps"] = steps;
  j["k"] = json_int(t.k);
  j["component"] = t.component;
  j["final_density"] = rat_str(t.final_density);
  return j;
}

std::optional<Rat> delta_option(const ExperimentConfig& c) {
  if (!c.has("delta")) return std::nullopt;
  const double d = c.get_real("delta");
  if (!(d > 0)) throw UsageError("--delta must be positive");
  return exact_rat(d);
}

double eps_value(const ExperimentConfig& c) {
  const double e = c.get_real("eps");
  if (!(e > 0 && e < 1)) throw UsageError("--eps must lie in (0, 1)");
  return e;
}

RunResult base_result(const ExperimentConfig& c) {
  RunResult r;
  r.experiment = c.experiment();
  r.parameters = c.resolved();
  return r;
}

// ---- experiments ---------------------------------------------------------

RunResult run_expsum_scan(const ExperimentConfig& c) {
  RunResult r = base_result(c);
  const auto degree = c.get_int("degree");
  const auto qmax = c.get_int("qmax");
  const auto trials = c.get_int("trials");
  const Int cap = Int(static_cast<long>(c.get_int("complexity")));
  if (degree < 2) throw UsageError("--degree must be at least 2");
  if (qmax < 1 || trials < 1) throw UsageError("--qmax and --trials must be positive");
  if (cap < 1) throw UsageError("--complexity must be positive");
  const auto rows = hua_decay_scan(static_cast<unsigned>(degree), cap, static_cast<std::uint64_t>(qmax),
                                   static_cast<unsigned>(trials), c.seed());
  const Real hc = static_cast<Real>(c.get_real("hua_constant"));
  Table t{{"q", "worst_magnitude", "q_prime"}, {}};
  json out = json::array();
  std::vector<std::uint64_t> violations;
  for (const auto& row : rows) {
    const Real bound = hc * real_pow(static_cast<Real>(row.q) / static_cast<Real>(cap.get_ui()), Real(-1) / degree);
    if (row.q > 1 && row.worst_magnitude > bound) violations.push_back(row.q);
    t.rows.push_back({std::to_string(row.q), num_str(row.worst_magnitude), row.q_prime.get_str()});
    json x;
    x["q"] = row.q;
    x["worst_magnitude"] = num_str(row.worst_magnitude);
    x["q_prime"] = json_int(row.q_prime);
    out.push_back(x);
  }
  r.payload["rows"] = out;
  r.payload["bound"] = "hua_constant * (q / complexity)^(-1/degree)";
  r.payload["violations"] = violations;
  r.table = std::move(t);
  if (c.get_bool("check_bound") && !violations.empty()) {
    r.verified = false;
    r.failure = "worst normalized sum exceeds the bound at q = " + std::to_string(violations.front());
  }
  return r;
}

// max over q <= bound, a in [0,q)^r with gcd(a, q) = 1 of gcd(C a, q)
std::uint64_t brute_complexity(const IntMat& cm, std::uint64_t bound) {
  const std::size_t r = cm.cols(), dd = cm.rows();
  std::vector<std::vector<std::int64_t>> rows(dd, std::vector<std::int64_t>(r));
  std::uint64_t best = 1;
  for (std::uint64_t q = 1; q <= bound; ++q) {
    for (std::size_t j = 0; j < dd; ++j)
      for (std::size_t i = 0; i < r; ++i) {
        Int v;
        mpz_fdiv_r_ui(v.get_mpz_t(), cm(j, i).get_mpz_t(), q);
        rows[j][i] = static_cast<std::int64_t>(v.get_ui());
      }
    std::vector<std::uint64_t> a(r, 0);
    for (;;) {
      std::uint64_t ga = q;
      for (auto x : a) ga = std::gcd(ga, x);
      if (ga == 1) {
        std::uint64_t g = q;
        for (std::size_t j = 0; j < dd && g > best; ++j) {
          unsigned __int128 s = 0;
          for (std::size_t i = 0; i < r; ++i) s += static_cast<unsigned __int128>(rows[j][i]) * a[i];
          g = std::gcd(g, static_cast<std::uint64_t>(s % q));
        }
        best = std::max(best, g);
      }
      std::size_t pos = 0;
      while (pos < r && ++a[pos] == q) a[pos++] = 0;
      if (pos == r) break;
    }
  }
  return best;
}

RunResult run_poly_complexity(const ExperimentConfig& c) {
  RunResult r = base_result(c);
  const PolyVec input = poly_from_json(c.get("poly"), "--poly");
  PolyVec p = input;
  Int scale = 1;
  if (!input.has_integer_monomial_coeffs()) {
    auto rs = rescale_to_integer_coeffs(input);
    p = rs.poly;
    scale = rs.scale;
  }
  const CoeffMatrix cm = coeff_matrix(p);
  const ExtInt q = mult_complexity(p);
  r.payload["dimension"] = p.dim();
  r.payload["degree"] = p.degree();
  r.payload["scale"] = json_int(scale);
  r.payload["poly"] = poly_json(p);
  r.payload["coeff_matrix"] = json_mat(cm.matrix);
  r.payload["invariant_factors"] = json_ints(invariant_factors(cm.matrix));
  r.payload["mult_complexity"] = json_ext(q);
  r.payload["hyperplane_fleeing"] = hyperplane_fleeing(p);
  const auto bq = c.get_int("brute_q");
  if (bq > 0) {
    if (p.dim() > 3 || bq > 200) throw UsageError("--brute_q needs r <= 3 and a bound of at most 200");
    const auto bound = static_cast<std::uint64_t>(bq);
    const std::uint64_t brute = brute_complexity(cm.matrix, bound);
    std::uint64_t expected = bound;
    if (!q.is_infinite()) {
      expected = 1;
      for (std::uint64_t m = 1; m <= bound; ++m) {
        Int g;
        mpz_gcd_ui(g.get_mpz_t(), q.value().get_mpz_t(), m);
        expected = std::max<std::uint64_t>(expected, g.get_ui());
      }
    }
    r.payload["brute_force"] = {{"q_bound", bound}, {"max_gcd", brute}, {"predicted", expected}};
    if (brute != expected) {
      r.verified = false;
      r.failure = "brute force gives " + std::to_string(brute) + ", invariant factors predict " + std::to_string(expected);
    }
  }
  return r;
}

RunResult run_orbit_build(const ExperimentConfig& c) {
  RunResult r = base_result(c);
  std::vector<IntMat> gens;
  const json& gj = c.get("generators");
  if (!gj.is_array() || gj.empty()) throw UsageError("--generators: expected a nonempty list of matrices");
  for (const auto& g : gj) gens.push_back(int_matrix(g, "--generators"));
  const std::string action = c.get_string("action");
  std::optional<OrbitSpec> spec;
  try {
    if (action == "linear")
      spec = OrbitSpec::linear(gens, int_list(c.get("base"), "--base"));
    else if (action == "adjoint")
      spec = OrbitSpec::adjoint(gens, int_matrix(c.get("base"), "--base"));
    else
      throw UsageError("--action must be linear or adjoint");
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const OrbitPolynomial op = orbit_poly(*spec);
  r.payload["dimension"] = spec->dim();
  r.payload["word_length"] = spec->word_length();
  r.payload["degree_before_rescale"] = op.degree_before_rescale;
  r.payload["degree_cap"] = json_int(op.degree_cap);
  r.payload["scale"] = json_int(op.scale);
  r.payload["poly"] = poly_json(op.poly);
  r.payload["mult_complexity"] = json_ext(mult_complexity(op.poly));
  r.payload["hyperplane_fleeing"] = hyperplane_fleeing(op.poly);
  const auto range = c.get_int("check_range");
  if (range < 0) throw UsageError("--check_range must be nonnegative");
  json checks = json::array();
  for (long n = -range; n <= range; ++n) {
    const auto value = op.poly.eval(Int(n));
    const auto word = apply_word(*spec, orbit_poly_exponents(*spec, op.scale, Int(n)));
    if (value != word) {
      r.verified = false;
      r.failure = "P(" + std::to_string(n) + ") is not the word value";
      break;
    }
    checks.push_back(n);
  }
  r.payload["checked_n"] = checks;
  if (Int(op.degree_before_rescale) > op.degree_cap) {
    r.verified = false;
    r.failure = "degree exceeds the cap";
  }
  return r;
}

RunResult run_orbit_certify(const ExperimentConfig& c) {
  RunResult r = base_result(c);
  const std::string form = c.get_string("form");
  const auto depth = c.get_int("depth");
  if (depth < 1 || depth > 8) throw UsageError("--depth must lie in [1, 8]");
  if (form == "so21") {
    const So21Setup s = so21_setup();
    r.payload["identity_resolved"] = s.identity_resolved;
    r.payload["identity_printed_forward"] = s.identity_printed_forward;
    r.payload["identity_printed_inverse"] = s.identity_printed_inverse;
    r.payload["v0"] = json_mat(s.v0);
    r.payload["certificate"] = span_json(certify_so21_bounds(static_cast<unsigned>(depth)));
    return r;
  }
  if (form != "companion") throw UsageError("--form must be companion or so21");
  const auto d = c.get_int("d");
  if (d < 2 || d > 4) throw UsageError("--d must lie in [2, 4]");
  const auto base = certify_companion_bounds(static_cast<std::size_t>(d), static_cast<unsigned>(depth));
  r.payload["d"] = d;
  r.payload["v0"] = json_mat(base.v0);
  r.payload["certificate"] = span_json(base.span);
  const auto samples = c.get_int("samples");
  if (samples < 0) throw UsageError("--samples must be nonnegative");
  if (samples > 0) {
    std::mt19937_64 rng(c.seed());
    const auto bound = c.get_int("coeff_bound");
    std::uniform_int_distribution<std::int64_t> coeff(-bound, bound);
    json list = json::array();
    bool identical = true;
    for (std::int64_t s = 0; s < samples; ++s) {
      std::vector<Int> a(static_cast<std::size_t>(d));
      for (std::int64_t i = 0; i + 1 < d; ++i) a[static_cast<std::size_t>(i)] = Int(static_cast<long>(coeff(rng)));
      const auto cert = certify_companion_bounds(static_cast<std::size_t>(d), static_cast<unsigned>(depth), a);
      const bool same = cert.span.certificate.word_length == base.span.certificate.word_length &&
                        cert.span.certificate.index == base.span.certificate.index &&
                        cert.span.certificate.invariant_factors == base.span.certificate.invariant_factors &&
                        cert.v0 == base.v0;
      identical = identical && same;
      json x;
      x["coeffs"] = json_ints(a);
      x["identical"] = same;
      x["difference_index"] = json_ext(cert.sample->index);
      x["full_rank"] = cert.sample->full_rank;
      list.push_back(x);
    }
    r.payload["samples"] = list;
    r.payload["identical"] = identical;
    if (!identical) {
      r.verified = false;
      r.failure = "certificate depends on the companion coefficients";
    }
  }
  return r;
}

RunResult run_system_increment(const ExperimentConfig& c) {
  RunResult r = base_result(c);
  const FiniteSystem sys = build_system(c);
  const MeasSet b = build_set(c, sys);
  const Int q = to_int(c.get("q"), "--q");
  if (q < 1) throw UsageError("--q must be positive");
  const Rat delta = exact_rat(c.get_real("delta"));
  if (delta <= 0) throw UsageError("--delta must be positive");
  if (b.count() == 0) throw UsageError("B is empty");
  const auto trace = measure_increment(sys, b, q, delta);
  r.payload["group_order"] = sys.size();
  r.payload["measure"] = rat_str(b.measure());
  r.payload["trace"] = trace_json(trace);
  const bool ok = increment_bound_holds(trace, delta);
  r.payload["bound_holds"] = ok;
  Table t{{"step", "q", "k", "component", "density"}, {}};
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    t.rows.push_back({std::to_string(i + 1), s.q.get_str(), s.k.get_str(), std::to_string(s.component), rat_str(s.density)});
  }
  r.table = std::move(t);
  if (!ok) {
    r.verified = false;
    r.failure = "increment trace violates (1+delta)^J mu(B) <= 1";
  }
  return r;
}

RunResult run_system_sarkozy(const ExperimentConfig& c) {
  RunResult r = base_result(c);
  const FiniteSystem sys = build_system(c);
  const MeasSet b = build_set(c, sys);
  if (b.count() == 0) throw UsageError("B is empty");
  const std::string family = c.get_string("family");
  r.payload["group_order"] = sys.size();
  r.payload["measure"] = rat_str(b.measure());
  if (family == "linear") {
    const Int a1 = to_int(c.get("a1"), "--a1");
    const auto k0 = c.get_int("k0");
    if (k0 < 1) throw UsageError("--k0 must be positive");
    const auto rep = linear_family_obstruction(sys, b, a1, static_cast<unsigned>(k0));
    json w = json::array();
    for (const auto& x : rep.witnesses) w.push_back({{"k", x.k}, {"a0", x.a0 ? json(*x.a0) : json(nullptr)}});
    r.payload["witnesses"] = w;
    r.payload["all_defeated"] = rep.all_defeated;
    if (rep.all_defeated) {
      r.message = "expected failure reproduced";
    } else {
      r.verified = false;
      r.failure = "some k <= k0 admits a return for every a0";
    }
    return r;
  }
  if (family != "polys") throw UsageError("--family must be polys or linear");
  const json& pj = c.get("polys");
  const auto declared = int_list(c.get("complexity"), "--complexity");
  if (!pj.is_array() || pj.size() != declared.size())
    throw UsageError("--polys and --complexity must have the same length");
  std::vector<FamilyMember> members;
  for (std::size_t i = 0; i < pj.size(); ++i) members.push_back({poly_from_json(pj[i], "--polys"), declared[i]});
  SarkozyOptions opt;
  opt.qbound = qbound_options(c);
  opt.delta = delta_option(c);
  const auto rep = uniform_sarkozy_experiment(sys, b, members, eps_value(c), opt);
  r.payload["degree"] = rep.degree;
  r.payload["complexity_bound"] = json_int(rep.complexity_bound);
  r.payload["qbound"] = qbound_json(rep.q);
  r.payload["delta"] = rat_str(rep.delta);
  r.payload["trace"] = trace_json(rep.trace);
  r.payload["k"] = json_int(rep.k);
  json mem = json::array();
  for (const auto& m : rep.members)
    mem.push_back({{"complexity", json_int(m.complexity)},
                   {"n", m.n ? json_int(*m.n) : json(nullptr)},
                   {"best_measure", rat_str(m.measure)}});
  r.payload["members"] = mem;
  r.payload["within_bound"] = rep.within_bound;
  r.payload["success"] = rep.success;
  if (!rep.success || !rep.within_bound) {
    r.verified = false;
    r.failure = rep.success ? "k exceeds q^(log(1/eps)/log(1+delta))" : "a family member has no return at k = " + rep.k.get_str();
  }
  return r;
}

RunResult run_system_bog(const ExperimentConfig& c) {
  RunResult r = base_result(c);
  const FiniteSystem sys = build_system(c);
  if (sys.rank() != 2) throw UsageError("system bog needs a Z^2 action (two generators)");
  const MeasSet b = build_set(c, sys);
  if (b.count() == 0) throw UsageError("B is empty");
  BogOptions opt;
  opt.qbound = qbound_options(c);
  opt.delta = delta_option(c);
  const auto rep = bogolyubov_iterate(sys, b, int_list(c.get("r"), "--r"), eps_value(c), opt);
  r.payload["group_order"] = sys.size();
  r.payload["measure"] = rat_str(b.measure());
  r.payload["delta"] = rat_str(rep.delta);
  r.payload["stage_bound"] = rep.stage_bound;
  json st = json::array();
  for (const auto& s : rep.stages)
    st.push_back({{"complexity", json_int(s.complexity)},
                  {"qbound", s.q ? qbound_json(*s.q) : json(nullptr)},
                  {"density", rat_str(s.density)},
                  {"component", s.component},
                  {"equidistributed", s.equidistributed}});
  r.payload["stages"] = st;
  r.payload["k"] = json_int(rep.k);
  r.payload["targets"] = rep.targets;
  r.payload["failures"] = rep.failures;
  r.payload["verified"] = rep.verified;
  if (!rep.verified) {
    r.verified = false;
    r.failure = "no return along P_{k,c} for c = " + std::to_string(*rep.first_failure);
  }
  return r;
}

std::vector<std::int64_t> naive_image(const std::vector<std::int64_t>& d, QuadForm f, std::int64_t m) {
  std::set<std::int64_t> out;
  for (auto x : d)
    for (auto y : d)
      for (auto z : d) {
        const auto v = quadform_eval(f, x, y, z);
        if (v >= -m && v <= m) out.insert(v);
      }
  return {out.begin(), out.end()};
}

RunResult run_scan_quadform(const ExperimentConfig& c) {
  RunResult r = base_result(c);
  const QuadForm form = [&] {
    try {
      return parse_quadform(c.get_string("form"));
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--form: ") + e.what());
    }
  }();
  const auto l = c.get_int("L");
  if (l < 1 || l > 100000) throw UsageError("--L must lie in [1, 100000]");
  const double density = c.get_real("density");
  if (!(density > 0 && density <= 1)) throw UsageError("--density must lie in (0, 1]");
  const std::int64_t m = c.has("M") ? c.get_int("M") : l;
  if (m < 0) throw UsageError("--M must be nonnegative");
  const auto k_max = c.get_int("k_max");
  if (k_max < 1) throw UsageError("--k_max must be positive");
  const Window b = Window::random(1, l, density, c.seed());
  if (b.count() == 0) throw UsageError("random window is empty");
  const auto d = diff_set(b);
  const auto budget = static_cast<std::size_t>(c.get_int("budget_mb")) << 20;
  const auto image = quadform_image(d, form, m, budget);
  const auto cover = find_k_cover(image, m, k_max, quadform_name(form));
  r.payload["members"] = b.count();
  r.payload["window_density"] = num_str(static_cast<Real>(b.density()));
  r.payload["difference_set_size"] = d.size();
  r.payload["image_size"] = image.size();
  r.payload["coverage"] = coverage_json(cover);
  const auto sample = c.get_int("oracle_sample");
  if (sample > 0) {
    std::vector<std::int64_t> sub;
    for (auto x : d)
      if (std::abs(x) <= sample) sub.push_back(x);
    if (sub.size() > 200) sub.resize(200);
    const bool same = quadform_image(sub, form, m) == naive_image(sub, form, m);
    r.payload["oracle"] = {{"subset_size", sub.size()}, {"agrees", same}};
    if (!same) {
      r.verified = false;
      r.failure = "meet-in-the-middle image differs from the triple loop";
    }
  }
  r.table = coverage_table(cover);
  return r;
}

RunResult run_scan_bog(const ExperimentConfig& c) {
  RunResult r = base_result(c);
  const auto l = c.get_int("L");
  if (l < 1 || l > 400) throw UsageError("--L must lie in [1, 400]");
  const std::int64_t m = c.has("M") ? c.get_int("M") : 2 * l;
  const auto k_max = c.get_int("k_max");
  if (m < 0 || k_max < 1) throw UsageError("--M must be nonnegative and --k_max positive");
  std::optional<Window> e;
  if (c.has("lattice") == c.has("density")) throw UsageError("give exactly one of --lattice, --density");
  if (c.has("lattice")) {
    const auto steps = i64_list(c.get("lattice"), "--lattice");
    if (steps.size() != 2 || steps[0] <= 0 || steps[1] <= 0) throw UsageError("--lattice: two positive steps");
    e = Window::lattice_2d(l, steps[0], steps[1]);
  } else {
    const double density = c.get_real("density");
    if (!(density > 0 && density <= 1)) throw UsageError("--density must lie in (0, 1]");
    e = Window::random(2, l, density, c.seed(), -l);
  }
  if (e->count() == 0) throw UsageError("window is empty");
  const auto cover = poly_bog_scan(*e, i64_list(c.get("r"), "--r"), m, k_max);
  r.payload["members"] = e->count();
  r.payload["coverage"] = coverage_json(cover);
  r.table = coverage_table(cover);
  return r;
}

RunResult run_scan_bohr(const ExperimentConfig& c) {
  RunResult r = base_result(c);
  const auto l = c.get_int("L");
  if (l < 1 || l > 20000) throw UsageError("--L must lie in [1, 20000]");
  const double eps = c.get_real("eps");
  const auto k_max = c.get_int("k_max");
  if (k_max < 1) throw UsageError("--k_max must be positive");
  const std::string ts = c.get_string("theta");
  const bool golden = ts == "golden";
  const Rat theta = golden ? golden_convergent(4 * l) : to_rat(json(ts), "--theta");
  const auto rep = [&] {
    try {
      return bohr_negative_control(theta, eps, l, k_max);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  r.payload["theta"] = rat_str(theta);
  r.payload["rational_control"] = !golden;
  r.payload["members"] = rep.members;
  r.payload["values"] = rep.values;
  r.payload["contained_in_bohr_4eps"] = rep.contained;
  json esc = json::array();
  for (const auto& [k, w] : rep.escapes) esc.push_back({{"k", k}, {"escape", w ? json(*w) : json(nullptr)}});
  r.payload["escapes"] = esc;
  r.payload["no_k_covers"] = rep.no_k_covers;
  r.payload["coverage"] = coverage_json(rep.coverage);
  r.table = coverage_table(rep.coverage);
  if (!rep.contained) {
    r.verified = false;
    r.failure = "value " + std::to_string(*rep.outside_witness) + " lies outside B(theta, 4 eps)";
  } else if (golden && !rep.no_k_covers) {
    r.verified = false;
    r.failure = "some k <= k_max covers the window for irrational-type theta";
  } else if (!golden) {
    r.message = "rational theta: coverage by some k is expected";
  }
  return r;
}

const std::vector<KeySpec> kQBoundKeys = {
    {"hua_constant", Kind::Real, 10.0, "assumed constant in the Hua bound"},
    {"q0_cap", Kind::Integer, 100000, "cap on the threshold q0"},
};

std::vector<KeySpec> concat(std::vector<KeySpec> a, const std::vector<KeySpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<Experiment> build_registry() {
  std::vector<Experiment> v;
  v.push_back({"expsum", "scan", "worst normalized complete sums for random primitive polynomials",
               {{"degree", Kind::Integer, 2, "polynomial degree D"},
                {"complexity", Kind::Integer, 1, "cap Q on gcd of nonconstant coefficients with q"},
                {"qmax", Kind::Integer, 200, "largest modulus"},
                {"trials", Kind::Integer, 16, "random polynomials per modulus"},
                {"seed", Kind::Integer, nullptr, "random seed (required)"},
                {"hua_constant", Kind::Real, 10.0, "constant in the reported bound"},
                {"check_bound", Kind::Bool, false, "fail when a row exceeds the bound"}},
               run_expsum_scan, selftest_expsum});
  v.push_back({"poly", "complexity", "multiplicative complexity of a polynomial vector",
               {{"poly", Kind::List, nullptr, "components as monomial coefficient lists"},
                {"brute_q", Kind::Integer, 0, "cross-check by brute force over q up to this bound"}},
               run_poly_complexity, selftest_linalg_poly});
  v.push_back({"orbit", "build", "orbit polynomial of a unipotent word",
               {{"generators", Kind::List, nullptr, "unipotent matrices u_1..u_N"},
                {"base", Kind::List, nullptr, "base vector (linear) or trace-zero matrix (adjoint)"},
                {"action", Kind::String, "linear", "linear or adjoint"},
                {"check_range", Kind::Integer, 5, "check P(n) against word values for |n| <= range"}},
               run_orbit_build, selftest_orbits});
  v.push_back({"orbit", "certify", "coset-fleeing certificate for companion or second-form orbits",
               {{"form", Kind::String, "companion", "companion or so21"},
                {"d", Kind::Integer, 2, "matrix size for companion orbits"},
                {"depth", Kind::Integer, 4, "word depth cap"},
                {"samples", Kind::Integer, 0, "random companion matrices to compare"},
                {"coeff_bound", Kind::Integer, 20, "companion coefficients drawn from [-b, b]"},
                {"seed", Kind::Integer, nullptr, "random seed (required with samples)"}},
               run_orbit_certify, selftest_orbits});
  v.push_back({"system", "increment", "measure-increment trace on a finite system",
               concat(kSystemKeys, {{"q", Kind::Integer, nullptr, "step q"},
                                    {"delta", Kind::Real, 0.5, "equidistribution slack"}}),
               run_system_increment, selftest_systems});
  v.push_back({"system", "sarkozy", "uniform recurrence for a polynomial family",
               concat(concat(kSystemKeys, {{"family", Kind::String, "polys", "polys or linear"},
                                           {"polys", Kind::List, nullptr, "family members (component lists)"},
                                           {"complexity", Kind::List, nullptr, "declared complexity per member"},
                                           {"eps", Kind::Real, 0.1, "eps"},
                                           {"delta", Kind::Real, nullptr, "override for eps^4/12"},
                                           {"a1", Kind::Integer, 12, "slope of the linear family"},
                                           {"k0", Kind::Integer, 4, "largest k defeated by the linear family"}}),
                      kQBoundKeys),
               run_system_sarkozy, selftest_systems});
  v.push_back({"system", "bog", "Bogolyubov-type iteration on a Z^2 system",
               concat(concat(kSystemKeys, {{"r", Kind::List, json::array({0, 0, 1}), "monomial coefficients of R"},
                                           {"eps", Kind::Real, 0.1, "eps"},
                                           {"delta", Kind::Real, nullptr, "override for eps^4/12"}}),
                      kQBoundKeys),
               run_system_bog, selftest_systems});
  v.push_back({"scan", "quadform", "image of a quadratic form on B - B",
               {{"form", Kind::String, "xy-z2", "xy-z2, x2+y2-z2 or x2-y2-z2"},
                {"L", Kind::Integer, nullptr, "B is random in [0, L]"},
                {"density", Kind::Real, 0.3, "density of B"},
                {"seed", Kind::Integer, nullptr, "random seed (required)"},
                {"M", Kind::Integer, nullptr, "image range (default L); verdict on M/2"},
                {"k_max", Kind::Integer, 8, "largest k tried"},
                {"budget_mb", Kind::Integer, 2048, "table memory budget"},
                {"oracle_sample", Kind::Integer, 0, "compare against a triple loop on D cap [-s, s]"}},
               run_scan_quadform, selftest_diffscan});
  v.push_back({"scan", "bog", "image of x + R(y) on E - E",
               {{"L", Kind::Integer, 40, "E lies in [-L, L]^2"},
                {"lattice", Kind::List, nullptr, "E = a Z x b Z"},
                {"density", Kind::Real, nullptr, "random E with this density"},
                {"seed", Kind::Integer, nullptr, "random seed"},
                {"r", Kind::List, json::array({0, 0, 1}), "monomial coefficients of R"},
                {"M", Kind::Integer, nullptr, "image range (default 2L); verdict on M/2"},
                {"k_max", Kind::Integer, 10, "largest k tried"}},
               run_scan_bog, selftest_diffscan});
  v.push_back({"scan", "bohr", "Bohr-set negative control",
               {{"L", Kind::Integer, 2000, "B lies in [0, L)"},
                {"eps", Kind::Real, 0.1, "Bohr radius, below 1/8"},
                {"theta", Kind::String, "golden", "golden or a rational a/b"},
                {"k_max", Kind::Integer, 10, "largest k tried"}},
               run_scan_bohr, selftest_diffscan});
  return v;
}

}  // namespace

const std::vector<Experiment>& experiments() {
  static const std::vector<Experiment> registry = build_registry();
  return registry;
}

const Experiment& find_experiment(const std::string& id) {
  for (const auto& e : experiments())
    if (e.id() == id) return e;
  throw UsageError("unknown experiment " + id);
}

RunResult run(const ExperimentConfig& config) {
  const Experiment& e = find_experiment(config.experiment());
  try {
    return e.run(config);
  } catch (const VerificationError& err) {
    RunResult r;
    r.experiment = config.experiment();
    r.parameters = config.resolved();
    r.verified = false;
    r.failure = err.what();
    return r;
  }
}

Format parse_format(const std::string& name) {
  if (name == "json") return Format::Json;
  if (name == "csv") return Format::Csv;
  throw UsageError("--format must be json or csv");
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

void emit(const RunResult& result, Format format, std::ostream& out) {
  if (format == Format::Csv) {
    if (!result.table) throw UsageError("experiment " + result.experiment + " has no tabular output; use --format json");
    const Table& t = *result.table;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << csv_field(t.columns[i]);
    out << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
      out << "\n";
    }
    return;
  }
  json doc;
  doc["experiment"] = result.experiment;
  doc["version"] = kToolkitVersion;
  doc["seed"] = result.parameters.contains("seed") ? result.parameters["seed"] : json(nullptr);
  doc["parameters"] = result.parameters;
  doc["result"] = result.payload;
  doc["verified"] = result.verified;
  if (!result.failure.empty()) doc["failure"] = result.failure;
  if (!result.message.empty()) doc["message"] = result.message;
  if (result.wall_clock) doc["wall_clock_seconds"] = *result.wall_clock;
  out << doc.dump(2) << "\n";
}

void emit_to(const RunResult& result, Format format, const std::string& path) {
  if (path.empty() || path == "-") {
    emit(result, format, std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  emit(result, format, out);
  if (!out) throw std::runtime_error("write failed for output file " + path);
}

namespace {

struct Leaf {
  const Experiment* experiment;
  CLI::App* app;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, std::string> values;
  std::string config_path;
  std::string out_path;
  std::string format = "json";
  bool selftest = false;
  bool timing = false;
};

std::vector<SelftestCase> selftests_for(const std::string& group) {
  if (group == "expsum") return selftest_expsum();
  if (group == "poly") return selftest_linalg_poly();
  if (group == "orbit") return selftest_orbits();
  if (group == "system") return selftest_systems();
  return selftest_diffscan();
}

int run_selftest(const Experiment& e) {
  const auto cases = selftests_for(e.group);
  bool ok = true;
  for (const auto& c : cases) {
    std::cout << (c.ok ? "PASS " : "FAIL ") << e.id() << " " << c.name;
    if (!c.detail.empty()) std::cout << ": " << c.detail;
    std::cout << "\n";
    ok = ok && c.ok;
  }
  return ok ? 0 : 2;
}

int run_leaf(Leaf& leaf) {
  const Experiment& e = *leaf.experiment;
  if (leaf.selftest) return run_selftest(e);
  ExperimentConfig cfg = e.config();
  if (!leaf.config_path.empty()) cfg.load_file(leaf.config_path);
  for (const auto& [key, opt] : leaf.options)
    if (opt->count() > 0) cfg.set(key, leaf.values[key]);
  const Format format = parse_format(leaf.format);
  const auto start = std::chrono::steady_clock::now();
  RunResult result = run(cfg);
  if (leaf.timing)
    result.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit_to(result, format, leaf.out_path);
  if (!result.verified) {
    std::cerr << "verification failure: " << result.failure << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main_entry(int argc, char** argv) {
  CLI::App app{"qrec: quantitative polynomial recurrence toolkit"};
  app.set_version_flag("--version", kToolkitVersion);
  app.require_subcommand(1, 1);
  std::vector<std::unique_ptr<Leaf>> leaves;
  std::map<std::string, CLI::App*> groups;
  for (const auto& e : experiments()) {
    auto& group = groups[e.group];
    if (!group) {
      group = app.add_subcommand(e.group, e.group + " experiments");
      group->require_subcommand(1, 1);
    }
    auto leaf = std::make_unique<Leaf>();
    leaf->experiment = &e;
    leaf->app = group->add_subcommand(e.name, e.help);
    for (const auto& key : e.schema) {
      std::string help = key.help;
      if (!key.fallback.is_null()) help += " [default: " + key.fallback.dump() + "]";
      leaf->options[key.name] = leaf->app->add_option("--" + key.name, leaf->values[key.name], help);
    }
    leaf->app->add_option("--config", leaf->config_path, "flat key = value config file");
    leaf->app->add_option("--out", leaf->out_path, "output file (default stdout)");
    leaf->app->add_option("--format", leaf->format, "json or csv")->capture_default_str();
    leaf->app->add_flag("--selftest", leaf->selftest, "run built-in oracle checks and exit");
    leaf->app->add_flag("--timing", leaf->timing, "include wall-clock seconds in the output");
    leaves.push_back(std::move(leaf));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }
  try {
    for (auto& leaf : leaves)
      if (leaf->app->parsed()) return run_leaf(*leaf);
    return 1;
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const CapExceeded& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const VerificationError& err) {
    std::cerr << "verification failure: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}

}  // namespace qrec::cli
