#pragma once

// Experiment runner behind supershift_lab: one JSON config per run, CSV
// artifacts plus a summary JSON, and an exit status.
//
// Exit status: 0 all configured assertions pass, 1 an assertion failed,
// 2 invalid config, 3 I/O error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "supershift/casebook.hpp"
#include "supershift/discrete_taylor.hpp"
#include "supershift/errors.hpp"
#include "supershift/legendre.hpp"
#include "supershift/numeric.hpp"
#include "supershift/parallel.hpp"
#include "supershift/periodic.hpp"
#include "supershift/sampling.hpp"
#include "supershift/supershift.hpp"
#include "supershift/trigpoly.hpp"

namespace supershift::runner {

using nlohmann::json;

enum ExitStatus : int { kOk = 0, kAssertionFailed = 1, kConfigError = 2, kIoError = 3 };

inline constexpr unsigned kDefaultPrecision = 256;

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"superosc", "extrapolate", "taylor", "legendre-check",
                                          "kantorovich", "divergence", "periodic"};
  return s;
}

struct Options {
  std::string subcommand;  // empty: taken from the config
  std::filesystem::path config;
  std::filesystem::path out{"."};
  std::optional<unsigned> precision;
  std::optional<unsigned> threads;
  bool exact = false;
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Six significant digits, for log lines.
inline std::string brief(const Real& x) {
  std::ostringstream os;
  os << std::setprecision(6) << x.to_double();
  return os.str();
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Config access.

/// Accepts "p/q", integers and decimal/scientific literals, exactly.
inline Rational parse_rational(const std::string& text) {
  std::string s = text;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s.empty()) throw config_error("empty number");
  try {
    if (s.find('/') != std::string::npos) {
      Rational q(s);
      if (q.get_den() == 0) throw config_error("zero denominator in '" + text + "'");
      q.canonicalize();
      return q;
    }
    long exp10 = 0;
    auto e = s.find_first_of("eE");
    if (e != std::string::npos) {
      exp10 = std::stol(s.substr(e + 1));
      s = s.substr(0, e);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      exp10 -= static_cast<long>(s.size() - dot - 1);
      s.erase(dot, 1);
    }
    if (s == "-" || s == "+" || s.empty()) throw config_error("malformed number '" + text + "'");
    if (s[0] == '+') s.erase(0, 1);
    Integer m(s);
    Integer p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
    return exp10 >= 0 ? Rational(m * p10) : ratio(m, p10);
  } catch (const std::invalid_argument&) {
    throw config_error("malformed number '" + text + "'");
  } catch (const std::out_of_range&) {
    throw config_error("malformed number '" + text + "'");
  }
}

/// JSON numbers go through their shortest decimal form, so 0.7 reads as 7/10.
inline Rational parse_rational(const json& j) {
  if (j.is_number_integer()) return Rational(Integer(j.dump()));
  if (j.is_number()) return parse_rational(j.dump());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw config_error("expected a number, got " + j.dump());
}

/// A JSON object with a fixed set of accepted keys.
class Section {
 public:
  Section(const json& j, std::string where, const std::set<std::string>& allowed) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw config_error(where_ + ": expected an object");
    for (const auto& [k, v] : j_.items()) {
      if (!allowed.count(k)) throw config_error(where_ + ": unknown key '" + k + "'");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) const {
    if (!has(key)) throw config_error(where_ + ": missing key '" + key + "'");
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  Section section(const std::string& key, const std::set<std::string>& allowed) const {
    return Section(at(key), path(key), allowed);
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = {}) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      at(key);
    }
    if (!j_.at(key).is_string()) throw config_error(path(key) + ": expected a string");
    return j_.at(key).get<std::string>();
  }

  long integer(const std::string& key, std::optional<long> fallback = {}) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      at(key);
    }
    if (!j_.at(key).is_number_integer()) throw config_error(path(key) + ": expected an integer");
    return j_.at(key).get<long>();
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_boolean()) throw config_error(path(key) + ": expected true or false");
    return j_.at(key).get<bool>();
  }

  Rational rational(const std::string& key, std::optional<Rational> fallback = {}) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      at(key);
    }
    try {
      return parse_rational(j_.at(key));
    } catch (const config_error& e) {
      throw config_error(path(key) + ": " + e.what());
    }
  }

  double number(const std::string& key, std::optional<double> fallback = {}) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      at(key);
    }
    if (!j_.at(key).is_number()) throw config_error(path(key) + ": expected a number");
    return j_.at(key).get<double>();
  }

  /// Non-empty list of positive, strictly increasing integers.
  std::vector<int> n_list(const std::string& key) const {
    const json& a = at(key);
    if (!a.is_array() || a.empty()) throw config_error(path(key) + ": expected a non-empty array");
    std::vector<int> out;
    for (const auto& v : a) {
      if (!v.is_number_integer() || v.get<long>() < 1 || v.get<long>() > 100000) {
        throw config_error(path(key) + ": entries must be positive integers");
      }
      out.push_back(v.get<int>());
      if (out.size() > 1 && out.back() <= out[out.size() - 2]) throw config_error(path(key) + ": must be increasing");
    }
    return out;
  }

  std::vector<Rational> rational_list(const std::string& key) const {
    const json& a = at(key);
    if (!a.is_array() || a.empty()) throw config_error(path(key) + ": expected a non-empty array");
    std::vector<Rational> out;
    for (const auto& v : a) {
      try {
        out.push_back(parse_rational(v));
      } catch (const config_error& e) {
        throw config_error(path(key) + ": " + e.what());
      }
    }
    return out;
  }

  /// Either an explicit list or {"lo", "hi", "step"}.
  std::vector<Rational> grid(const std::string& key) const {
    const json& g = at(key);
    if (g.is_array()) return rational_list(key);
    Section s(g, path(key), {"lo", "hi", "step"});
    const Rational lo = s.rational("lo"), hi = s.rational("hi"), step = s.rational("step", Rational(1, 4));
    if (step <= 0) throw config_error(path(key) + ": step must be positive");
    if (hi < lo) throw config_error(path(key) + ": hi below lo");
    if ((hi - lo) / step > 100000) throw config_error(path(key) + ": too many grid points");
    std::vector<Rational> out;
    for (Rational x = lo; x <= hi; x += step) out.push_back(x);
    return out;
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
};

inline std::vector<Real> to_reals(const std::vector<Rational>& q) {
  std::vector<Real> r;
  r.reserve(q.size());
  for (const auto& x : q) r.emplace_back(x);
  return r;
}

/// {"generator": "zero" | "c_over_n" | "c_over_log", "c": rational}.
inline EpsilonSequence parse_epsilon(const json& j, const std::string& where) {
  Section s(j, where, {"generator", "c"});
  const std::string g = s.string("generator", std::string("zero"));
  const Rational c = s.rational("c", Rational(0));
  if (c < 0) throw config_error(where + ".c must be non-negative");
  if (g == "zero") return EpsilonSequence::zero();
  if (g == "c_over_n") return EpsilonSequence::c_over_n(c);
  if (g == "c_over_log") return EpsilonSequence::c_over_log(c);
  throw config_error(where + ".generator: unknown generator '" + g + "'");
}

inline EpsilonSequence epsilon_or_zero(const Section& s, const std::string& key) {
  return s.has(key) ? parse_epsilon(s.at(key), s.path(key)) : EpsilonSequence::zero();
}

/// Period: a rational, or "<rational>pi".
inline Real parse_period(const json& j, const std::string& where) {
  if (j.is_string()) {
    std::string t = j.get<std::string>();
    if (t.size() >= 2 && t.substr(t.size() - 2) == "pi") {
      t = t.substr(0, t.size() - 2);
      const Rational c = t.empty() ? Rational(1) : parse_rational(t);
      return Real(c) * pi();
    }
  }
  try {
    return Real(parse_rational(j));
  } catch (const config_error& e) {
    throw config_error(where + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Outcomes.

struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Artifact {
  std::string suffix;  // "" for the main CSV
  std::string csv;
};

struct Outcome {
  std::vector<Assertion> assertions;
  json verdicts = json::object();
  json residuals = json::object();
  json details = json::object();
  std::vector<Artifact> artifacts;

  void check(std::string name, bool pass, std::string detail) {
    assertions.push_back({std::move(name), pass, std::move(detail)});
  }
  void residual(const std::string& name, const Real& r) {
    residuals[name] = {{"value", r.to_double()}, {"decimal", to_decimal(r)}};
  }
  bool passed() const {
    for (const auto& a : assertions) {
      if (!a.pass) return false;
    }
    return true;
  }
};

struct Context {
  unsigned threads = 1;
  bool exact = false;
};

inline const std::set<std::string>& common_keys() {
  static const std::set<std::string> k{"subcommand", "description", "precision", "threads", "expect"};
  return k;
}

inline std::set<std::string> keys(std::initializer_list<std::string> extra) {
  std::set<std::string> k = common_keys();
  k.insert(extra);
  return k;
}

inline void expect_verdict(Outcome& out, const Section& expect, const std::string& name, Verdict got) {
  if (!expect.has("verdict")) return;
  const std::string want = expect.string("verdict");
  if (want != "Converging" && want != "Diverging" && want != "Inconclusive") {
    throw config_error(expect.path("verdict") + ": unknown verdict '" + want + "'");
  }
  out.check(name + " verdict", to_string(got) == want, "expected " + want + ", got " + to_string(got));
}

inline void no_exact(const Context& ctx, const std::string& sub) {
  if (ctx.exact) throw config_error("--exact is not supported by '" + sub + "'");
}

inline VerdictPolicy parse_policy(const Section& s) {
  VerdictPolicy p;
  if (s.has("threshold")) p.threshold = s.number("threshold");
  p.contraction = s.number("contraction", p.contraction);
  p.divergence_level = s.number("divergence_level", p.divergence_level);
  return p;
}

inline json series_json(const std::map<int, Real>& m) {
  json j = json::object();
  for (const auto& [N, e] : m) j[std::to_string(N)] = e.to_double();
  return j;
}

// ---------------------------------------------------------------------------
// superosc

inline Outcome run_superosc(const Section& c, const Context& ctx) {
  no_exact(ctx, "superosc");
  const std::string family = c.string("family", std::string("Bernstein"));
  const auto Ns = c.n_list("N_list");
  const auto lambdas = to_reals(c.grid("lambda_grid"));
  const auto xs = to_reals(c.grid("x_grid"));
  const auto eps = epsilon_or_zero(c, "epsilon");
  const std::string nodes = c.string("nodes", std::string("regular"));
  const auto seed = static_cast<std::uint64_t>(c.integer("seed", 1));
  const VerdictPolicy policy = parse_policy(c);
  std::optional<CertificateKind> cert;
  if (c.has("certificate")) {
    try {
      cert = certificate_kind_from_string(c.string("certificate"));
    } catch (const domain_error& e) {
      throw config_error(c.path("certificate") + ": " + e.what());
    }
  }
  eps.validate(Ns);

  SequenceBuilder build;
  std::map<int, std::vector<Real>> rows;
  if (family == "Bernstein") {
    if (nodes != "regular") throw config_error(c.path("nodes") + ": Bernstein needs regular nodes");
    for (int N : Ns) {
      for (const auto& l : lambdas) check_guard(N, l);
    }
    build = [eps](int N, const Real& l) { return evaluator(bernstein_trigpoly<Real>(N, eps.at(N), l)); };
  } else if (family == "Lagrange") {
    if (nodes == "regular") {
      for (int N : Ns) rows[N] = regular_frequencies(N, eps.at(N)).values;
    } else if (nodes == "random") {
      std::mt19937_64 rng(seed);
      for (int N : Ns) rows[N] = random_irregular_row(N, rng);
    } else {
      throw config_error(c.path("nodes") + ": expected 'regular' or 'random'");
    }
    for (int N : Ns) {
      if (lagrange_required_bits(N) > static_cast<unsigned>(Real::working_precision())) {
        throw precision_error("Lagrange interpolation at N = " + std::to_string(N) + " needs " +
                              std::to_string(lagrange_required_bits(N)) + " bits");
      }
    }
    build = [&rows](int N, const Real& l) { return evaluator(lagrange_trigpoly(FrequencyRow{N, rows.at(N)}, l)); };
  } else if (family == "Xi") {
    auto xi = std::make_shared<XiCollection>(random_xi(Ns, seed));
    build = [xi](int N, const Real& l) -> Evaluator {
      return [xi, N, l](const CReal& z) { return eval_xi_product(N, xi->row(N), l, z); };
    };
  } else {
    throw config_error(c.path("family") + ": expected Bernstein, Lagrange or Xi");
  }

  Outcome out;
  auto rep = superoscillation_check(build, SuperoscillationLimit::identity_shift(), xs, lambdas, Ns, family,
                                    ctx.threads, policy);
  std::string csv = rep.csv();
  csv.replace(0, csv.find('\n'), "family,label,N,lambda,x,abs_error");
  out.artifacts.push_back({"", std::move(csv)});
  out.verdicts["superoscillation"] = to_string(rep.verdict);
  out.details["uniform_sup"] = series_json(rep.uniform_sup);
  out.residual("final_uniform_sup", rep.uniform_sup.rbegin()->second);

  if (cert) {
    // Deviation certificates bound |T - e^{i lambda x}|; ExpGrowth bounds |T|.
    const std::size_t L = lambdas.size(), X = xs.size();
    std::vector<int> bad(Ns.size() * L, 0);
    std::vector<Real> slack(Ns.size() * L);
    parallel_for(Ns.size() * L, ctx.threads, [&](std::size_t idx) {
      const int N = Ns[idx / L];
      const Real& l = lambdas[idx % L];
      const auto T = build(N, l);
      for (std::size_t k = 0; k < X; ++k) {
        const CReal z(xs[k]);
        const CReal v = T(z);
        const Real bound = error_certificate(*cert, l, z, N).bound_value;
        const Real lhs = *cert == CertificateKind::ExpGrowth ? abs(v) : abs(v - expi(l * xs[k]));
        const Real tol = pow2(-static_cast<long>(Real::working_precision() / 2)) * max(Real(1), abs(v));
        if (lhs > bound + tol) ++bad[idx];
      }
    });
    int violations = 0;
    for (int b : bad) violations += b;
    out.details["certificate"] = to_string(*cert);
    out.details["certificate_violations"] = violations;
    out.check("certificate " + to_string(*cert), violations == 0, std::to_string(violations) + " violations");
  }

  if (c.has("expect")) {
    Section e = c.section("expect", {"verdict", "max_final_sup"});
    expect_verdict(out, e, "superoscillation", rep.verdict);
    if (e.has("max_final_sup")) {
      const Real lim(e.number("max_final_sup"));
      const Real& got = rep.uniform_sup.rbegin()->second;
      out.check("final uniform_sup", got < lim, brief(got) + " vs " + brief(lim));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// extrapolate

inline Outcome run_extrapolate(const Section& c, const Context& ctx) {
  no_exact(ctx, "extrapolate");
  const TargetFunction psi = make_target(c.string("target"));
  const auto rule = coefficient_rule_from_string(c.string("rule", std::string("Bernstein")));
  const auto Ns = c.n_list("N_list");
  const auto a_grid = to_reals(c.grid("a_grid"));
  const auto ap_grid = to_reals(c.grid("a_prime_grid"));
  EpsilonFamily family;
  if (c.has("epsilon_family")) {
    const json& f = c.at("epsilon_family");
    if (!f.is_array() || f.empty()) throw config_error(c.path("epsilon_family") + ": expected a non-empty array");
    for (std::size_t i = 0; i < f.size(); ++i) {
      family.members.push_back(parse_epsilon(f[i], c.path("epsilon_family") + "[" + std::to_string(i) + "]"));
    }
  } else {
    family.members.push_back(EpsilonSequence::zero());
  }
  const VerdictPolicy policy = parse_policy(c);
  const auto dom = ExtrapolationDomain::product(psi.domain(), a_grid, ap_grid);
  if (rule == CoefficientRule::Bernstein) {
    for (int N : Ns) {
      for (const auto& a : a_grid) check_guard(N, a);
    }
  }

  Outcome out;
  auto rep = tcsp_sweep(psi, dom, Ns, family, rule, ctx.threads, policy);
  out.artifacts.push_back({"", rep.csv()});
  out.verdicts["tcsp"] = to_string(rep.verdict);
  out.details["report"] = rep.summary();
  out.residual("final_uniform_sup", rep.uniform_sup.rbegin()->second);
  if (c.has("expect")) {
    Section e = c.section("expect", {"verdict", "max_final_sup", "monotone"});
    expect_verdict(out, e, "tcsp", rep.verdict);
    if (e.has("max_final_sup")) {
      const Real lim(e.number("max_final_sup"));
      const Real& got = rep.uniform_sup.rbegin()->second;
      out.check("final uniform_sup", got < lim, brief(got) + " vs " + brief(lim));
    }
    if (e.flag("monotone", false)) out.check("monotone uniform_sup", rep.monotone_decreasing(), "");
  }
  return out;
}

// ---------------------------------------------------------------------------
// taylor

template <class T>
T identity_residual(const TargetFunction& Psi, const T& b, int N, const T& eps) {
  const auto p = bernstein_form<T>(Psi, b, N, eps);
  const auto q = bernstein_monomials<T>(Psi, b, N, eps);
  T worst(0);
  for (int k = 0; k <= N; ++k) {
    const Complex<T> d = p.coefficients[k] - q[k];
    T r;
    if constexpr (is_exact_v<T>) {
      r = max_component(d);
    } else {
      r = abs(d) / max(Real(1), abs(q[k]));
    }
    if (worst < r) worst = r;
  }
  return worst;
}

inline Outcome run_taylor(const Section& c, const Context& ctx) {
  const TargetFunction Psi = compose_upsilon(make_target(c.string("target")));
  const Rational b = c.rational("b_prime", Rational(0));
  const auto eps = epsilon_or_zero(c, "epsilon");
  const auto Ms = c.n_list("M_list");
  const auto kmaxes = c.n_list("kappa_max_list");
  if (kmaxes.front() < 8) throw config_error(c.path("kappa_max_list") + ": entries must be at least 8");

  Outcome out;
  std::string csv = "M,kappa,coefficient_real,coefficient_imag,root_stat\n";
  std::vector<NumericalTaylorSeries> series;
  json radii = json::object();
  bool decreasing = true;
  for (int M : Ms) {
    eps.validate(std::vector<int>{M, M * kmaxes.back()});
    auto s = numerical_taylor(Psi, Real(b), M, kmaxes.back(), eps, ctx.threads);
    for (std::size_t k = 0; k < s.coefficients.size(); ++k) {
      csv += std::to_string(M) + "," + std::to_string(k) + "," + to_decimal(s.coefficients[k].re) + "," +
             to_decimal(s.coefficients[k].im) + "," + to_decimal(root_stat(s.coefficients[k], static_cast<int>(k))) +
             "\n";
    }
    json r = json::object();
    Real prev;
    for (std::size_t i = 0; i < kmaxes.size(); ++i) {
      const std::vector<CReal> head(s.coefficients.begin(), s.coefficients.begin() + kmaxes[i] + 1);
      const Real rd = radius_diagnostic(head);
      r[std::to_string(kmaxes[i])] = rd.to_double();
      if (i > 0 && !(rd < prev)) decreasing = false;
      prev = rd;
    }
    radii[std::to_string(M)] = r;
  }
  out.artifacts.push_back({"", std::move(csv)});
  out.details["radius_diagnostic"] = radii;
  out.verdicts["radius_decreasing"] = decreasing;

  bool identity_ran = false;
  bool identity_zero = true;
  if (c.has("identity")) {
    identity_ran = true;
    Section id = c.section("identity", {"N_max", "b_prime_list", "eps_list"});
    const long Nmax = id.integer("N_max");
    if (Nmax < 1 || Nmax > 64) throw config_error(id.path("N_max") + ": expected 1..64");
    const auto bs = id.rational_list("b_prime_list");
    const auto es = id.rational_list("eps_list");
    for (const auto& e : es) {
      if (e < 0 || e >= 1) throw config_error(id.path("eps_list") + ": entries must lie in [0, 1)");
    }
    struct Job {
      int N;
      Rational b, e;
    };
    std::vector<Job> jobs;
    for (const auto& bb : bs) {
      for (const auto& e : es) {
        for (int N = 1; N <= Nmax; ++N) jobs.push_back({N, bb, e});
      }
    }
    std::vector<Real> res(jobs.size());
    std::vector<bool> zero(jobs.size());
    parallel_for(jobs.size(), ctx.threads, [&](std::size_t i) {
      const auto& j = jobs[i];
      if (ctx.exact) {
        const Rational r = identity_residual<Rational>(Psi, j.b, j.N, j.e);
        res[i] = Real(r);
        zero[i] = r == 0;
      } else {
        res[i] = identity_residual<Real>(Psi, Real(j.b), j.N, Real(j.e));
        zero[i] = res[i] <= pow2(-static_cast<long>(Real::working_precision() / 2));
      }
    });
    std::string icsv = "N,b_prime,eps,residual\n";
    Real worst(0);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      icsv += std::to_string(jobs[i].N) + "," + jobs[i].b.get_str() + "," + jobs[i].e.get_str() + "," +
              to_decimal(res[i]) + "\n";
      worst = max(worst, res[i]);
      identity_zero = identity_zero && zero[i];
    }
    out.artifacts.push_back({"identity", std::move(icsv)});
    out.residual("forward_difference_identity", worst);
    out.details["identity_mode"] = ctx.exact ? "exact" : "float";
  } else if (ctx.exact) {
    throw config_error("--exact applies to the 'identity' block of 'taylor'; none configured");
  }

  if (c.has("expect")) {
    Section e = c.section("expect", {"radius_decreasing", "identity_zero"});
    if (e.flag("radius_decreasing", false)) out.check("radius diagnostic decreasing", decreasing, radii.dump());
    if (e.flag("identity_zero", false)) {
      if (!identity_ran) throw config_error(e.path("identity_zero") + ": no 'identity' block configured");
      out.check("forward-difference identity", identity_zero, ctx.exact ? "exact" : "float");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// legendre-check

inline Outcome run_legendre(const Section& c, const Context& ctx) {
  const TargetFunction Psi = compose_upsilon(make_target(c.string("target")));
  const Rational b = c.rational("b_prime", Rational(0));
  const Rational eps = c.rational("eps", Rational(0));
  const Rational R = c.rational("R", Rational(1));
  const auto Ns = c.n_list("N_list");
  const long nu_max = c.integer("nu_max", 16);
  if (eps < 0 || eps >= 1) throw config_error(c.path("eps") + ": must lie in [0, 1)");
  if (R < 0) throw config_error(c.path("R") + ": must be non-negative");
  if (nu_max < 0 || nu_max > 64) throw config_error(c.path("nu_max") + ": expected 0..64");
  if (Ns.back() > 40) throw config_error(c.path("N_list") + ": N above 40 is not supported");

  Outcome out;
  int bad_pairs = 0;
  for (int m = 0; m <= nu_max; ++m) {
    for (int n = 0; n <= nu_max; ++n) {
      const Surd s = legendre_inner_product(m, n);
      const Surd want{Rational(m == n ? 1 : 0), Integer(1)};
      if (!(s == want)) ++bad_pairs;
    }
  }
  out.details["orthonormality_failures"] = bad_pairs;

  std::vector<Real> id_res(Ns.size()), parseval(Ns.size());
  std::vector<bool> id_zero(Ns.size());
  std::vector<std::vector<CReal>> gammas(Ns.size());
  parallel_for(Ns.size(), ctx.threads, [&](std::size_t i) {
    const int N = Ns[i];
    if (ctx.exact) {
      const auto poly = bernstein_form<Rational>(Psi, b, N, eps);
      const auto g = project<Rational>(poly, R);
      const Rational r = coefficient_identity_check<Rational>(poly, g, R);
      id_res[i] = Real(r);
      id_zero[i] = r == 0;
      parseval[i] = Real(Rational(parseval_sum(g) - l2_norm_squared(poly, R)));
      for (int nu = 0; nu <= N; ++nu) gammas[i].push_back(g.gamma(nu));
    } else {
      const auto poly = bernstein_form<Real>(Psi, Real(b), N, Real(eps));
      const auto g = project<Real>(poly, Real(R));
      Real scale(1);
      for (const auto& a : scaled_coefficients(poly, Real(R))) scale = max(scale, abs(a));
      id_res[i] = coefficient_identity_check<Real>(poly, g, Real(R)) / scale;
      id_zero[i] = id_res[i] <= pow2(-static_cast<long>(Real::working_precision() / 2));
      parseval[i] = parseval_sum(g) - l2_norm_squared(poly, Real(R));
      for (int nu = 0; nu <= N; ++nu) gammas[i].push_back(g.gamma(nu));
    }
  });
  std::string csv = "N,nu,gamma_real,gamma_imag\n";
  Real worst(0), worst_parseval(0);
  bool all_zero = true;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    for (std::size_t nu = 0; nu < gammas[i].size(); ++nu) {
      csv += std::to_string(Ns[i]) + "," + std::to_string(nu) + "," + to_decimal(gammas[i][nu].re) + "," +
             to_decimal(gammas[i][nu].im) + "\n";
    }
    worst = max(worst, id_res[i]);
    worst_parseval = max(worst_parseval, abs(parseval[i]));
    all_zero = all_zero && id_zero[i];
  }
  out.artifacts.push_back({"", std::move(csv)});
  out.residual("coefficient_identity", worst);
  out.residual("parseval", worst_parseval);
  out.details["mode"] = ctx.exact ? "exact" : "float";
  if (c.has("expect")) {
    Section e = c.section("expect", {"orthonormal", "identity_zero"});
    if (e.flag("orthonormal", false)) {
      out.check("orthonormality", bad_pairs == 0, std::to_string(bad_pairs) + " failing pairs up to nu = " +
                                                      std::to_string(nu_max));
    }
    if (e.flag("identity_zero", false)) out.check("coefficient identity", all_zero, brief(worst));
  }
  return out;
}

// ---------------------------------------------------------------------------
// kantorovich

inline Outcome run_kantorovich(const Section& c, const Context& ctx) {
  no_exact(ctx, "kantorovich");
  const Real rho0(c.rational("rho0", Rational(1, 2)));
  const GluedFunction psi0 = GluedFunction::from_name(c.string("glue", std::string("linear")), rho0);
  const ThetaMap theta(rho0);
  const auto a_grid = to_reals(c.grid("a_grid"));
  const auto Ns = c.n_list("N_list");
  const auto eps = epsilon_or_zero(c, "epsilon");
  eps.validate(Ns);
  for (int N : Ns) {
    for (const auto& a : a_grid) check_guard(N, theta.forward(a));
  }

  Outcome out;
  const auto rows = warped_table(psi0, theta, a_grid, Ns, eps, ctx.threads);
  std::string csv = "N,a,value_real,value_imag,abs_error\n";
  for (const auto& r : rows) {
    csv += std::to_string(r.N) + "," + to_decimal(r.a) + "," + to_decimal(r.value.re) + "," + to_decimal(r.value.im) +
           "," + to_decimal(r.abs_error) + "\n";
  }
  out.artifacts.push_back({"", std::move(csv)});
  std::map<int, Real> sup;
  bool improves = true;
  const std::size_t NN = Ns.size();
  for (std::size_t p = 0; p < a_grid.size(); ++p) {
    if (!(rows[p * NN + NN - 1].abs_error < rows[p * NN].abs_error)) improves = false;
    for (std::size_t n = 0; n < NN; ++n) {
      auto [it, fresh] = sup.emplace(Ns[n], rows[p * NN + n].abs_error);
      if (!fresh) it->second = max(it->second, rows[p * NN + n].abs_error);
    }
  }
  const Verdict v = judge(sup, parse_policy(c));
  out.verdicts["warped"] = to_string(v);
  out.details["sup_error"] = series_json(sup);
  out.residual("final_sup_error", sup.rbegin()->second);
  if (c.has("expect")) {
    Section e = c.section("expect", {"verdict", "improves", "max_final_error"});
    expect_verdict(out, e, "warped", v);
    if (e.flag("improves", false)) out.check("error at last N below error at first N", improves, "");
    if (e.has("max_final_error")) {
      const Real lim(e.number("max_final_error"));
      out.check("final sup error", sup.rbegin()->second < lim,
                brief(sup.rbegin()->second) + " vs " + brief(lim));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// divergence

inline Outcome run_divergence(const Section& c, const Context& ctx) {
  no_exact(ctx, "divergence");
  const Real a(c.rational("a_eval", Rational(1, 2)));
  const auto Ns = c.n_list("N_list");
  const bool perturb = c.flag("perturb", true);
  const VerdictPolicy policy = parse_policy(c);

  Outcome out;
  const auto rows = abs_lagrange_divergence(a, Ns, perturb, ctx.threads);
  std::string csv = "N,a_used,perturbed,value,abs_error\n";
  std::map<int, Real> err;
  Real mx(0), mn;
  bool first = true;
  for (const auto& r : rows) {
    csv += std::to_string(r.N) + "," + to_decimal(r.a_used) + "," + (r.perturbed ? "1" : "0") + "," +
           to_decimal(r.value.re) + "," + to_decimal(r.abs_error) + "\n";
    err[r.N] = r.abs_error;
    mx = max(mx, r.abs_error);
    mn = first ? r.abs_error : min(mn, r.abs_error);
    first = false;
  }
  out.artifacts.push_back({"", std::move(csv)});
  const Verdict v = judge(err, policy);
  bool tail_up = rows.size() >= 3;
  for (std::size_t i = rows.size() >= 3 ? rows.size() - 2 : rows.size(); i < rows.size(); ++i) {
    if (!(rows[i - 1].abs_error < rows[i].abs_error)) tail_up = false;
  }
  const Real ratio_mm = mn.is_zero() ? Real(0) : mx / mn;
  out.verdicts["divergence"] = to_string(v);
  out.details["errors"] = series_json(err);
  out.details["max_min_ratio"] = ratio_mm.to_double();
  out.residual("max_error", mx);
  if (c.has("expect")) {
    Section e = c.section("expect", {"verdict", "min_ratio", "increasing_tail"});
    expect_verdict(out, e, "divergence", v);
    if (e.has("min_ratio")) {
      const Real lim(e.number("min_ratio"));
      out.check("max/min error ratio", ratio_mm > lim, brief(ratio_mm) + " vs " + brief(lim));
    }
    if (e.flag("increasing_tail", false)) out.check("increasing tail", tail_up, "last three errors");
  }
  return out;
}

// ---------------------------------------------------------------------------
// periodic

inline FourierSpectrum parse_spectrum(const Section& c) {
  Section s = c.section("spectrum", {"kind", "K", "alpha", "T", "coefficients"});
  const std::string kind = s.string("kind");
  const Real T = s.has("T") ? parse_period(s.at("T"), s.path("T")) : Real(2) * pi();
  if (!(T > 0)) throw config_error(s.path("T") + ": period must be positive");
  if (kind == "exp_decay" || kind == "poly_decay") {
    const long K = s.integer("K");
    if (K < 0 || K > 1000) throw config_error(s.path("K") + ": expected 0..1000");
    if (kind == "poly_decay") return FourierSpectrum::poly_decay(static_cast<int>(K), T);
    return FourierSpectrum::exp_decay(static_cast<int>(K), Real(s.rational("alpha", Rational(1))), T);
  }
  if (kind == "explicit") {
    const json& a = s.at("coefficients");
    if (!a.is_array() || a.empty()) throw config_error(s.path("coefficients") + ": expected a non-empty array");
    FourierSpectrum out{T, {}};
    for (const auto& e : a) {
      if (!e.is_array() || e.size() < 2 || e.size() > 3 || !e[0].is_number_integer()) {
        throw config_error(s.path("coefficients") + ": entries are [kappa, re] or [kappa, re, im]");
      }
      const int k = e[0].get<int>();
      if (out.coefficients.count(k)) throw config_error(s.path("coefficients") + ": repeated kappa");
      out.coefficients[k] = CReal(Real(parse_rational(e[1])), e.size() == 3 ? Real(parse_rational(e[2])) : Real(0));
    }
    return out;
  }
  throw config_error(s.path("kind") + ": expected exp_decay, poly_decay or explicit");
}

inline Outcome run_periodic(const Section& c, const Context& ctx) {
  no_exact(ctx, "periodic");
  const FourierSpectrum s = parse_spectrum(c);
  const auto Rs = to_reals(c.rational_list("R_list"));
  const auto Ns = c.n_list("N_list");
  const auto grid = to_reals(c.grid("a_prime_grid"));
  const double chi = c.number("chi", 4);
  for (const auto& R : Rs) {
    if (!(R > 1)) throw config_error(c.path("R_list") + ": entries must exceed 1");
    for (int N : Ns) check_guard(N, R);
  }

  Outcome out;
  const std::size_t NN = Ns.size();
  std::vector<IdentityResidual> id(Rs.size() * NN);
  parallel_for(id.size(), ctx.threads, [&](std::size_t i) {
    id[i] = multiplier_identity_check(s, Rs[i / NN], grid, Ns[i % NN]);
  });
  std::string icsv = "R,N,residual,scale\n";
  bool identity_ok = true;
  Real worst(0);
  for (std::size_t i = 0; i < id.size(); ++i) {
    icsv += to_decimal(Rs[i / NN]) + "," + std::to_string(Ns[i % NN]) + "," + to_decimal(id[i].residual) + "," +
            to_decimal(id[i].scale) + "\n";
    identity_ok = identity_ok && id[i].residual <= pow2(-64) * id[i].scale;
    worst = max(worst, id[i].residual / max(id[i].scale, Real(1)));
  }
  const auto cert = decay_certificate(s, Rs, Ns, chi, ctx.threads);
  out.artifacts.push_back({"", cert.csv()});
  out.artifacts.push_back({"identity", std::move(icsv)});
  out.residual("multiplier_identity_relative", worst);
  out.residual("best_Rprime", cert.best_Rprime());
  json per = json::array();
  for (const auto& p : cert.per_R) {
    per.push_back({{"R", p.R.to_double()},
                   {"M", p.M},
                   {"rate", p.rate.to_double()},
                   {"C", p.C.to_double()},
                   {"certified_Rprime", p.certified_Rprime.to_double()}});
  }
  out.details["decay_certificate"] = per;
  out.details["bound_violations"] = cert.violations;
  out.verdicts["positive_Rprime"] = cert.best_Rprime() > 0;
  if (c.has("expect")) {
    Section e = c.section("expect", {"identity", "positive_Rprime"});
    if (e.flag("identity", false)) out.check("multiplier identity", identity_ok, "residual <= 2^-64 scale");
    if (e.flag("positive_Rprime", false)) {
      out.check("positive certified R'", cert.best_Rprime() > 0 && cert.violations == 0,
                brief(cert.best_Rprime()));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Driver.

inline Outcome dispatch(const std::string& sub, const json& j, const Context& ctx) {
  if (sub == "superosc") {
    return run_superosc(Section(j, sub, keys({"family", "N_list", "lambda_grid", "x_grid", "epsilon", "nodes", "seed",
                                              "certificate", "threshold", "contraction", "divergence_level"})),
                        ctx);
  }
  if (sub == "extrapolate") {
    return run_extrapolate(Section(j, sub, keys({"target", "rule", "N_list", "a_grid", "a_prime_grid",
                                                 "epsilon_family", "threshold", "contraction", "divergence_level"})),
                           ctx);
  }
  if (sub == "taylor") {
    return run_taylor(
        Section(j, sub, keys({"target", "b_prime", "epsilon", "M_list", "kappa_max_list", "identity"})), ctx);
  }
  if (sub == "legendre-check") {
    return run_legendre(Section(j, sub, keys({"target", "b_prime", "eps", "R", "N_list", "nu_max"})), ctx);
  }
  if (sub == "kantorovich") {
    return run_kantorovich(Section(j, sub, keys({"glue", "rho0", "a_grid", "N_list", "epsilon", "threshold",
                                                 "contraction", "divergence_level"})),
                           ctx);
  }
  if (sub == "divergence") {
    return run_divergence(
        Section(j, sub, keys({"a_eval", "N_list", "perturb", "threshold", "contraction", "divergence_level"})), ctx);
  }
  if (sub == "periodic") {
    return run_periodic(Section(j, sub, keys({"spectrum", "R_list", "N_list", "a_prime_grid", "chi"})), ctx);
  }
  throw config_error("unknown subcommand '" + sub + "'");
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw io_error("cannot open " + p.string() + " for writing");
  f << content;
  f.close();
  if (!f) throw io_error("write to " + p.string() + " failed");
}

/// Runs one config. Messages go to `log`.
inline int run(const Options& o, std::ostream& log = std::cerr) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string text;
  {
    std::ifstream f(o.config, std::ios::binary);
    if (!f) {
      log << "error: cannot read config " << o.config << "\n";
      return kIoError;
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  const std::string stem = o.config.stem().string();

  json j;
  std::string sub;
  unsigned bits = kDefaultPrecision, threads = default_thread_count();
  Outcome out;
  try {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw config_error("config file is empty");
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config must be a JSON object");
    sub = o.subcommand;
    if (j.contains("subcommand")) {
      if (!j["subcommand"].is_string()) throw config_error("subcommand must be a string");
      const std::string cs = j["subcommand"].get<std::string>();
      if (!sub.empty() && sub != cs) throw config_error("config is for '" + cs + "', not '" + sub + "'");
      sub = cs;
    }
    if (sub.empty()) throw config_error("no subcommand given on the command line or in the config");
    if (std::find(subcommands().begin(), subcommands().end(), sub) == subcommands().end()) {
      throw config_error("unknown subcommand '" + sub + "'");
    }
    if (j.contains("precision")) {
      if (!j["precision"].is_number_integer()) throw config_error("precision must be an integer");
      bits = j["precision"].get<unsigned>();
    }
    if (o.precision) bits = *o.precision;
    if (bits < 64 || bits > 65536) throw config_error("precision must lie in [64, 65536] bits");
    if (j.contains("threads")) {
      if (!j["threads"].is_number_integer() || j["threads"].get<long>() < 1) {
        throw config_error("threads must be a positive integer");
      }
      threads = j["threads"].get<unsigned>();
    }
    if (o.threads) threads = *o.threads;
    if (threads < 1) throw config_error("threads must be positive");

    ScopedPrecision guard(bits);
    out = dispatch(sub, j, Context{threads, o.exact});
  } catch (const io_error& e) {
    log << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const error& e) {
    log << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const json::exception& e) {
    log << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    log << "internal error: " << e.what() << "\n";
    return kAssertionFailed;
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const int status = out.passed() ? kOk : kAssertionFailed;
  json summary;
  summary["subcommand"] = sub;
  summary["config"] = o.config.filename().string();
  summary["config_hash"] = "fnv1a64:" + hex64(fnv1a(text));
  summary["precision_bits"] = bits;
  summary["threads"] = threads;
  summary["exact"] = o.exact;
  summary["wall_time_s"] = wall;
  json asserts = json::array();
  for (const auto& a : out.assertions) asserts.push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
  summary["assertions"] = asserts;
  summary["verdicts"] = out.verdicts;
  summary["residuals"] = out.residuals;
  summary["details"] = out.details;
  summary["status"] = status;
  json files = json::array();
  try {
    std::error_code ec;
    std::filesystem::create_directories(o.out, ec);
    if (ec) throw io_error("cannot create " + o.out.string() + ": " + ec.message());
    for (const auto& a : out.artifacts) {
      const std::string name = stem + (a.suffix.empty() ? "" : "." + a.suffix) + ".csv";
      write_file(o.out / name, a.csv);
      files.push_back(name);
    }
    summary["artifacts"] = files;
    write_file(o.out / (stem + ".summary.json"), summary.dump(2) + "\n");
  } catch (const io_error& e) {
    log << "I/O error: " << e.what() << "\n";
    return kIoError;
  }
  for (const auto& a : out.assertions) {
    log << (a.pass ? "PASS " : "FAIL ") << a.name << (a.detail.empty() ? "" : ": " + a.detail) << "\n";
  }
  return status;
}

}  // namespace supershift::runner
