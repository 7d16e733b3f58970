#pragma once

// Supershift extrapolation: target functions, the sums
// sum_nu C_nu(N, a) psi(a' + h_nu), convergence sweeps over epsilon
// families, and the translation/reflection transforms.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "supershift/errors.hpp"
#include "supershift/numeric.hpp"
#include "supershift/parallel.hpp"
#include "supershift/sampling.hpp"
#include "supershift/trigpoly.hpp"

namespace supershift {

enum class TargetKind { EntireRestriction, Glued, Warped, AbsVal, PeriodicSpectrum };

inline std::string to_string(TargetKind k) {
  switch (k) {
    case TargetKind::EntireRestriction:
      return "EntireRestriction";
    case TargetKind::Glued:
      return "Glued";
    case TargetKind::Warped:
      return "Warped";
    case TargetKind::AbsVal:
      return "AbsVal";
    case TargetKind::PeriodicSpectrum:
      return "PeriodicSpectrum";
  }
  return "?";
}

using Sampler = std::function<CReal(const Real&)>;
using ExactSampler = std::function<CRational(const Rational&)>;

/// A function psi on an open interval, sampled lazily and memoized by the
/// exact bits of the argument. Copies share the memo table.
class TargetFunction {
 public:
  TargetFunction(std::string name, TargetKind kind, Interval domain, Sampler sampler, ExactSampler exact = {})
      : name_(std::move(name)),
        kind_(kind),
        domain_(std::move(domain)),
        sampler_(std::move(sampler)),
        exact_(std::move(exact)),
        memo_(std::make_shared<Memo>()) {}

  const std::string& name() const { return name_; }
  TargetKind kind() const { return kind_; }
  const Interval& domain() const { return domain_; }
  bool has_exact_sampler() const { return static_cast<bool>(exact_); }

  CReal operator()(const Real& t) const {
    if (!domain_.contains(t)) {
      throw domain_error(name_ + ": sample point " + to_decimal(t) + " outside " + domain_.describe());
    }
    const std::string key = exact_key(t) + "@" + std::to_string(static_cast<long>(Real::working_precision()));
    {
      std::lock_guard<std::mutex> lock(memo_->mutex);
      auto it = memo_->values.find(key);
      if (it != memo_->values.end()) return it->second;
    }
    CReal v = sampler_(t);
    std::lock_guard<std::mutex> lock(memo_->mutex);
    return memo_->values.emplace(key, std::move(v)).first->second;
  }

  /// Exact value for polynomial targets; otherwise the working-precision
  /// sample of the rounded point, converted exactly to a rational.
  CRational exact(const Rational& t) const {
    if (exact_) {
      if (!domain_.contains(Real(t))) {
        throw domain_error(name_ + ": sample point " + t.get_str() + " outside " + domain_.describe());
      }
      return exact_(t);
    }
    return to_rational((*this)(Real(t)));
  }

  const Sampler& sampler() const { return sampler_; }
  const ExactSampler& exact_sampler() const { return exact_; }

 private:
  struct Memo {
    std::mutex mutex;
    std::unordered_map<std::string, CReal> values;
  };

  std::string name_;
  TargetKind kind_;
  Interval domain_;
  Sampler sampler_;
  ExactSampler exact_;
  std::shared_ptr<Memo> memo_;
};

/// a -> psi(-a) on -A.
inline TargetFunction reflect(const TargetFunction& psi) {
  ExactSampler ex;
  if (psi.has_exact_sampler()) ex = [f = psi.exact_sampler()](const Rational& t) { return f(Rational(-t)); };
  return TargetFunction("reflect(" + psi.name() + ")", psi.kind(), psi.domain().negated(),
                        [psi](const Real& t) { return psi(-t); }, std::move(ex));
}

/// a -> psi(a - a0) on a0 + A.
inline TargetFunction translate(const TargetFunction& psi, const Real& a0) {
  ExactSampler ex;
  if (psi.has_exact_sampler()) {
    ex = [f = psi.exact_sampler(), q = a0.to_rational()](const Rational& t) { return f(Rational(t - q)); };
  }
  return TargetFunction("translate(" + psi.name() + ", " + to_decimal(a0) + ")", psi.kind(), psi.domain().shifted(a0),
                        [psi, a0](const Real& t) { return psi(t - a0); }, std::move(ex));
}

// ---------------------------------------------------------------------------
// Shipped entire and polynomial targets.

/// Polynomial with rational coefficients c_0 + c_1 t + ..., Horner in both modes.
inline TargetFunction polynomial_target(std::string name, std::vector<Rational> c) {
  auto real = [c](const Real& t) {
    Real s(0);
    for (std::size_t k = c.size(); k-- > 0;) s = s * t + Real(c[k]);
    return CReal(s);
  };
  auto exact = [c](const Rational& t) {
    Rational s(0);
    for (std::size_t k = c.size(); k-- > 0;) s = Rational(s * t + c[k]);
    return CRational(s);
  };
  return TargetFunction(std::move(name), TargetKind::EntireRestriction, Interval::real_line(), real, exact);
}

inline const std::vector<std::string>& shipped_target_names() {
  static const std::vector<std::string> names{"one", "identity", "square", "poly5", "cos", "sin", "exp_i", "exp", "sinh", "abs"};
  return names;
}

inline TargetFunction make_target(const std::string& name) {
  const auto R = Interval::real_line();
  if (name == "one") return polynomial_target(name, {1});
  if (name == "identity") return polynomial_target(name, {0, 1});
  if (name == "square") return polynomial_target(name, {0, 0, 1});
  if (name == "poly5") return polynomial_target(name, {1, Rational(1, 2), 0, -2, 0, 1});
  if (name == "cos") return {name, TargetKind::EntireRestriction, R, [](const Real& t) { return CReal(cos(t)); }};
  if (name == "sin") return {name, TargetKind::EntireRestriction, R, [](const Real& t) { return CReal(sin(t)); }};
  if (name == "exp_i") return {name, TargetKind::EntireRestriction, R, [](const Real& t) { return expi(t); }};
  if (name == "exp") return {name, TargetKind::EntireRestriction, R, [](const Real& t) { return CReal(exp(t)); }};
  if (name == "sinh") return {name, TargetKind::EntireRestriction, R, [](const Real& t) { return CReal(sinh(t)); }};
  if (name == "abs") return {name, TargetKind::AbsVal, R, [](const Real& t) { return CReal(abs(t)); }};
  throw config_error("unknown target '" + name + "'");
}

// ---------------------------------------------------------------------------
// Extrapolation.

/// sum_nu C_nu psi(a' + h_nu), ascending nu.
inline CReal extrapolate(const TargetFunction& psi, const Real& a_prime, const FrequencyRow& row,
                         std::span<const Real> coeffs) {
  if (coeffs.size() != row.values.size()) throw shape_error("coefficients and row differ in length");
  CReal s;
  for (std::size_t nu = 0; nu < coeffs.size(); ++nu) s += coeffs[nu] * psi(a_prime + row.values[nu]);
  return s;
}

inline CRational extrapolate_exact(const TargetFunction& psi, const Rational& a_prime, std::span<const Rational> nodes,
                                   std::span<const Rational> coeffs) {
  if (coeffs.size() != nodes.size()) throw shape_error("coefficients and row differ in length");
  CRational s;
  for (std::size_t nu = 0; nu < coeffs.size(); ++nu) s += coeffs[nu] * psi.exact(Rational(a_prime + nodes[nu]));
  return s;
}

enum class CoefficientRule { Bernstein, Lagrange };

inline std::string to_string(CoefficientRule r) { return r == CoefficientRule::Bernstein ? "Bernstein" : "Lagrange"; }

inline CoefficientRule coefficient_rule_from_string(const std::string& s) {
  if (s == "Bernstein") return CoefficientRule::Bernstein;
  if (s == "Lagrange") return CoefficientRule::Lagrange;
  throw config_error("unknown coefficient rule '" + s + "'");
}

inline std::vector<Real> coefficients_for(CoefficientRule rule, const FrequencyRow& row, const Real& a) {
  if (rule == CoefficientRule::Bernstein) {
    if (row.nu() != row.N) throw shape_error("Bernstein coefficients need nu(N) = N");
    return bernstein_coefficients<Real>(row.N, a);
  }
  return lagrange_weights<Real>(row.values, a);
}

/// Reflection chain: sum_nu C_nu(N, a) psi(-(a' + h_nu)) against
/// sum_mu C_mu(N, -a) psi(-a' + 2 eps + h_mu). Returns the relative residual.
inline Real reflection_identity_residual(const TargetFunction& psi, const Real& a, const Real& a_prime, int N,
                                         const Real& eps) {
  const auto row = regular_frequencies(N, eps);
  const auto lhs = extrapolate(reflect(psi), a_prime, row, bernstein_coefficients<Real>(N, a));
  const auto c = bernstein_coefficients<Real>(N, -a);
  CReal rhs;
  Real mass(0);
  for (int mu = 0; mu <= N; ++mu) {
    CReal term = c[mu] * psi(-a_prime + 2 * eps + row.values[mu]);
    mass += abs(term);
    rhs += term;
  }
  return abs(lhs - rhs) / max(mass, Real(1));
}

// ---------------------------------------------------------------------------
// Extrapolation domains and grids.

/// Uniform grid lo, lo + step, ..., up to hi; points are rounded from exact rationals.
inline std::vector<Real> uniform_grid(const Rational& lo, const Rational& hi, const Rational& step) {
  if (step <= 0) throw domain_error("grid step must be positive");
  if (hi < lo) throw domain_error("grid upper end below lower end");
  std::vector<Real> g;
  for (Rational x = lo; x <= hi; x += step) g.emplace_back(x);
  return g;
}

struct ExtrapolationDomain {
  Interval A = Interval::real_line();
  std::vector<std::pair<Real, Real>> points;  // (a, a')

  void validate() const {
    for (const auto& [a, ap] : points) {
      if (!A.contains_closed(ap - 1, ap + 1)) {
        throw domain_error("a' = " + to_decimal(ap) + ": a' + [-1, 1] not inside " + A.describe());
      }
      if (!A.contains(a + ap)) throw domain_error("a + a' = " + to_decimal(a + ap) + " outside " + A.describe());
    }
  }

  static ExtrapolationDomain product(Interval A, std::span<const Real> a_grid, std::span<const Real> ap_grid) {
    ExtrapolationDomain d{std::move(A), {}};
    for (const auto& a : a_grid) {
      for (const auto& ap : ap_grid) d.points.emplace_back(a, ap);
    }
    d.validate();
    return d;
  }
};

// ---------------------------------------------------------------------------
// Convergence reports.

enum class Verdict { Converging, Diverging, Inconclusive };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Converging:
      return "Converging";
    case Verdict::Diverging:
      return "Diverging";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "?";
}

/// Converging: the sup error is at rounding level, or the last three values
/// strictly decrease, the final value is at most `contraction` times the one
/// two steps back, and (when set) below `threshold`.
/// Diverging: the maximum exceeds `divergence_level` and the last three
/// values strictly increase.
struct VerdictPolicy {
  std::optional<double> threshold;
  double contraction = 0.5;
  double divergence_level = 1e3;
};

inline Verdict judge(const std::map<int, Real>& series, const VerdictPolicy& policy = {}) {
  if (series.empty()) return Verdict::Inconclusive;
  std::vector<Real> v;
  for (const auto& [N, e] : series) v.push_back(e);
  Real mx(0);
  for (const auto& e : v) mx = max(mx, e);
  if (mx <= pow2(-static_cast<long>(Real::working_precision() / 2))) return Verdict::Converging;
  if (v.size() < 3) return Verdict::Inconclusive;
  const Real& x0 = v[v.size() - 3];
  const Real& x1 = v[v.size() - 2];
  const Real& x2 = v[v.size() - 1];
  if (x2 < x1 && x1 < x0 && x2 <= Real(policy.contraction) * x0 &&
      (!policy.threshold || x2 < Real(*policy.threshold))) {
    return Verdict::Converging;
  }
  if (mx > Real(policy.divergence_level) && x0 < x1 && x1 < x2) return Verdict::Diverging;
  return Verdict::Inconclusive;
}

struct ErrorRecord {
  std::string rule;
  std::string iota;
  int N = 0;
  Real a;
  Real a_prime;
  Real abs_error;
};

struct ConvergenceReport {
  std::vector<std::string> members;
  std::vector<std::map<int, Real>> per_family_member;
  std::map<int, Real> uniform_sup;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<ErrorRecord> records;

  /// Builds uniform_sup and the verdict from the per-member tables.
  void finish(const VerdictPolicy& policy) {
    uniform_sup.clear();
    for (const auto& m : per_family_member) {
      for (const auto& [N, e] : m) {
        auto [it, fresh] = uniform_sup.emplace(N, e);
        if (!fresh) it->second = max(it->second, e);
      }
    }
    verdict = judge(uniform_sup, policy);
  }

  bool monotone_decreasing() const {
    const Real* prev = nullptr;
    for (const auto& [N, e] : uniform_sup) {
      if (prev && !(e < *prev)) return false;
      prev = &e;
    }
    return true;
  }

  std::string csv() const {
    std::string out = "rule,iota,N,a,a_prime,abs_error\n";
    for (const auto& r : records) {
      out += r.rule + "," + r.iota + "," + std::to_string(r.N) + "," + to_decimal(r.a) + "," + to_decimal(r.a_prime) +
             "," + to_decimal(r.abs_error) + "\n";
    }
    return out;
  }

  nlohmann::json summary() const {
    nlohmann::json per = nlohmann::json::object();
    for (std::size_t m = 0; m < members.size(); ++m) {
      nlohmann::json row = nlohmann::json::object();
      for (const auto& [N, e] : per_family_member[m]) row[std::to_string(N)] = e.to_double();
      per[members[m]] = row;
    }
    nlohmann::json us = nlohmann::json::object();
    for (const auto& [N, e] : uniform_sup) us[std::to_string(N)] = {{"value", e.to_double()}, {"decimal", to_decimal(e)}};
    return {{"per_family_member", per}, {"uniform_sup", us}, {"verdict", to_string(verdict)}};
  }
};

/// TCSP sweep: for each family member and N, the sup over the grid of
/// |sum_nu C_nu(N, a) psi(a' + h_nu) - psi(a + a')|.
inline ConvergenceReport tcsp_sweep(const TargetFunction& psi, const ExtrapolationDomain& dom, std::span<const int> Ns,
                                    const EpsilonFamily& family, CoefficientRule rule, unsigned threads = 0,
                                    const VerdictPolicy& policy = {}) {
  for (std::size_t i = 1; i < Ns.size(); ++i) {
    if (Ns[i] <= Ns[i - 1]) throw validation_error("N list must be increasing");
  }
  family.validate(Ns);
  const std::size_t P = dom.points.size(), NN = Ns.size(), M = family.members.size();
  std::vector<Real> err(M * NN * P);
  parallel_for(err.size(), threads, [&](std::size_t idx) {
    const std::size_t m = idx / (NN * P), n = (idx / P) % NN, p = idx % P;
    const int N = Ns[n];
    const auto& [a, ap] = dom.points[p];
    const auto row = regular_frequencies(N, family.members[m].at(N));
    const auto c = coefficients_for(rule, row, a);
    err[idx] = abs(extrapolate(psi, ap, row, c) - psi(a + ap));
  });
  ConvergenceReport rep;
  for (std::size_t m = 0; m < M; ++m) {
    rep.members.push_back(family.members[m].description());
    std::map<int, Real> per;
    for (std::size_t n = 0; n < NN; ++n) {
      Real sup(0);
      for (std::size_t p = 0; p < P; ++p) {
        const std::size_t idx = (m * NN + n) * P + p;
        sup = max(sup, err[idx]);
        rep.records.push_back({to_string(rule), rep.members.back(), Ns[n], dom.points[p].first, dom.points[p].second,
                               err[idx]});
      }
      per[Ns[n]] = sup;
    }
    rep.per_family_member.push_back(std::move(per));
  }
  rep.finish(policy);
  return rep;
}

using Evaluator = std::function<CReal(const CReal&)>;
using SequenceBuilder = std::function<Evaluator(int N, const Real& lambda)>;

inline Evaluator evaluator(TrigPoly<Real> T) {
  return [T = std::move(T)](const CReal& z) { return eval(T, z); };
}

/// sup over (lambda, x) of |T_N[lambda](x) - C(lambda) e^{i g(lambda) x}|.
/// Records carry lambda in the `a` column and x in the `a_prime` column.
inline ConvergenceReport superoscillation_check(const SequenceBuilder& build, const SuperoscillationLimit& limit,
                                                std::span<const Real> x_grid, std::span<const Real> lambda_grid,
                                                std::span<const int> Ns, const std::string& label = "T",
                                                unsigned threads = 0, const VerdictPolicy& policy = {}) {
  limit.validate(lambda_grid);
  const std::size_t X = x_grid.size(), L = lambda_grid.size(), NN = Ns.size();
  std::vector<Real> err(NN * L * X);
  parallel_for(NN * L, threads, [&](std::size_t idx) {
    const int N = Ns[idx / L];
    const Real& lambda = lambda_grid[idx % L];
    const auto T = build(N, lambda);
    const Real g = limit.g(lambda);
    const CReal C = limit.C(lambda);
    for (std::size_t k = 0; k < X; ++k) {
      const CReal target = C * expi(g * x_grid[k]);
      err[idx * X + k] = abs(T(CReal(x_grid[k])) - target);
    }
  });
  ConvergenceReport rep;
  rep.members.push_back(label);
  std::map<int, Real> per;
  for (std::size_t n = 0; n < NN; ++n) {
    Real sup(0);
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t k = 0; k < X; ++k) {
        const Real& e = err[(n * L + l) * X + k];
        sup = max(sup, e);
        rep.records.push_back({label, label, Ns[n], lambda_grid[l], x_grid[k], e});
      }
    }
    per[Ns[n]] = sup;
  }
  rep.per_family_member.push_back(std::move(per));
  rep.finish(policy);
  return rep;
}

}  // namespace supershift
