#pragma once

// Function gallery: the glued non-analytic psi0, the arctan warp Theta and
// its warped samplings, and the |a| Lagrange divergence demonstration.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "supershift/errors.hpp"
#include "supershift/numeric.hpp"
#include "supershift/parallel.hpp"
#include "supershift/sampling.hpp"
#include "supershift/supershift.hpp"
#include "supershift/trigpoly.hpp"

namespace supershift {

using EntireFunction = std::function<CReal(const CReal&)>;

/// g(b) = G-(b) for b < 1/2, G+(b) otherwise; psi0(a) = g((1 + a)/2) on
/// A0 = (-1 - rho0, 1 + rho0).
class GluedFunction {
 public:
  GluedFunction(std::string name, EntireFunction g_minus, EntireFunction g_plus, Real rho0,
                ExactSampler exact_minus = {}, ExactSampler exact_plus = {})
      : name_(std::move(name)),
        g_minus_(std::move(g_minus)),
        g_plus_(std::move(g_plus)),
        rho0_(std::move(rho0)),
        exact_minus_(std::move(exact_minus)),
        exact_plus_(std::move(exact_plus)) {
    if (!(rho0_ > 0)) throw domain_error("rho0 must be positive");
    const CReal half(Real(0.5));
    const Real tol = pow2(-static_cast<long>(Real::working_precision() / 2));
    if (abs(g_minus_(half) - g_plus_(half)) > tol) throw validation_error(name_ + ": G-(1/2) != G+(1/2)");
    if (abs(slope_minus() - slope_plus()) <= tol) {
      throw validation_error(name_ + ": G- and G+ have equal derivatives at 1/2");
    }
  }

  /// G-(z) = z - 1/2, G+(z) = 2 (z - 1/2).
  static GluedFunction linear_pair(Real rho0 = Real(0.5)) {
    return {"glued_linear",
            [](const CReal& z) { return z - CReal(Real(0.5)); },
            [](const CReal& z) { return Real(2) * (z - CReal(Real(0.5))); },
            std::move(rho0),
            [](const Rational& b) { return CRational(Rational(b - Rational(1, 2))); },
            [](const Rational& b) { return CRational(Rational(2 * (b - Rational(1, 2)))); }};
  }

  /// G-(z) = e^{z - 1/2}, G+(z) = 1 + 3 (z - 1/2).
  static GluedFunction exp_linear_pair(Real rho0 = Real(0.5)) {
    return {"glued_exp_linear", [](const CReal& z) { return exp(z - CReal(Real(0.5))); },
            [](const CReal& z) { return CReal(Real(1)) + Real(3) * (z - CReal(Real(0.5))); }, std::move(rho0)};
  }

  static GluedFunction from_name(const std::string& name, Real rho0) {
    if (name == "linear") return linear_pair(std::move(rho0));
    if (name == "exp_linear") return exp_linear_pair(std::move(rho0));
    throw config_error("unknown glue pair '" + name + "'");
  }

  const std::string& name() const { return name_; }
  const Real& rho0() const { return rho0_; }
  Interval domain() const { return Interval::open(-(1 + rho0_), 1 + rho0_); }

  CReal operator()(const Real& a) const {
    if (!domain().contains(a)) throw domain_error(name_ + ": a = " + to_decimal(a) + " outside A0");
    const Real b = (1 + a) / 2;
    return b < Real(0.5) ? g_minus_(CReal(b)) : g_plus_(CReal(b));
  }

  bool has_exact() const { return static_cast<bool>(exact_minus_) && static_cast<bool>(exact_plus_); }

  CRational exact(const Rational& a) const {
    if (!has_exact()) throw domain_error(name_ + " has no exact evaluator");
    const Rational b = (1 + a) / 2;
    return b < Rational(1, 2) ? exact_minus_(b) : exact_plus_(b);
  }

  /// psi0 as a target on A0.
  TargetFunction target() const {
    ExactSampler ex;
    if (has_exact()) ex = [self = *this](const Rational& a) { return self.exact(a); };
    return TargetFunction(name_, TargetKind::Glued, domain(), [self = *this](const Real& a) { return self(a); },
                          std::move(ex));
  }

  /// One-sided difference quotients (psi0(h) - psi0(0))/h and (psi0(0) - psi0(-h))/h.
  std::pair<CReal, CReal> one_sided_quotients(const Real& h) const {
    const CReal c = (*this)(Real(0));
    return {((*this)(h) - c) / h, (c - (*this)(-h)) / h};
  }

 private:
  CReal slope(const EntireFunction& G) const {
    const Real step = pow2(-static_cast<long>(Real::working_precision() / 4));
    return (G(CReal(Real(0.5) + step)) - G(CReal(Real(0.5) - step))) / (2 * step);
  }
  CReal slope_minus() const { return slope(g_minus_); }
  CReal slope_plus() const { return slope(g_plus_); }

  std::string name_;
  EntireFunction g_minus_, g_plus_;
  Real rho0_;
  ExactSampler exact_minus_, exact_plus_;
};

/// Theta(a) = (2(1 + rho0)/pi) arctan(a tan(pi/(2(1 + rho0)))), an odd
/// increasing bijection of R onto (-(1 + rho0), 1 + rho0) fixing -1, 0, 1.
class ThetaMap {
 public:
  explicit ThetaMap(Real rho0 = Real(0.5)) : rho0_(std::move(rho0)) {
    if (!(rho0_ > 0)) throw domain_error("rho0 must be positive");
  }

  const Real& rho0() const { return rho0_; }

  Real forward(const Real& a) const {
    if (abs(a) == Real(1)) return a;
    const Real scale = 2 * (1 + rho0_) / pi();
    return scale * atan(a * tan_c());
  }

  /// tan(pi x/(2(1 + rho0))) / tan(pi/(2(1 + rho0))) for |x| < 1 + rho0.
  Real inverse(const Real& x) const {
    if (!(abs(x) < 1 + rho0_)) throw domain_error("Theta^{-1} needs |x| < 1 + rho0, got " + to_decimal(x));
    if (abs(x) == Real(1)) return x;
    return tan(pi() * x / (2 * (1 + rho0_))) / tan_c();
  }

 private:
  Real tan_c() const { return tan(pi() / (2 * (1 + rho0_))); }
  Real rho0_;
};

/// Theta^{-1} of the regular row, clamped to [-1, 1].
inline FrequencyRow warped_frequencies(const ThetaMap& theta, int N, const Real& eps) {
  FrequencyRow row = regular_frequencies(N, eps);
  for (auto& h : row.values) {
    h = theta.inverse(h);
    if (h > 1) h = Real(1);
    if (h < -1) h = Real(-1);
  }
  for (std::size_t i = 1; i < row.values.size(); ++i) {
    if (!(row.values[i] < row.values[i - 1])) throw validation_error("warped row is not strictly decreasing");
  }
  return row;
}

/// psi = psi0 o Theta on R.
inline TargetFunction warped_target(const GluedFunction& psi0, const ThetaMap& theta) {
  return TargetFunction("warped(" + psi0.name() + ")", TargetKind::Warped, Interval::real_line(),
                        [psi0, theta](const Real& a) { return psi0(theta.forward(a)); });
}

/// sum_nu C_nu(N, Theta(a)) psi(h_nu) over the warped row.
inline CReal warped_extrapolate(const GluedFunction& psi0, const ThetaMap& theta, const Real& a, int N,
                                const Real& eps) {
  const auto row = warped_frequencies(theta, N, eps);
  const auto c = bernstein_coefficients<Real>(N, theta.forward(a));
  CReal s;
  for (int nu = 0; nu <= N; ++nu) s += c[nu] * psi0(theta.forward(row.values[nu]));
  return s;
}

struct WarpedRow {
  int N = 0;
  Real a;
  CReal value;
  Real abs_error;
};

inline std::vector<WarpedRow> warped_table(const GluedFunction& psi0, const ThetaMap& theta,
                                           std::span<const Real> a_grid, std::span<const int> Ns,
                                           const EpsilonSequence& eps, unsigned threads = 0) {
  std::vector<WarpedRow> out(a_grid.size() * Ns.size());
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const Real& a = a_grid[i / Ns.size()];
    const int N = Ns[i % Ns.size()];
    CReal v = warped_extrapolate(psi0, theta, a, N, eps.at(N));
    Real err = abs(v - psi0(theta.forward(a)));
    out[i] = {N, a, std::move(v), std::move(err)};
  });
  return out;
}

// ---------------------------------------------------------------------------
// |a| divergence under equispaced Lagrange interpolation.

/// Bits needed for Lagrange weights on N+1 equispaced nodes: max(113, N + 64).
inline unsigned lagrange_required_bits(int N) { return std::max(113U, static_cast<unsigned>(N) + 64U); }

struct DivergenceRow {
  int N = 0;
  Real a_used;
  bool perturbed = false;
  CReal value;
  Real abs_error;
};

/// | |a| - sum_nu w_nu(a) |1 - 2 nu/N| | with standard Lagrange weights on
/// the eps = 0 nodes. Points within 2^-20 of a node are moved by 2^-16 when
/// `perturb` is set; otherwise they raise node_collision_error.
inline std::vector<DivergenceRow> abs_lagrange_divergence(const Real& a_eval, std::span<const int> Ns,
                                                          bool perturb = true, unsigned threads = 0) {
  std::vector<DivergenceRow> out(Ns.size());
  parallel_for(Ns.size(), threads, [&](std::size_t i) {
    const int N = Ns[i];
    if (lagrange_required_bits(N) > static_cast<unsigned>(Real::working_precision())) {
      throw precision_error("Lagrange interpolation at N = " + std::to_string(N) + " needs " +
                            std::to_string(lagrange_required_bits(N)) + " bits");
    }
    const auto row = regular_frequencies(N, Real(0));
    Real a = a_eval;
    bool moved = false;
    for (const auto& h : row.values) {
      if (abs(a - h) < pow2(-20)) {
        if (!perturb) throw node_collision_error("a = " + to_decimal(a) + " coincides with a node at N = " + std::to_string(N));
        a = a + pow2(-16);
        moved = true;
        break;
      }
    }
    const auto w = lagrange_weights<Real>(row.values, a);
    Real s(0);
    for (int nu = 0; nu <= N; ++nu) s += w[nu] * abs(row.values[nu]);
    out[i] = {N, a, moved, CReal(s), abs(abs(a) - s)};
  });
  return out;
}

}  // namespace supershift
