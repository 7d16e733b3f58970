#pragma once

// Generalized trigonometric polynomials sum_nu C_nu exp(i h_nu z): the
// Bernstein (regular sampling), Lagrange-Hermite (arbitrary nodes) and
// Xi-product (almost-regular sampling) families, their closed forms and
// remainder certificates.

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "supershift/errors.hpp"
#include "supershift/numeric.hpp"
#include "supershift/sampling.hpp"

namespace supershift {

enum class ProvenanceKind { Bernstein, Lagrange, XiProduct, Custom };

inline std::string to_string(ProvenanceKind k) {
  switch (k) {
    case ProvenanceKind::Bernstein:
      return "Bernstein";
    case ProvenanceKind::Lagrange:
      return "Lagrange";
    case ProvenanceKind::XiProduct:
      return "XiProduct";
    case ProvenanceKind::Custom:
      return "Custom";
  }
  return "?";
}

template <class T>
struct Provenance {
  ProvenanceKind kind = ProvenanceKind::Custom;
  int N = 0;
  T a{};
  T eps{};
};

template <class T>
struct Term {
  Complex<T> amplitude;
  T frequency;
};

/// sum_nu amplitude_nu exp(i frequency_nu z), frequencies strictly decreasing.
template <class T>
class TrigPoly {
 public:
  TrigPoly() = default;
  TrigPoly(std::vector<Term<T>> terms, Provenance<T> meta) : terms_(std::move(terms)), meta_(std::move(meta)) {
    check();
  }

  const std::vector<Term<T>>& terms() const { return terms_; }
  const Provenance<T>& provenance() const { return meta_; }
  std::size_t size() const { return terms_.size(); }

  Complex<T> amplitude_sum() const {
    Complex<T> s;
    for (const auto& t : terms_) s += t.amplitude;
    return s;
  }

 private:
  void check() const {
    for (std::size_t i = 1; i < terms_.size(); ++i) {
      if (!(terms_[i].frequency < terms_[i - 1].frequency)) {
        throw validation_error("trigonometric polynomial frequencies must be strictly decreasing");
      }
    }
    const auto k = meta_.kind;
    if (k != ProvenanceKind::Bernstein && k != ProvenanceKind::Lagrange) return;
    const Complex<T> s = amplitude_sum();
    if constexpr (is_exact_v<T>) {
      if (!(s == Complex<T>(T(1)))) throw validation_error("amplitudes must sum to 1");
    } else {
      const Real tol = pow2(-static_cast<long>(Real::working_precision() / 2));
      Real mass(0);
      for (const auto& t : terms_) mass += abs(t.amplitude);
      if (abs(s - CReal(Real(1))) > tol * max(mass, Real(1))) {
        throw validation_error("amplitudes must sum to 1");
      }
    }
    if (k == ProvenanceKind::Bernstein && meta_.a >= -1 && meta_.a <= 1) {
      for (const auto& t : terms_) {
        if (!(t.amplitude.im == 0) || t.amplitude.re < 0) {
          throw validation_error("Bernstein amplitudes for |a| <= 1 must be real and non-negative");
        }
      }
    }
  }

  std::vector<Term<T>> terms_;
  Provenance<T> meta_;
};

// ---------------------------------------------------------------------------
// Precision guard.

/// Mantissa bits needed for N-term Bernstein sums at parameter a:
/// max(113, ceil(N log2(1 + |a|)) + 64).
inline unsigned required_bits(int N, double abs_a) {
  const double grow = std::ceil(static_cast<double>(N) * std::log2(1.0 + abs_a));
  return std::max(113U, static_cast<unsigned>(grow) + 64U);
}

inline void check_guard(int N, const Real& a) {
  const unsigned need = required_bits(N, std::abs(a.to_double()));
  if (need > static_cast<unsigned>(Real::working_precision())) {
    throw precision_error("N = " + std::to_string(N) + ", a = " + to_decimal(a) + " needs " + std::to_string(need) +
                          " mantissa bits, policy allows " + std::to_string(Real::working_precision()));
  }
}

// ---------------------------------------------------------------------------
// Coefficient rules.

/// C_nu(N, a) = binom(N, nu) ((1+a)/2)^(N-nu) ((1-a)/2)^nu, nu = 0..N.
template <class T>
std::vector<T> bernstein_coefficients(int N, const T& a) {
  if (N < 1) throw domain_error("N must be positive");
  if constexpr (!is_exact_v<T>) check_guard(N, a);
  const T p = T((T(1) + a) / T(2));
  const T q = T((T(1) - a) / T(2));
  std::vector<T> ppow(static_cast<std::size_t>(N) + 1), qpow(static_cast<std::size_t>(N) + 1);
  ppow[0] = T(1);
  qpow[0] = T(1);
  for (int k = 1; k <= N; ++k) {
    ppow[k] = T(ppow[k - 1] * p);
    qpow[k] = T(qpow[k - 1] * q);
  }
  std::vector<T> c;
  c.reserve(static_cast<std::size_t>(N) + 1);
  for (int nu = 0; nu <= N; ++nu) {
    c.push_back(T(from_integer<T>(binomial(N, nu)) * ppow[N - nu] * qpow[nu]));
  }
  return c;
}

template <class T>
void check_distinct_nodes(std::span<const T> nodes) {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      bool same;
      if constexpr (is_exact_v<T>) {
        same = nodes[i] == nodes[j];
      } else {
        same = abs(nodes[i] - nodes[j]) <= merge_tolerance();
      }
      if (same) throw degenerate_nodes_error("interpolation nodes " + std::to_string(i) + " and " +
                                             std::to_string(j) + " coincide");
    }
  }
}

/// Lagrange basis values w_nu(a) = prod_{nu' != nu} (a - h_nu') / (h_nu - h_nu').
template <class T>
std::vector<T> lagrange_weights(std::span<const T> nodes, const T& a) {
  if (nodes.size() < 2) throw domain_error("Lagrange interpolation needs at least two nodes");
  check_distinct_nodes(nodes);
  std::vector<T> w(nodes.size(), T(0));
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (nodes[j] == a) {
      w[j] = T(1);
      return w;
    }
  }
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    T num(1), den(1);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (k == j) continue;
      num = T(num * T(a - nodes[k]));
      den = T(den * T(nodes[j] - nodes[k]));
    }
    w[j] = T(num / den);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Constructors for the three families.

template <class T>
TrigPoly<T> bernstein_trigpoly(int N, const T& eps, const T& lambda) {
  auto h = regular_frequency_values<T>(N, eps);
  auto c = bernstein_coefficients<T>(N, lambda);
  std::vector<Term<T>> terms;
  terms.reserve(h.size());
  for (std::size_t nu = 0; nu < h.size(); ++nu) terms.push_back({Complex<T>(c[nu]), h[nu]});
  return TrigPoly<T>(std::move(terms), {ProvenanceKind::Bernstein, N, lambda, eps});
}

inline TrigPoly<Real> lagrange_trigpoly(const FrequencyRow& row, const Real& lambda) {
  if (row.nu() != row.N) throw shape_error("Lagrange rows need nu(N) = N");
  auto w = lagrange_weights<Real>(row.values, lambda);
  std::vector<Term<Real>> terms;
  terms.reserve(w.size());
  for (std::size_t nu = 0; nu < w.size(); ++nu) terms.push_back({CReal(w[nu]), row.values[nu]});
  return TrigPoly<Real>(std::move(terms), {ProvenanceKind::Lagrange, row.N, lambda, Real(0)});
}

/// Expanded form of the Xi product; merged points carry summed amplitudes.
inline TrigPoly<Real> xi_trigpoly(int N, std::span<const Real> xi, const Real& lambda) {
  const Real p = (Real(1) + lambda) / 2;
  const Real q = (Real(1) - lambda) / 2;
  auto pts = minkowski_expand<Real>(N, xi, p, q);
  std::vector<Term<Real>> terms;
  terms.reserve(pts.size());
  for (auto& [h, w] : pts) terms.push_back({CReal(w), h});
  return TrigPoly<Real>(std::move(terms), {ProvenanceKind::XiProduct, N, lambda, Real(0)});
}

// ---------------------------------------------------------------------------
// Evaluation.

/// Largest |Re| accepted by exp before MPFR's default exponent range overflows.
inline constexpr double kExponentLimit = 7.0e8;

/// sum_nu C_nu e^{i h_nu z}, summed in ascending nu.
inline CReal eval(const TrigPoly<Real>& T, const CReal& z) {
  Real hmax(0);
  for (const auto& t : T.terms()) hmax = max(hmax, abs(t.frequency));
  if ((abs(z.im) * hmax).to_double() > kExponentLimit) throw overflow_error("|Im z| max|h| exceeds exponent range");
  CReal s;
  for (const auto& t : T.terms()) {
    CReal phase{-(t.frequency * z.im), t.frequency * z.re};
    s += t.amplitude * exp(phase);
  }
  return s;
}

/// i * s * z for real s.
inline CReal i_times(const Real& s, const CReal& z) { return {-(s * z.im), s * z.re}; }

/// e^{-i eps z} (cos(z (1-eps)/N) + i lambda sin(z (1-eps)/N))^N.
///
/// The nodes are h_nu = (N - 2 nu)(1 - eps)/N - eps, hence the minus sign.
inline CReal eval_regular_closed_form(int N, const Real& eps, const Real& lambda, const CReal& z) {
  if (N < 1) throw domain_error("N must be positive");
  check_epsilon(eps);
  const Real s = (Real(1) - eps) / N;
  const CReal w{z.re * s, z.im * s};
  const CReal base = cos(w) + i_times(lambda, sin(w));
  return exp(i_times(-eps, z)) * ipow(base, static_cast<unsigned long>(N));
}

/// prod_k ((1+a)/2 e^{i d_k z} + (1-a)/2 e^{-i d_k z}), d_k = (1 - xi_k/N)/N.
inline CReal eval_xi_product(int N, std::span<const Real> xi, const Real& a, const CReal& z) {
  const auto d = minkowski_half_widths(N, xi);
  const Real p = (Real(1) + a) / 2;
  const Real q = (Real(1) - a) / 2;
  CReal prod(Real(1));
  for (const auto& dk : d) {
    const CReal u = exp(i_times(dk, z));
    const CReal v = u.conj() / u.norm();
    prod *= p * u + q * v;
  }
  return prod;
}

// ---------------------------------------------------------------------------
// Certificates.

enum class CertificateKind { LagrangeFactorial, HermiteContour, ExpGrowth };

inline std::string to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::LagrangeFactorial:
      return "LagrangeFactorial";
    case CertificateKind::HermiteContour:
      return "HermiteContour";
    case CertificateKind::ExpGrowth:
      return "ExpGrowth";
  }
  return "?";
}

struct ErrorCertificate {
  Real bound_value;
  CertificateKind formula_tag;
};

/// LagrangeFactorial: ((|a|+1)|z|)^(N+1)/(N+1)! (real z, nodes in [-1, 1]).
/// HermiteContour: (|a|+2) e^{(|a|+2)|z|}/2, a boundedness certificate only.
/// ExpGrowth: e^{(|a|+1)|z|}, the growth bound of the Xi products.
inline ErrorCertificate error_certificate(CertificateKind kind, const Real& a, const CReal& z, int N) {
  if (N < 1) throw domain_error("N must be positive");
  const Real za = abs(z);
  const Real aa = abs(a);
  switch (kind) {
    case CertificateKind::LagrangeFactorial: {
      const auto n1 = static_cast<unsigned long>(N) + 1;
      return {pow((aa + 1) * za, n1) / factorial(n1), kind};
    }
    case CertificateKind::HermiteContour:
      return {(aa + 2) * exp((aa + 2) * za) / 2, kind};
    case CertificateKind::ExpGrowth:
      return {exp((aa + 1) * za), kind};
  }
  throw domain_error("unknown certificate kind");
}

inline CertificateKind certificate_kind_from_string(const std::string& s) {
  if (s == "LagrangeFactorial") return CertificateKind::LagrangeFactorial;
  if (s == "HermiteContour") return CertificateKind::HermiteContour;
  if (s == "ExpGrowth") return CertificateKind::ExpGrowth;
  throw domain_error("unknown certificate kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// Limits.

/// Real interval; unbounded sides are flagged. Membership is open.
struct Interval {
  Real lo, hi;
  bool lo_unbounded = true;
  bool hi_unbounded = true;

  static Interval real_line() { return {Real(0), Real(0), true, true}; }
  static Interval open(Real lo, Real hi) {
    if (!(lo < hi)) throw domain_error("empty interval");
    return {std::move(lo), std::move(hi), false, false};
  }
  bool contains(const Real& x) const { return (lo_unbounded || lo < x) && (hi_unbounded || x < hi); }
  /// [x0, x1] contained in the (open) interval.
  bool contains_closed(const Real& x0, const Real& x1) const { return contains(x0) && contains(x1); }
  Interval negated() const { return {-hi, -lo, hi_unbounded, lo_unbounded}; }
  Interval shifted(const Real& a0) const { return {lo + a0, hi + a0, lo_unbounded, hi_unbounded}; }
  std::string describe() const {
    return std::string("(") + (lo_unbounded ? "-inf" : to_decimal(lo)) + ", " +
           (hi_unbounded ? "inf" : to_decimal(hi)) + ")";
  }
};

/// Limit C(a) e^{i g(a) x} of a superoscillating family on U, with V the
/// parameter set where |g| > 1 and C != 0.
struct SuperoscillationLimit {
  std::function<Real(const Real&)> g;
  std::function<CReal(const Real&)> C;
  Interval U = Interval::real_line();
  Interval V = Interval::real_line();

  /// g(a) = a, C = 1: the limit shared by the Bernstein, Lagrange and Xi families.
  static SuperoscillationLimit identity_shift() {
    return {[](const Real& a) { return a; }, [](const Real&) { return CReal(Real(1)); }, Interval::real_line(),
            Interval::real_line()};
  }

  /// Checks |g(a)| > 1 and C(a) != 0 on the points of the grid lying in V.
  void validate(std::span<const Real> a_grid) const {
    for (const auto& a : a_grid) {
      if (!V.contains(a)) continue;
      if (!(abs(g(a)) > 1)) throw validation_error("|g(a)| <= 1 at a = " + to_decimal(a) + " inside V");
      if (abs(C(a)).is_zero()) throw validation_error("C(a) = 0 at a = " + to_decimal(a) + " inside V");
    }
  }
};

// ---------------------------------------------------------------------------
// JSON.

inline nlohmann::json to_json(const TrigPoly<Real>& T) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : T.terms()) {
    terms.push_back({{"amplitude", {to_decimal(t.amplitude.re), to_decimal(t.amplitude.im)}},
                     {"frequency", to_decimal(t.frequency)}});
  }
  const auto& m = T.provenance();
  return {{"provenance", {{"kind", to_string(m.kind)}, {"N", m.N}, {"a", to_decimal(m.a)}, {"eps", to_decimal(m.eps)}}},
          {"terms", terms}};
}

inline TrigPoly<Real> trigpoly_from_json(const nlohmann::json& j) {
  const auto& m = j.at("provenance");
  Provenance<Real> meta;
  const auto kind = m.at("kind").get<std::string>();
  if (kind == "Bernstein") {
    meta.kind = ProvenanceKind::Bernstein;
  } else if (kind == "Lagrange") {
    meta.kind = ProvenanceKind::Lagrange;
  } else if (kind == "XiProduct") {
    meta.kind = ProvenanceKind::XiProduct;
  } else if (kind == "Custom") {
    meta.kind = ProvenanceKind::Custom;
  } else {
    throw validation_error("unknown provenance kind '" + kind + "'");
  }
  meta.N = m.at("N").get<int>();
  meta.a = Real(m.at("a").get<std::string>());
  meta.eps = Real(m.at("eps").get<std::string>());
  std::vector<Term<Real>> terms;
  for (const auto& t : j.at("terms")) {
    const auto& amp = t.at("amplitude");
    terms.push_back({CReal(Real(amp.at(0).get<std::string>()), Real(amp.at(1).get<std::string>())),
                     Real(t.at("frequency").get<std::string>())});
  }
  return TrigPoly<Real>(std::move(terms), std::move(meta));
}

}  // namespace supershift
