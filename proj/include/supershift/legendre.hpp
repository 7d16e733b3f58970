#pragma once

// Shifted Legendre basis l_nu(xi) = sqrt(2 nu + 1) P_nu(xi) on [0, 1], with
// P_nu(xi) = sum_k (-1)^k binom(nu, k) binom(nu + k, k) xi^k, and the
// projection of Bernstein-form polynomials onto it. All integrals are
// monomial moments 1/(k + 1).
//
// Projections store gamma~_nu = int_0^1 T(R xi) P_nu(xi) d xi, so that exact
// mode stays rational; gamma_nu = sqrt(2 nu + 1) gamma~_nu.

#include <string>
#include <vector>

#include "supershift/discrete_taylor.hpp"
#include "supershift/errors.hpp"
#include "supershift/numeric.hpp"

namespace supershift {

/// Integer monomial coefficients of P_nu.
inline std::vector<Integer> legendre_integer_coefficients(int nu) {
  if (nu < 0) throw domain_error("Legendre degree must be non-negative");
  std::vector<Integer> c;
  for (int k = 0; k <= nu; ++k) {
    Integer v = binomial(static_cast<unsigned long>(nu), static_cast<unsigned long>(k)) *
                binomial(static_cast<unsigned long>(nu + k), static_cast<unsigned long>(k));
    c.push_back(k % 2 ? Integer(-v) : v);
  }
  return c;
}

/// n / d in canonical form.
inline Rational ratio(const Integer& n, const Integer& d) {
  Rational q(n, d);
  q.canonicalize();
  return q;
}

/// Monomial coefficients of l_nu at working precision.
inline std::vector<Real> shifted_legendre(int nu) {
  const Real s = sqrt(Real(2 * nu + 1));
  std::vector<Real> out;
  for (const auto& c : legendre_integer_coefficients(nu)) out.push_back(s * Real(c));
  return out;
}

/// q sqrt(r), with r square-free of perfect squares folded into q.
struct Surd {
  Rational coefficient;
  Integer radicand{1};

  static Surd make(Rational q, Integer r) {
    if (q == 0) return {Rational(0), Integer(1)};
    if (mpz_perfect_square_p(r.get_mpz_t())) {
      Integer root;
      mpz_sqrt(root.get_mpz_t(), r.get_mpz_t());
      return {Rational(q * root), Integer(1)};
    }
    return {std::move(q), std::move(r)};
  }
  bool operator==(const Surd&) const = default;
  std::string str() const {
    return radicand == 1 ? coefficient.get_str() : coefficient.get_str() + "*sqrt(" + radicand.get_str() + ")";
  }
};

/// int_0^1 P_m P_n exactly.
inline Rational legendre_gram_unscaled(int m, int n) {
  const auto a = legendre_integer_coefficients(m);
  const auto b = legendre_integer_coefficients(n);
  Rational s(0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) s += ratio(Integer(a[i] * b[j]), Integer(i + j + 1));
  }
  return s;
}

/// int_0^1 l_m l_n exactly, as a surd.
inline Surd legendre_inner_product(int m, int n) {
  return Surd::make(legendre_gram_unscaled(m, n), Integer(2 * m + 1) * Integer(2 * n + 1));
}

template <class T>
struct LegendreCoefficients {
  int N = 0;
  T R;
  T b_prime;
  T eps;
  std::vector<Complex<T>> gamma_tilde;

  /// gamma_nu = sqrt(2 nu + 1) gamma~_nu at working precision.
  CReal gamma(int nu) const {
    const Real s = sqrt(Real(2 * nu + 1));
    const auto& g = gamma_tilde.at(static_cast<std::size_t>(nu));
    if constexpr (is_exact_v<T>) {
      return s * to_real(g);
    } else {
      return s * g;
    }
  }

  std::string csv() const {
    std::string out = "nu,gamma_real,gamma_imag\n";
    for (int nu = 0; nu <= N; ++nu) {
      const CReal g = gamma(nu);
      out += std::to_string(nu) + "," + to_decimal(g.re) + "," + to_decimal(g.im) + "\n";
    }
    return out;
  }
};

/// b_k = a_k R^k, the monomial coefficients of xi -> T(R xi).
template <class T>
std::vector<Complex<T>> scaled_coefficients(const BernsteinFormPoly<T>& poly, const T& R) {
  std::vector<Complex<T>> b;
  T Rk(1);
  for (const auto& a : poly.coefficients) {
    b.push_back(Rk * a);
    Rk = T(Rk * R);
  }
  return b;
}

template <class T>
LegendreCoefficients<T> project(const BernsteinFormPoly<T>& poly, const T& R) {
  if (R < 0) throw domain_error("projection radius must be non-negative");
  const auto b = scaled_coefficients(poly, R);
  const int N = poly.N;
  LegendreCoefficients<T> out{N, R, poly.b_prime, poly.eps, {}};
  for (int nu = 0; nu <= N; ++nu) {
    const auto P = legendre_integer_coefficients(nu);
    Complex<T> g;
    for (std::size_t k = 0; k < b.size(); ++k) {
      for (std::size_t j = 0; j < P.size(); ++j) {
        g += from_rational<T>(ratio(P[j], Integer(k + j + 1))) * b[k];
      }
    }
    out.gamma_tilde.push_back(g);
  }
  return out;
}

/// sum_nu gamma_nu l_nu(xi) = sum_nu (2 nu + 1) gamma~_nu P_nu(xi).
template <class T>
Complex<T> reconstruct(const LegendreCoefficients<T>& c, const T& xi) {
  Complex<T> s;
  for (int nu = 0; nu <= c.N; ++nu) {
    const auto P = legendre_integer_coefficients(nu);
    T p(0);
    for (std::size_t k = P.size(); k-- > 0;) p = T(p * xi + from_integer<T>(P[k]));
    s += T(T(2 * nu + 1) * p) * c.gamma_tilde[static_cast<std::size_t>(nu)];
  }
  return s;
}

/// sum_nu |gamma_nu|^2.
template <class T>
T parseval_sum(const LegendreCoefficients<T>& c) {
  T s(0);
  for (int nu = 0; nu <= c.N; ++nu) s = T(s + T(T(2 * nu + 1) * c.gamma_tilde[static_cast<std::size_t>(nu)].norm()));
  return s;
}

/// int_0^1 |T(R xi)|^2 d xi from monomial moments.
template <class T>
T l2_norm_squared(const BernsteinFormPoly<T>& poly, const T& R) {
  const auto b = scaled_coefficients(poly, R);
  Complex<T> s;
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      s += from_rational<T>(Rational(1, static_cast<unsigned long>(i + j + 1))) * (b[i] * b[j].conj());
    }
  }
  return s.re;
}

/// max_k |a_k R^k - (-1)^k binom(2k, k) sum_{nu >= k} sqrt(2 nu + 1) binom(nu + k, nu - k) gamma_nu|.
/// Exact mode compares componentwise maxima (zero iff the identity holds).
template <class T>
T coefficient_identity_check(const BernsteinFormPoly<T>& poly, const LegendreCoefficients<T>& c, const T& R) {
  if (poly.N != c.N || !(poly.b_prime == c.b_prime) || !(poly.eps == c.eps) || !(R == c.R)) {
    throw shape_error("Bernstein form and Legendre coefficients do not match");
  }
  const auto b = scaled_coefficients(poly, R);
  T worst(0);
  for (int k = 0; k <= poly.N; ++k) {
    Complex<T> s;
    for (int nu = k; nu <= poly.N; ++nu) {
      const Integer w = Integer(2 * nu + 1) *
                        binomial(static_cast<unsigned long>(nu + k), static_cast<unsigned long>(nu - k));
      s += from_integer<T>(w) * c.gamma_tilde[static_cast<std::size_t>(nu)];
    }
    Integer cb = binomial(static_cast<unsigned long>(2 * k), static_cast<unsigned long>(k));
    if (k % 2) cb = -cb;
    const Complex<T> diff = b[static_cast<std::size_t>(k)] - from_integer<T>(cb) * s;
    T r;
    if constexpr (is_exact_v<T>) {
      r = max_component(diff);
    } else {
      r = abs(diff);
    }
    if (worst < r) worst = r;
  }
  return worst;
}

}  // namespace supershift
