#pragma once

// Forward-difference (Newton) form of the Bernstein extrapolation
// polynomial on [0, 1] and the numerical Taylor series built from it.

#include <string>
#include <vector>

#include "supershift/errors.hpp"
#include "supershift/numeric.hpp"
#include "supershift/parallel.hpp"
#include "supershift/sampling.hpp"
#include "supershift/supershift.hpp"

namespace supershift {

/// t -> 2t - 1 and its inverse a -> (a + 1)/2.
struct Upsilon {
  template <class T>
  static T forward(const T& t) {
    return T(T(2) * t - T(1));
  }
  template <class T>
  static T inverse(const T& a) {
    return T((a + T(1)) / T(2));
  }
};

/// Psi = psi o Upsilon on Upsilon^{-1}(A).
inline TargetFunction compose_upsilon(const TargetFunction& psi) {
  const Interval& A = psi.domain();
  Interval B{Upsilon::inverse(A.lo), Upsilon::inverse(A.hi), A.lo_unbounded, A.hi_unbounded};
  ExactSampler ex;
  if (psi.has_exact_sampler()) {
    ex = [f = psi.exact_sampler()](const Rational& t) { return f(Upsilon::forward(t)); };
  }
  return TargetFunction(psi.name() + " o Upsilon", psi.kind(), std::move(B),
                        [psi](const Real& t) { return psi(Upsilon::forward(t)); }, std::move(ex));
}

template <class T>
T difference_step(int N, const T& eps) {
  return T((T(1) - eps) / T(N));
}

/// Samples Psi(b' + j h), j = 0..N; exact mode uses the exact sampler path.
template <class T>
std::vector<Complex<T>> difference_samples(const TargetFunction& Psi, const T& b_prime, int N, const T& eps) {
  if (N < 1) throw domain_error("N must be positive");
  check_epsilon(eps);
  const T h = difference_step(N, eps);
  std::vector<Complex<T>> s;
  s.reserve(static_cast<std::size_t>(N) + 1);
  for (int j = 0; j <= N; ++j) {
    const T t = T(b_prime + T(j) * h);
    if constexpr (is_exact_v<T>) {
      s.push_back(Psi.exact(t));
    } else {
      s.push_back(Psi(t));
    }
  }
  return s;
}

/// rows[k][j] = (Delta_h)^k Psi(b' + j h), j = 0..N-k.
template <class T>
struct ForwardDifferenceTable {
  T b_prime;
  T h;
  std::vector<std::vector<Complex<T>>> rows;

  const Complex<T>& at_base(int k) const { return rows.at(static_cast<std::size_t>(k)).front(); }
};

/// Float mode: the recurrence Delta^{k+1} = shift(Delta^k) - Delta^k.
/// Exact mode: each entry from the alternating binomial sum.
template <class T>
ForwardDifferenceTable<T> forward_differences(const TargetFunction& Psi, const T& b_prime, int N, const T& eps) {
  ForwardDifferenceTable<T> tab{b_prime, difference_step(N, eps), {}};
  auto samples = difference_samples(Psi, b_prime, N, eps);
  if constexpr (is_exact_v<T>) {
    for (int k = 0; k <= N; ++k) {
      std::vector<CRational> row;
      for (int j = 0; j + k <= N; ++j) {
        CRational d;
        for (int i = 0; i <= k; ++i) {
          Rational b(binomial(static_cast<unsigned long>(k), static_cast<unsigned long>(i)));
          if ((k - i) % 2) b = -b;
          d += b * samples[static_cast<std::size_t>(j + i)];
        }
        row.push_back(d);
      }
      tab.rows.push_back(std::move(row));
    }
  } else {
    tab.rows.push_back(std::move(samples));
    for (int k = 1; k <= N; ++k) {
      const auto& prev = tab.rows.back();
      std::vector<CReal> row;
      row.reserve(prev.size() - 1);
      for (std::size_t j = 0; j + 1 < prev.size(); ++j) row.push_back(prev[j + 1] - prev[j]);
      tab.rows.push_back(std::move(row));
    }
  }
  return tab;
}

/// sum_k a_k X^k, the monomial form of
/// sum_nu binom(N, nu) X^nu (1 - X)^(N - nu) Psi(b' + nu h).
template <class T>
struct BernsteinFormPoly {
  int N = 0;
  T eps;
  T b_prime;
  std::vector<Complex<T>> coefficients;

  Complex<T> operator()(const Complex<T>& X) const {
    Complex<T> s;
    for (std::size_t k = coefficients.size(); k-- > 0;) s = s * X + coefficients[k];
    return s;
  }
};

/// a_k = N!/(N-k)! Delta^k / k! = binom(N, k) Delta^k.
template <class T>
BernsteinFormPoly<T> bernstein_form(const TargetFunction& Psi, const T& b_prime, int N, const T& eps) {
  auto tab = forward_differences(Psi, b_prime, N, eps);
  BernsteinFormPoly<T> p{N, eps, b_prime, {}};
  for (int k = 0; k <= N; ++k) {
    T b = from_integer<T>(binomial(static_cast<unsigned long>(N), static_cast<unsigned long>(k)));
    p.coefficients.push_back(b * tab.at_base(k));
  }
  return p;
}

/// The defining binomial sum, evaluated directly.
template <class T>
Complex<T> bernstein_sum(const TargetFunction& Psi, const T& b_prime, int N, const T& eps, const Complex<T>& X) {
  auto samples = difference_samples(Psi, b_prime, N, eps);
  const Complex<T> Y = Complex<T>(T(1)) - X;
  Complex<T> s;
  for (int nu = 0; nu <= N; ++nu) {
    T b = from_integer<T>(binomial(static_cast<unsigned long>(N), static_cast<unsigned long>(nu)));
    s += b * (ipow(X, static_cast<unsigned long>(nu)) * ipow(Y, static_cast<unsigned long>(N - nu))) * samples[nu];
  }
  return s;
}

/// Monomial coefficients of the binomial sum by direct expansion of
/// X^nu (1 - X)^(N - nu); independent of the difference table.
template <class T>
std::vector<Complex<T>> bernstein_monomials(const TargetFunction& Psi, const T& b_prime, int N, const T& eps) {
  auto samples = difference_samples(Psi, b_prime, N, eps);
  std::vector<Complex<T>> c(static_cast<std::size_t>(N) + 1);
  for (int nu = 0; nu <= N; ++nu) {
    const T bn = from_integer<T>(binomial(static_cast<unsigned long>(N), static_cast<unsigned long>(nu)));
    for (int j = 0; j <= N - nu; ++j) {
      T b = T(bn * from_integer<T>(binomial(static_cast<unsigned long>(N - nu), static_cast<unsigned long>(j))));
      if (j % 2) b = T(-b);
      c[static_cast<std::size_t>(nu + j)] += b * samples[nu];
    }
  }
  return c;
}

/// Coefficient k read from the degree-k coefficient of the N = M k form.
struct NumericalTaylorSeries {
  int M = 1;
  Real b_prime;
  std::vector<CReal> coefficients;

  std::string csv() const;
};

/// |a_k|^(1/k), with 0 for k = 0 and vanishing coefficients.
inline Real root_stat(const CReal& a, int k) {
  if (k == 0) return Real(0);
  const Real m = abs(a);
  if (m.is_zero()) return Real(0);
  return pow(m, Real(1) / Real(k));
}

inline std::string NumericalTaylorSeries::csv() const {
  std::string out = "kappa,coefficient_real,coefficient_imag,root_stat\n";
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    out += std::to_string(k) + "," + to_decimal(coefficients[k].re) + "," + to_decimal(coefficients[k].im) + "," +
           to_decimal(root_stat(coefficients[k], static_cast<int>(k))) + "\n";
  }
  return out;
}

inline NumericalTaylorSeries numerical_taylor(const TargetFunction& Psi, const Real& b_prime, int M, int kappa_max,
                                              const EpsilonSequence& eps, unsigned threads = 0) {
  if (M < 1) throw domain_error("M must be positive");
  if (kappa_max < 0) throw domain_error("kappa_max must be non-negative");
  NumericalTaylorSeries s{M, b_prime, std::vector<CReal>(static_cast<std::size_t>(kappa_max) + 1)};
  s.coefficients[0] = Psi(b_prime);
  parallel_for(static_cast<std::size_t>(kappa_max), threads, [&](std::size_t i) {
    const int k = static_cast<int>(i) + 1;
    const int N = M * k;
    s.coefficients[static_cast<std::size_t>(k)] = bernstein_form(Psi, b_prime, N, eps.at(N)).coefficients[k];
  });
  return s;
}

/// max over k in [ceil(k_max/2), k_max] of |a_k|^(1/k).
inline Real radius_diagnostic(const std::vector<CReal>& coefficients) {
  const int kmax = static_cast<int>(coefficients.size()) - 1;
  if (kmax < 8) throw domain_error("radius diagnostic needs kappa_max >= 8");
  Real r(0);
  for (int k = (kmax + 1) / 2; k <= kmax; ++k) r = max(r, root_stat(coefficients[static_cast<std::size_t>(k)], k));
  return r;
}

inline Real radius_diagnostic(const NumericalTaylorSeries& s) { return radius_diagnostic(s.coefficients); }

}  // namespace supershift
