#pragma once

// Arithmetic layer: an RAII MPFR real with thread-local working precision,
// GMP rationals for exact mode, and a small complex template over both.

#include <gmpxx.h>
#include <mpfr.h>

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>

#include "supershift/errors.hpp"

namespace supershift {

using Rational = mpq_class;
using Integer = mpz_class;

namespace detail {
inline mpfr_prec_t& thread_precision() {
  thread_local mpfr_prec_t bits = 256;
  return bits;
}
}  // namespace detail

/// Extended-precision real number backed by MPFR.
///
/// Every freshly computed value is rounded to nearest at the calling
/// thread's working precision (see ScopedPrecision). Copies keep the
/// precision of their source, so a copy is always bit-exact.
class Real {
 public:
  static mpfr_prec_t working_precision() { return detail::thread_precision(); }
  static void set_working_precision(mpfr_prec_t bits) { detail::thread_precision() = bits; }

  Real() {
    mpfr_init2(v_, working_precision());
    mpfr_set_zero(v_, 1);
  }
  Real(int x) : Real(static_cast<long>(x)) {}
  Real(long x) {
    mpfr_init2(v_, working_precision());
    mpfr_set_si(v_, x, MPFR_RNDN);
  }
  Real(unsigned x) : Real(static_cast<unsigned long>(x)) {}
  Real(unsigned long x) {
    mpfr_init2(v_, working_precision());
    mpfr_set_ui(v_, x, MPFR_RNDN);
  }
  Real(long long x) : Real(static_cast<long>(x)) {}
  Real(double x) {
    mpfr_init2(v_, working_precision());
    mpfr_set_d(v_, x, MPFR_RNDN);
  }
  explicit Real(const Integer& x) {
    mpfr_init2(v_, working_precision());
    mpfr_set_z(v_, x.get_mpz_t(), MPFR_RNDN);
  }
  explicit Real(const Rational& x) {
    mpfr_init2(v_, working_precision());
    mpfr_set_q(v_, x.get_mpq_t(), MPFR_RNDN);
  }
  /// Parses a decimal (or "inf"/"nan") string, rounding to nearest.
  explicit Real(std::string_view text) {
    mpfr_init2(v_, working_precision());
    std::string s(text);
    char* end = nullptr;
    if (!s.empty()) mpfr_strtofr(v_, s.c_str(), &end, 10, MPFR_RNDN);
    if (s.empty() || end == nullptr || *end != '\0') {
      mpfr_clear(v_);
      throw domain_error("not a decimal number: '" + s + "'");
    }
  }
  explicit Real(const char* text) : Real(std::string_view(text)) {}

  Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Real(Real&& o) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, o.v_);
  }
  Real& operator=(const Real& o) {
    if (this != &o) {
      if (mpfr_get_prec(v_) != mpfr_get_prec(o.v_)) mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  mpfr_srcptr get() const { return v_; }
  mpfr_ptr get() { return v_; }
  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  /// Exact rational value of this (dyadic) number.
  Rational to_rational() const {
    if (!is_finite()) throw domain_error("non-finite value has no rational form");
    Integer m;
    mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), v_);
    Rational q(m);
    if (e > 0) {
      mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
    } else if (e < 0) {
      mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
    }
    q.canonicalize();
    return q;
  }

  Real operator-() const {
    Real r;
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
  }
  Real& operator+=(const Real& o) { return *this = *this + o; }
  Real& operator-=(const Real& o) { return *this = *this - o; }
  Real& operator*=(const Real& o) { return *this = *this * o; }
  Real& operator/=(const Real& o) { return *this = *this / o; }

  friend Real operator+(const Real& a, const Real& b) {
    Real r;
    mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend Real operator-(const Real& a, const Real& b) {
    Real r;
    mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend Real operator*(const Real& a, const Real& b) {
    Real r;
    mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend Real operator/(const Real& a, const Real& b) {
    Real r;
    mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend std::partial_ordering operator<=>(const Real& a, const Real& b) {
    if (mpfr_unordered_p(a.v_, b.v_)) return std::partial_ordering::unordered;
    int c = mpfr_cmp(a.v_, b.v_);
    return c < 0 ? std::partial_ordering::less
                 : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
  }

 private:
  mpfr_t v_;
};

/// Sets the calling thread's working precision for the lifetime of the guard.
class ScopedPrecision {
 public:
  explicit ScopedPrecision(mpfr_prec_t bits) : saved_(Real::working_precision()) {
    if (bits < MPFR_PREC_MIN || bits > (1 << 20)) throw precision_error("unsupported precision");
    Real::set_working_precision(bits);
  }
  ScopedPrecision(const ScopedPrecision&) = delete;
  ScopedPrecision& operator=(const ScopedPrecision&) = delete;
  ~ScopedPrecision() { Real::set_working_precision(saved_); }

 private:
  mpfr_prec_t saved_;
};

/// Mantissa width used by float-mode pipelines.
struct PrecisionPolicy {
  unsigned mantissa_bits = 256;

  void validate() const {
    if (mantissa_bits < 64) throw precision_error("precision policy needs at least 64 mantissa bits");
  }
  /// Relative tolerance 2^(-bits/2) used by the identity checks.
  Real half_precision_tolerance() const;
};

// ---------------------------------------------------------------------------
// Elementary functions.

namespace detail {
template <int (*F)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t)>
inline Real unary(const Real& x) {
  Real r;
  F(r.get(), x.get(), MPFR_RNDN);
  return r;
}
}  // namespace detail

inline Real abs(const Real& x) { return detail::unary<mpfr_abs>(x); }
inline Real sqrt(const Real& x) { return detail::unary<mpfr_sqrt>(x); }
inline Real exp(const Real& x) { return detail::unary<mpfr_exp>(x); }
inline Real log(const Real& x) { return detail::unary<mpfr_log>(x); }
inline Real log2(const Real& x) { return detail::unary<mpfr_log2>(x); }
inline Real sin(const Real& x) { return detail::unary<mpfr_sin>(x); }
inline Real cos(const Real& x) { return detail::unary<mpfr_cos>(x); }
inline Real tan(const Real& x) { return detail::unary<mpfr_tan>(x); }
inline Real atan(const Real& x) { return detail::unary<mpfr_atan>(x); }
inline Real sinh(const Real& x) { return detail::unary<mpfr_sinh>(x); }
inline Real cosh(const Real& x) { return detail::unary<mpfr_cosh>(x); }
inline Real floor(const Real& x) {
  Real r;
  mpfr_floor(r.get(), x.get());
  return r;
}

inline void sin_cos(const Real& x, Real& s, Real& c) { mpfr_sin_cos(s.get(), c.get(), x.get(), MPFR_RNDN); }
inline void sinh_cosh(const Real& x, Real& s, Real& c) { mpfr_sinh_cosh(s.get(), c.get(), x.get(), MPFR_RNDN); }

inline Real atan2(const Real& y, const Real& x) {
  Real r;
  mpfr_atan2(r.get(), y.get(), x.get(), MPFR_RNDN);
  return r;
}
inline Real hypot(const Real& x, const Real& y) {
  Real r;
  mpfr_hypot(r.get(), x.get(), y.get(), MPFR_RNDN);
  return r;
}
inline Real pow(const Real& x, const Real& y) {
  Real r;
  mpfr_pow(r.get(), x.get(), y.get(), MPFR_RNDN);
  return r;
}
inline Real pow(const Real& x, unsigned long n) {
  Real r;
  mpfr_pow_ui(r.get(), x.get(), n, MPFR_RNDN);
  return r;
}
/// x * 2^e, exact.
inline Real ldexp(const Real& x, long e) {
  Real r(x);
  mpfr_mul_2si(r.get(), x.get(), e, MPFR_RNDN);
  return r;
}
inline Real factorial(unsigned long n) {
  Real r;
  mpfr_fac_ui(r.get(), n, MPFR_RNDN);
  return r;
}
inline Real pi() {
  Real r;
  mpfr_const_pi(r.get(), MPFR_RNDN);
  return r;
}
inline const Real& max(const Real& a, const Real& b) { return a < b ? b : a; }
inline const Real& min(const Real& a, const Real& b) { return b < a ? b : a; }

/// 2^e at working precision.
inline Real pow2(long e) { return ldexp(Real(1), e); }

inline Real PrecisionPolicy::half_precision_tolerance() const {
  return pow2(-static_cast<long>(mantissa_bits / 2));
}

/// Shortest decimal string that reads back to the same value at the value's precision.
inline std::string to_decimal(const Real& x) {
  if (x.is_zero()) return x.sign() < 0 || mpfr_signbit(x.get()) ? "-0" : "0";
  if (!x.is_finite()) {
    if (mpfr_nan_p(x.get())) return "nan";
    return x.sign() < 0 ? "-inf" : "inf";
  }
  mpfr_exp_t e = 0;
  char* raw = mpfr_get_str(nullptr, &e, 10, 0, x.get(), MPFR_RNDN);
  std::string digits(raw);
  mpfr_free_str(raw);
  std::string out;
  if (digits.front() == '-') {
    out.push_back('-');
    digits.erase(0, 1);
  }
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
  out.push_back(digits.front());
  if (digits.size() > 1) {
    out.push_back('.');
    out.append(digits, 1, std::string::npos);
  }
  if (e - 1 != 0) out += "e" + std::to_string(static_cast<long>(e - 1));
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Real& x) { return os << to_decimal(x); }

/// Exact key of a value (precision plus every mantissa bit), for memo tables.
inline std::string exact_key(const Real& x) {
  std::string key = std::to_string(static_cast<long>(x.precision())) + ":";
  if (x.is_zero() || !x.is_finite()) return key + to_decimal(x);
  mpfr_exp_t e = 0;
  size_t digits = static_cast<size_t>(x.precision() + 7) / 4 + 2;
  char* raw = mpfr_get_str(nullptr, &e, 16, digits, x.get(), MPFR_RNDN);
  key += raw;
  mpfr_free_str(raw);
  return key + "p" + std::to_string(static_cast<long>(e));
}

// ---------------------------------------------------------------------------
// Scalar traits shared by float mode (Real) and exact mode (Rational).

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

inline Rational abs(const Rational& q) { return ::abs(q); }

/// Converts an integer or rational to the scalar type T.
template <class T>
T from_rational(const Rational& q) {
  if constexpr (is_exact_v<T>) {
    return q;
  } else {
    return Real(q);
  }
}

template <class T>
T from_integer(const Integer& z) {
  if constexpr (is_exact_v<T>) {
    return Rational(z);
  } else {
    return Real(z);
  }
}

inline Integer binomial(unsigned long n, unsigned long k) {
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

/// x^n by binary powering; fixed multiplication order.
template <class T>
T ipow(const T& x, unsigned long n) {
  T result(1);
  T base(x);
  while (n > 0) {
    if (n & 1UL) result = T(result * base);
    n >>= 1;
    if (n > 0) base = T(base * base);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Complex numbers over Real or Rational.

template <class T>
struct Complex {
  T re{};
  T im{};

  Complex() : re(0), im(0) {}
  Complex(const T& r) : re(r), im(0) {}  // NOLINT(google-explicit-constructor)
  Complex(const T& r, const T& i) : re(r), im(i) {}

  Complex conj() const { return {re, T(-im)}; }
  /// |z|^2, exact in exact mode.
  T norm() const { return T(re * re + im * im); }

  Complex operator-() const { return {T(-re), T(-im)}; }
  Complex& operator+=(const Complex& o) { return *this = *this + o; }
  Complex& operator-=(const Complex& o) { return *this = *this - o; }
  Complex& operator*=(const Complex& o) { return *this = *this * o; }

  friend Complex operator+(const Complex& a, const Complex& b) { return {T(a.re + b.re), T(a.im + b.im)}; }
  friend Complex operator-(const Complex& a, const Complex& b) { return {T(a.re - b.re), T(a.im - b.im)}; }
  friend Complex operator*(const Complex& a, const Complex& b) {
    return {T(a.re * b.re - a.im * b.im), T(a.re * b.im + a.im * b.re)};
  }
  friend Complex operator*(const T& s, const Complex& b) { return {T(s * b.re), T(s * b.im)}; }
  friend Complex operator*(const Complex& b, const T& s) { return {T(s * b.re), T(s * b.im)}; }
  friend Complex operator/(const Complex& a, const T& s) { return {T(a.re / s), T(a.im / s)}; }
  friend Complex operator/(const Complex& a, const Complex& b) {
    T d = b.norm();
    return {T((a.re * b.re + a.im * b.im) / d), T((a.im * b.re - a.re * b.im) / d)};
  }
  friend bool operator==(const Complex& a, const Complex& b) { return a.re == b.re && a.im == b.im; }
};

using CReal = Complex<Real>;
using CRational = Complex<Rational>;

inline Real abs(const CReal& z) { return hypot(z.re, z.im); }
inline Real arg(const CReal& z) { return atan2(z.im, z.re); }

/// e^z, each component from correctly rounded MPFR primitives.
inline CReal exp(const CReal& z) {
  Real m = exp(z.re);
  Real s, c;
  sin_cos(z.im, s, c);
  return {m * c, m * s};
}
/// e^{i t} for real t.
inline CReal expi(const Real& t) {
  Real s, c;
  sin_cos(t, s, c);
  return {c, s};
}
inline CReal log(const CReal& z) { return {log(abs(z)), arg(z)}; }
inline CReal cos(const CReal& z) {
  Real s, c, sh, ch;
  sin_cos(z.re, s, c);
  sinh_cosh(z.im, sh, ch);
  return {c * ch, -(s * sh)};
}
inline CReal sin(const CReal& z) {
  Real s, c, sh, ch;
  sin_cos(z.re, s, c);
  sinh_cosh(z.im, sh, ch);
  return {s * ch, c * sh};
}

inline CRational to_rational(const CReal& z) { return {z.re.to_rational(), z.im.to_rational()}; }
inline CReal to_real(const CRational& z) { return {Real(z.re), Real(z.im)}; }

/// Largest componentwise magnitude; zero iff z == 0.
inline Rational max_component(const CRational& z) {
  Rational a = abs(z.re), b = abs(z.im);
  return a < b ? b : a;
}

inline std::ostream& operator<<(std::ostream& os, const CReal& z) {
  return os << "(" << z.re << ", " << z.im << ")";
}

}  // namespace supershift
