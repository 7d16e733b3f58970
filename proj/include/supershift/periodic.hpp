#pragma once

// Periodic supershifts: finitely supported Fourier spectra, the
// autocorrelation psi~, the Bernstein multiplier identity and a Plancherel
// decay certificate for Fourier coefficients.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "supershift/errors.hpp"
#include "supershift/numeric.hpp"
#include "supershift/parallel.hpp"
#include "supershift/supershift.hpp"
#include "supershift/trigpoly.hpp"

namespace supershift {

/// psi(a) = sum_k gamma_k e^{2 pi i k a / T} over a finite support.
struct FourierSpectrum {
  Real T{2 * pi()};
  std::map<int, CReal> coefficients;

  void validate() const {
    if (!(T > 0)) throw domain_error("period must be positive");
  }

  /// 2 pi k / T.
  Real angular(int k) const { return 2 * pi() * Real(k) / T; }

  CReal operator()(const Real& a) const {
    CReal s;
    for (const auto& [k, g] : coefficients) s += g * expi(angular(k) * a);
    return s;
  }

  int max_abs_index() const {
    int m = 0;
    for (const auto& [k, g] : coefficients) m = std::max(m, std::abs(k));
    return m;
  }

  TargetFunction target(std::string name = "periodic") const {
    return TargetFunction(std::move(name), TargetKind::PeriodicSpectrum, Interval::real_line(),
                          [s = *this](const Real& a) { return s(a); });
  }

  /// gamma_k = e^{-alpha |k|}, |k| <= K.
  static FourierSpectrum exp_decay(int K, const Real& alpha, Real T = 2 * pi()) {
    FourierSpectrum s{std::move(T), {}};
    for (int k = -K; k <= K; ++k) s.coefficients[k] = CReal(exp(-alpha * Real(std::abs(k))));
    return s;
  }

  /// gamma_k = 1/(1 + k^2), |k| <= K.
  static FourierSpectrum poly_decay(int K, Real T = 2 * pi()) {
    FourierSpectrum s{std::move(T), {}};
    for (int k = -K; k <= K; ++k) s.coefficients[k] = CReal(Real(1) / Real(1 + k * k));
    return s;
  }
};

/// Spectrum {gamma_k^2} of psi~(a) = (1/T) int_0^T psi(a - tau) psi(tau) d tau.
inline FourierSpectrum autocorrelate(const FourierSpectrum& s) {
  s.validate();
  FourierSpectrum out{s.T, {}};
  for (const auto& [k, g] : s.coefficients) {
    CReal g2 = g * g;
    if (!(g2.re.is_zero() && g2.im.is_zero())) out.coefficients[k] = std::move(g2);
  }
  return out;
}

/// Trapezoid rule with n uniform nodes for (1/T) int_0^T psi(a - tau) psi(tau) d tau;
/// exact for band-limited psi when n exceeds twice the largest |k|.
inline CReal autocorrelation_by_quadrature(const FourierSpectrum& s, const Real& a, unsigned n = 1U << 14) {
  CReal sum;
  const Real dt = s.T / Real(static_cast<unsigned long>(n));
  for (unsigned j = 0; j < n; ++j) {
    const Real tau = dt * Real(static_cast<unsigned long>(j));
    sum += s(a - tau) * s(tau);
  }
  return sum / Real(static_cast<unsigned long>(n));
}

/// (cos w + i R sin w)^N with w = 2 pi k/(T N).
inline CReal multiplier(int N, const Real& R, int k, const Real& T) {
  if (N < 1) throw domain_error("N must be positive");
  if (!(T > 0)) throw domain_error("period must be positive");
  if (k == 0) return CReal(Real(1));
  const Real w = 2 * pi() * Real(k) / (T * Real(N));
  Real sn, cs;
  sin_cos(w, sn, cs);
  return ipow(CReal(cs, R * sn), static_cast<unsigned long>(N));
}

struct IdentityResidual {
  Real residual;
  Real scale;
};

/// max over a' of |sum_nu C_nu(N, R) psi~(a' + 1 - 2 nu/N) - sum_k gamma_k^2 mult(N, R, k, T) e^{2 pi i k a'/T}|,
/// with scale the largest term magnitude on either side.
inline IdentityResidual multiplier_identity_check(const FourierSpectrum& s, const Real& R,
                                                  std::span<const Real> a_prime_grid, int N) {
  const FourierSpectrum ac = autocorrelate(s);
  const auto c = bernstein_coefficients<Real>(N, R);
  const auto row = regular_frequencies(N, Real(0));
  std::map<int, CReal> mult;
  for (const auto& [k, g] : ac.coefficients) mult[k] = multiplier(N, R, k, s.T);
  IdentityResidual out{Real(0), Real(0)};
  for (const auto& ap : a_prime_grid) {
    CReal lhs, rhs;
    for (int nu = 0; nu <= N; ++nu) {
      CReal term = c[nu] * ac(ap + row.values[nu]);
      out.scale = max(out.scale, abs(term));
      lhs += term;
    }
    for (const auto& [k, g] : ac.coefficients) {
      CReal term = g * mult[k] * expi(ac.angular(k) * ap);
      out.scale = max(out.scale, abs(term));
      rhs += term;
    }
    out.residual = max(out.residual, abs(lhs - rhs));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decay certificate.

struct DecayRow {
  Real R;
  int N = 0;
  int kappa = 0;
  Real multiplier_abs;
  Real gamma_bound;
  Real implied_Rprime;
};

struct DecayCertificate {
  double chi = 4;
  std::vector<DecayRow> rows;
  /// Per R: M = [chi R], rate r(R), Plancherel constant C(R).
  struct PerR {
    Real R;
    int M = 0;
    Real rate;
    Real C;
    Real certified_Rprime;
  };
  std::vector<PerR> per_R;
  /// Number of (R, k) pairs where |gamma_k| exceeded the certified bound.
  int violations = 0;

  Real best_Rprime() const {
    Real b(0);
    for (const auto& p : per_R) b = max(b, p.certified_Rprime);
    return b;
  }

  std::string csv() const {
    std::string out = "R,N,kappa,multiplier_abs,gamma_bound,implied_Rprime\n";
    for (const auto& r : rows) {
      out += to_decimal(r.R) + "," + std::to_string(r.N) + "," + std::to_string(r.kappa) + "," +
             to_decimal(r.multiplier_abs) + "," + to_decimal(r.gamma_bound) + "," + to_decimal(r.implied_Rprime) + "\n";
    }
    return out;
  }
};

/// Checks Re(log(cos w + i R sin w) - i R w) >= (R^2 - 1) w^2/4 for every
/// frequency used, i.e. the quadratic lower bound behind the certificate.
inline void validate_chi(const Real& R, int M, std::span<const int> Ns, const FourierSpectrum& s) {
  if (!(R > 1)) throw domain_error("decay certificate needs R > 1");
  if (M < 1) throw validation_error("chi R must be at least 1");
  for (int N : Ns) {
    for (const auto& [k, g] : s.coefficients) {
      if (k == 0 || std::abs(k) > N) continue;
      const Real w = 2 * pi() * Real(k) / (s.T * Real(M * N));
      Real sn, cs;
      sin_cos(w, sn, cs);
      const CReal l = log(CReal(cs, R * sn));
      const Real quad = (R * R - 1) * w * w / 2;
      if (!(l.re / quad >= Real(0.5))) {
        throw validation_error("chi = [" + std::to_string(M) + "/R] too small: quadratic bound fails at k = " +
                               std::to_string(k) + ", N = " + std::to_string(N));
      }
    }
  }
}

/// For each R: M = [chi R], C(R) = max_N sum_{|k| <= N} |gamma_k|^4 |mult(M N, R, k, T)|^2,
/// rate r = (2 pi^2/T^2)(R^2 - 1)/(4 M), bound |gamma_k| <= C^{1/4} e^{-r |k|},
/// implied R'(k) = max(0, r - log(C^{1/4})/|k|).
inline DecayCertificate decay_certificate(const FourierSpectrum& s, std::span<const Real> R_list,
                                          std::span<const int> Ns, double chi = 4, unsigned threads = 0) {
  s.validate();
  DecayCertificate cert;
  cert.chi = chi;
  const int K = s.max_abs_index();
  std::vector<DecayCertificate::PerR> per(R_list.size());
  std::vector<std::vector<DecayRow>> rows(R_list.size());
  std::vector<int> bad(R_list.size(), 0);
  parallel_for(R_list.size(), threads, [&](std::size_t i) {
    const Real& R = R_list[i];
    const int M = static_cast<int>(std::floor(chi * R.to_double()));
    validate_chi(R, M, Ns, s);
    const Real rate = 2 * pi() * pi() / (s.T * s.T) * (R * R - 1) / Real(4 * M);
    std::map<std::pair<int, int>, Real> mabs;
    Real C(0);
    for (int N : Ns) {
      Real sum(0);
      for (const auto& [k, g] : s.coefficients) {
        if (std::abs(k) > N) continue;
        const Real m = abs(multiplier(M * N, R, k, s.T));
        mabs[{N, k}] = m;
        const Real g2 = g.norm();
        sum += g2 * g2 * m * m;
      }
      C = max(C, sum);
    }
    const Real c4 = sqrt(sqrt(C));
    const Real logc4 = C.is_zero() ? Real(0) : log(c4);
    for (int N : Ns) {
      for (const auto& [k, g] : s.coefficients) {
        if (std::abs(k) > N) continue;
        const Real bound = c4 * exp(-rate * Real(std::abs(k)));
        Real implied(0);
        if (k != 0) implied = max(Real(0), rate - logc4 / Real(std::abs(k)));
        rows[i].push_back({R, N, k, mabs[{N, k}], bound, implied});
      }
    }
    for (const auto& [k, g] : s.coefficients) {
      if (abs(g) > c4 * exp(-rate * Real(std::abs(k))) * (1 + pow2(-64))) ++bad[i];
    }
    Real certified(0);
    if (K > 0) certified = max(Real(0), rate - logc4 / Real(K));
    per[i] = {R, M, rate, C, certified};
  });
  for (std::size_t i = 0; i < R_list.size(); ++i) {
    cert.per_R.push_back(per[i]);
    for (auto& r : rows[i]) cert.rows.push_back(std::move(r));
    cert.violations += bad[i];
  }
  return cert;
}

}  // namespace supershift
