// Acceptance checks 1-11. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "supershift/casebook.hpp"
#include "supershift/discrete_taylor.hpp"
#include "supershift/legendre.hpp"
#include "supershift/periodic.hpp"
#include "supershift/runner.hpp"
#include "supershift/supershift.hpp"
#include "supershift/trigpoly.hpp"

using namespace supershift;
namespace fs = std::filesystem;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

std::string sci(const Real& x) { return runner::brief(x); }

// 1. Expanded Bernstein sum against the closed product form.
Result closed_form_equivalence() {
  ScopedPrecision p(256);
  const auto xs = uniform_grid(Rational(-10), Rational(10), Rational(1, 2));
  const int Ns[] = {8, 16, 32, 64};
  const int lambdas[] = {-3, 0, 2, 4};
  std::vector<Real> worst(16);
  parallel_for(16, 0, [&](std::size_t i) {
    const int N = Ns[i / 4];
    const Real l(lambdas[i % 4]);
    const auto T = bernstein_trigpoly<Real>(N, Real(0), l);
    Real w(0);
    for (const auto& x : xs) {
      const CReal z(x);
      const CReal closed = eval_regular_closed_form(N, Real(0), l, z);
      w = max(w, abs(eval(T, z) - closed) / abs(closed));
    }
    worst[i] = w;
  });
  Real w(0);
  for (const auto& v : worst) w = max(w, v);
  return {w <= pow2(-64), "max relative deviation " + sci(w) + " (limit 2^-64)"};
}

// 2. Lagrange remainder certificate on random irregular nodes.
Result lagrange_remainder() {
  ScopedPrecision p(256);
  const int Ns[] = {2, 3, 5, 8, 12, 17, 23, 30};
  const auto xs = uniform_grid(Rational(-5), Rational(5), Rational(1, 4));
  const std::vector<Rational> lambdas{Rational(-2), Rational(-3, 2), Rational(-1, 2), Rational(0), Rational(7, 10),
                                      Rational(13, 10), Rational(2)};
  const int sets = 8;
  std::vector<std::vector<Real>> rows;
  std::vector<int> row_N;
  std::mt19937_64 rng(20240611);
  for (int s = 0; s < sets; ++s) {
    for (int N : Ns) {
      rows.push_back(random_irregular_row(N, rng));
      row_N.push_back(N);
    }
  }
  std::vector<int> bad(rows.size(), 0);
  std::vector<long> checks(rows.size(), 0);
  parallel_for(rows.size(), 0, [&](std::size_t i) {
    const int N = row_N[i];
    const FrequencyRow row{N, rows[i]};
    for (const auto& lq : lambdas) {
      const Real l(lq);
      const auto T = lagrange_trigpoly(row, l);
      Real mass(0);
      for (const auto& t : T.terms()) mass += abs(t.amplitude);
      const Real slack = pow2(-128) * max(mass, Real(1));
      for (const auto& x : xs) {
        const CReal z(x);
        const Real dev = abs(eval(T, z) - expi(l * x));
        const Real bound = error_certificate(CertificateKind::LagrangeFactorial, l, z, N).bound_value;
        if (dev > bound + slack) ++bad[i];
        ++checks[i];
      }
    }
  });
  int violations = 0;
  long total = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    violations += bad[i];
    total += checks[i];
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(total) + " checks"};
}

// 3. |T^Xi_N[a](z)| <= e^{(|a|+1)|z|}.
Result exp_growth() {
  ScopedPrecision p(256);
  const int draws = 10000;
  struct Draw {
    int N;
    std::vector<Real> xi;
    Real a;
    CReal z;
  };
  std::vector<Draw> d;
  d.reserve(draws);
  std::mt19937_64 rng(77);
  for (int i = 0; i < draws; ++i) {
    const int N = 1 + static_cast<int>(rng() % 128);
    auto xi = random_xi_row(N, rng);
    Real a = 10 * uniform_unit(rng) - 5;
    CReal z(40 * uniform_unit(rng) - 20, 10 * uniform_unit(rng) - 5);
    d.push_back({N, std::move(xi), std::move(a), std::move(z)});
  }
  std::vector<char> bad(draws, 0);
  parallel_for(draws, 0, [&](std::size_t i) {
    const auto& q = d[i];
    const Real v = abs(eval_xi_product(q.N, q.xi, q.a, q.z));
    const Real bound = error_certificate(CertificateKind::ExpGrowth, q.a, q.z, q.N).bound_value;
    if (v > bound * (1 + pow2(-200))) bad[i] = 1;
  });
  int violations = 0;
  for (char b : bad) violations += b;
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(draws) + " draws, N <= 128"};
}

// 4. Bernstein TCSP on [-3, 3]^2 for cos, exp_i and poly5.
Result tcsp_entire() {
  ScopedPrecision p(256);
  const auto grid = uniform_grid(Rational(-3), Rational(3), Rational(1, 4));
  const std::vector<int> Ns{8, 16, 32, 64};
  EpsilonFamily fam{{EpsilonSequence::zero(), EpsilonSequence::c_over_n(1), EpsilonSequence::c_over_n(2)}};
  bool ok = true;
  std::string detail;
  for (const char* name : {"cos", "exp_i", "poly5"}) {
    const auto psi = make_target(name);
    const auto dom = ExtrapolationDomain::product(psi.domain(), grid, grid);
    const auto rep = tcsp_sweep(psi, dom, Ns, fam, CoefficientRule::Bernstein);
    const Real& last = rep.uniform_sup.at(64);
    const bool mono = rep.monotone_decreasing();
    ok = ok && mono && last < Real(1e-3);
    detail += std::string(detail.empty() ? "" : "; ") + name + " sup(8..64) =";
    for (const auto& [N, e] : rep.uniform_sup) detail += " " + sci(e);
    detail += mono ? " monotone" : " not monotone";
  }
  return {ok, detail + " (limit 1e-3 at N = 64)"};
}

// 5. |a| under equispaced Lagrange interpolation at a = 0.5.
Result divergence_dichotomy() {
  ScopedPrecision p(256);
  const std::vector<int> Ns{5, 11, 21, 41};
  const auto rows = abs_lagrange_divergence(Real(0.5), Ns);
  Real mx(0), mn = rows.front().abs_error;
  std::string detail = "errors";
  for (const auto& r : rows) {
    mx = max(mx, r.abs_error);
    mn = min(mn, r.abs_error);
    detail += " " + sci(r.abs_error);
  }
  const std::size_t n = rows.size();
  const bool tail = rows[n - 3].abs_error < rows[n - 2].abs_error && rows[n - 2].abs_error < rows[n - 1].abs_error;
  const Real ratio = mx / mn;
  return {ratio > 10 && tail, detail + "; max/min " + sci(ratio) + (tail ? ", tail increasing" : ", tail not increasing")};
}

std::vector<TargetFunction> shipped_targets() {
  std::vector<TargetFunction> t;
  for (const auto& n : shipped_target_names()) t.push_back(make_target(n));
  t.push_back(GluedFunction::linear_pair().target());
  return t;
}

/// [b', b' + 1 - eps] inside the domain of Psi.
bool samples_in_domain(const TargetFunction& Psi, const Rational& b, const Rational& eps) {
  return Psi.domain().contains_closed(Real(b), Real(Rational(b + 1 - eps)));
}

// 6. Forward-difference identity, exact.
Result forward_difference_identity() {
  ScopedPrecision p(256);
  const std::vector<Rational> bs{Rational(0), Rational(1, 3)};
  const std::vector<Rational> es{Rational(0), Rational(1, 4)};
  const auto targets = shipped_targets();
  struct Job {
    std::size_t t;
    int N;
    Rational b, e;
  };
  std::vector<Job> jobs;
  std::vector<std::string> skipped;
  std::vector<TargetFunction> Psis;
  for (const auto& t : targets) Psis.push_back(compose_upsilon(t));
  for (std::size_t t = 0; t < Psis.size(); ++t) {
    for (const auto& b : bs) {
      for (const auto& e : es) {
        if (!samples_in_domain(Psis[t], b, e)) {
          skipped.push_back(targets[t].name() + "(b'=" + b.get_str() + ",eps=" + e.get_str() + ")");
          continue;
        }
        for (int N = 1; N <= 12; ++N) jobs.push_back({t, N, b, e});
      }
    }
  }
  std::vector<char> bad(jobs.size(), 0);
  parallel_for(jobs.size(), 0, [&](std::size_t i) {
    const auto& j = jobs[i];
    const auto& Psi = Psis[j.t];
    const auto form = bernstein_form<Rational>(Psi, j.b, j.N, j.e);
    const auto mono = bernstein_monomials<Rational>(Psi, j.b, j.N, j.e);
    for (int k = 0; k <= j.N; ++k) {
      if (!(form.coefficients[k] == mono[k])) bad[i] = 1;
    }
    for (const Rational& X : {Rational(-3, 2), Rational(2, 7), Rational(5, 2)}) {
      if (!(form(CRational(X)) == bernstein_sum<Rational>(Psi, j.b, j.N, j.e, CRational(X)))) bad[i] = 1;
    }
  });
  int failures = 0;
  for (char b : bad) failures += b;
  std::string detail = std::to_string(failures) + " nonzero residuals in " + std::to_string(jobs.size()) + " cases";
  if (!skipped.empty()) {
    detail += "; skipped (samples leave the domain):";
    for (const auto& s : skipped) detail += " " + s;
  }
  return {failures == 0, detail};
}

// 7. Legendre orthonormality and the coefficient identity, exact.
Result legendre_machinery() {
  ScopedPrecision p(256);
  int bad_pairs = 0;
  for (int m = 0; m <= 16; ++m) {
    for (int n = 0; n <= 16; ++n) {
      if (!(legendre_inner_product(m, n) == Surd{Rational(m == n ? 1 : 0), Integer(1)})) ++bad_pairs;
    }
  }
  const auto targets = shipped_targets();
  std::vector<TargetFunction> Psis;
  for (const auto& t : targets) Psis.push_back(compose_upsilon(t));
  const std::vector<Rational> Rs{Rational(1), Rational(3, 2)};
  const std::size_t jobs = Psis.size() * Rs.size() * 10;
  std::vector<char> bad(jobs, 0);
  parallel_for(jobs, 0, [&](std::size_t i) {
    const auto& Psi = Psis[i / (Rs.size() * 10)];
    const Rational& R = Rs[(i / 10) % Rs.size()];
    const int N = static_cast<int>(i % 10) + 1;
    const auto poly = bernstein_form<Rational>(Psi, Rational(0), N, Rational(0));
    const auto c = project<Rational>(poly, R);
    if (coefficient_identity_check<Rational>(poly, c, R) != 0) bad[i] = 1;
  });
  int failures = 0;
  for (char b : bad) failures += b;
  return {bad_pairs == 0 && failures == 0, std::to_string(bad_pairs) + " non-orthonormal pairs (nu <= 16); " +
                                               std::to_string(failures) + " nonzero identity residuals in " +
                                               std::to_string(jobs) + " cases (N <= 10)"};
}

// 8. Radius diagnostic from kappa_max = 8 to 16.
Result numerical_taylor_limsup() {
  ScopedPrecision p(256);
  bool ok = true;
  std::string detail;
  for (const char* name : {"cos", "sin", "exp_i", "exp", "sinh"}) {
    const auto Psi = compose_upsilon(make_target(name));
    for (int M : {1, 2, 4}) {
      const auto s = numerical_taylor(Psi, Real(0), M, 16, EpsilonSequence::zero());
      const std::vector<CReal> head(s.coefficients.begin(), s.coefficients.begin() + 9);
      const Real r8 = radius_diagnostic(head), r16 = radius_diagnostic(s);
      if (!(r16 < r8)) {
        ok = false;
        detail += std::string(name) + " M=" + std::to_string(M) + " " + sci(r8) + " -> " + sci(r16) + "; ";
      }
    }
  }
  return {ok, ok ? "decreasing for cos, sin, exp_i, exp, sinh at M = 1, 2, 4" : detail};
}

// 9. Warped extrapolation of the glued function.
Result warped_extrapolation() {
  ScopedPrecision p(256);
  const auto psi0 = GluedFunction::linear_pair();
  const ThetaMap theta;
  const std::vector<Real> grid{Real(Rational(-5, 2)), Real(Rational(-3, 2)), Real(Rational(7, 10)), Real(2), Real(3)};
  const std::vector<int> Ns{8, 64};
  const auto rows = warped_table(psi0, theta, grid, Ns, EpsilonSequence::zero());
  bool ok = true;
  std::string detail = "errors at N = 8 / 64:";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Real& e8 = rows[2 * i].abs_error;
    const Real& e64 = rows[2 * i + 1].abs_error;
    ok = ok && e64 < e8 && e64 < Real(1e-2);
    detail += " " + sci(e8) + "/" + sci(e64);
  }
  return {ok, detail};
}

// 10. Periodic multiplier identity and the decay certificate.
Result periodic_identity() {
  ScopedPrecision p(256);
  const auto grid = uniform_grid(Rational(-2), Rational(2), Rational(1, 4));
  std::vector<FourierSpectrum> spectra;
  for (int K : {1, 2, 4, 8}) spectra.push_back(FourierSpectrum::exp_decay(K, Real(0.5)));
  {
    std::mt19937_64 rng(5);
    FourierSpectrum s{Real(3), {}};
    for (int k = -8; k <= 8; ++k) s.coefficients[k] = CReal(2 * uniform_unit(rng) - 1, 2 * uniform_unit(rng) - 1);
    spectra.push_back(s);
  }
  const int Ns[] = {1, 4, 8, 16, 32};
  const int Rs[] = {1, 2, 3, 5};
  const std::size_t jobs = spectra.size() * 5 * 4;
  std::vector<char> bad(jobs, 0);
  parallel_for(jobs, 0, [&](std::size_t i) {
    const auto& s = spectra[i / 20];
    const auto r = multiplier_identity_check(s, Real(Rs[i % 4]), grid, Ns[(i / 4) % 5]);
    if (!(r.residual <= pow2(-64) * r.scale)) bad[i] = 1;
  });
  int failures = 0;
  for (char b : bad) failures += b;
  const std::vector<Real> Rl{Real(2), Real(5)};
  const std::vector<int> Nl{4, 8, 16};
  const auto cert = decay_certificate(FourierSpectrum::exp_decay(16, Real(1)), Rl, Nl);
  const bool ok = failures == 0 && cert.best_Rprime() > 0 && cert.violations == 0;
  return {ok, std::to_string(failures) + " identity failures in " + std::to_string(jobs) + " cases; certified R' = " +
                  sci(cert.best_Rprime()) + " for e^{-|k|}"};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// 11. CSV artifacts of the shipped configs with 1 and 8 threads.
Result determinism() {
  const fs::path base = fs::temp_directory_path() / "supershift_acceptance";
  fs::remove_all(base);
  std::vector<fs::path> configs;
  for (const auto& e : fs::directory_iterator(SUPERSHIFT_CONFIG_DIR)) {
    if (e.path().extension() == ".json") configs.push_back(e.path());
  }
  std::sort(configs.begin(), configs.end());
  for (const char* t : {"1", "8"}) {
    for (const auto& c : configs) {
      const std::string cmd = std::string("\"") + SUPERSHIFT_LAB + "\" run --config \"" + c.string() + "\" --out \"" +
                              (base / t).string() + "\" --threads " + t + " 2>/dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, "run failed: " + c.filename().string() + " threads " + t};
    }
  }
  int files = 0, differ = 0;
  for (const auto& e : fs::directory_iterator(base / "1")) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    if (slurp(e.path()) != slurp(base / "8" / e.path().filename())) ++differ;
  }
  return {files > 0 && differ == 0, std::to_string(files) + " CSV files from " + std::to_string(configs.size()) +
                                        " configs, " + std::to_string(differ) + " differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> checks{
      {"closed-form equivalence", closed_form_equivalence},
      {"Lagrange remainder certificate", lagrange_remainder},
      {"exponential growth bound", exp_growth},
      {"supershift convergence, entire targets", tcsp_entire},
      {"divergence dichotomy", divergence_dichotomy},
      {"forward-difference identity", forward_difference_identity},
      {"Legendre machinery", legendre_machinery},
      {"numerical Taylor limsup", numerical_taylor_limsup},
      {"warped extrapolation", warped_extrapolation},
      {"periodic multiplier identity", periodic_identity},
      {"determinism across thread counts", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = checks[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!r.pass) ++failed;
    std::printf("%s %2zu %s: %s [%.2f s]\n", r.pass ? "PASS" : "FAIL", i + 1, checks[i].first.c_str(),
                r.detail.c_str(), s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(checks.size()) - failed, checks.size());
  return failed ? 1 : 0;
}
