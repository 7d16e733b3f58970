#pragma once

// Frequency samplings of [-1, 1]: regular rows, almost-regular Minkowski
// rows, and arbitrary (possibly irregular) rows, plus epsilon sequences.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "supershift/errors.hpp"
#include "supershift/numeric.hpp"

namespace supershift {

enum class SamplingKind { Regular, AlmostRegular, Irregular };

inline std::string to_string(SamplingKind k) {
  switch (k) {
    case SamplingKind::Regular:
      return "Regular";
    case SamplingKind::AlmostRegular:
      return "AlmostRegular";
    case SamplingKind::Irregular:
      return "Irregular";
  }
  return "?";
}

inline SamplingKind sampling_kind_from_string(const std::string& s) {
  if (s == "Regular") return SamplingKind::Regular;
  if (s == "AlmostRegular") return SamplingKind::AlmostRegular;
  if (s == "Irregular") return SamplingKind::Irregular;
  throw validation_error("unknown sampling kind '" + s + "'");
}

/// Values closer than this are the same frequency: 2^-(precision-8).
inline Real merge_tolerance() { return pow2(-static_cast<long>(Real::working_precision()) + 8); }

/// Row N of a frequency matrix: h_{N,0} >= ... >= h_{N,nu(N)} in [-1, 1].
struct FrequencyRow {
  int N = 1;
  std::vector<Real> values;

  int nu() const { return static_cast<int>(values.size()) - 1; }
};

inline void validate_row(const FrequencyRow& row) {
  if (row.N < 1) throw validation_error("row index N must be positive");
  if (row.values.size() < 2) throw validation_error("row " + std::to_string(row.N) + " needs nu(N) >= 1");
  for (std::size_t i = 0; i < row.values.size(); ++i) {
    const Real& h = row.values[i];
    if (!h.is_finite() || h < -1 || h > 1) {
      throw validation_error("row " + std::to_string(row.N) + ": frequency " + to_decimal(h) +
                             " outside [-1, 1]");
    }
    if (i > 0 && row.values[i - 1] < h) {
      throw validation_error("row " + std::to_string(row.N) + " is not non-increasing");
    }
  }
}

struct FrequencyMatrix {
  std::vector<FrequencyRow> rows;
  SamplingKind kind = SamplingKind::Irregular;

  void validate() const {
    if (rows.empty()) throw validation_error("frequency matrix has no rows");
    for (const auto& r : rows) validate_row(r);
  }
};

// ---------------------------------------------------------------------------
// Epsilon sequences.

/// eps_N for a regular sampling; generators: 0, c/N, c/log(N+1).
class EpsilonSequence {
 public:
  enum class Generator { Zero, CoverN, CoverLog };

  EpsilonSequence() = default;
  EpsilonSequence(Generator g, Rational c) : generator_(g), c_(std::move(c)) {
    if (c_ < 0) throw domain_error("epsilon generator constant must be non-negative");
  }

  static EpsilonSequence zero() { return {}; }
  static EpsilonSequence c_over_n(Rational c) { return {Generator::CoverN, std::move(c)}; }
  static EpsilonSequence c_over_log(Rational c) { return {Generator::CoverLog, std::move(c)}; }

  Generator generator() const { return generator_; }
  const Rational& constant() const { return c_; }

  std::string description() const {
    switch (generator_) {
      case Generator::Zero:
        return "0";
      case Generator::CoverN:
        return c_.get_str() + "/N";
      case Generator::CoverLog:
        return c_.get_str() + "/log(N+1)";
    }
    return "?";
  }

  /// eps_N at working precision.
  Real at(int N) const {
    switch (generator_) {
      case Generator::Zero:
        return Real(0);
      case Generator::CoverN:
        return Real(Rational(c_ / N));
      case Generator::CoverLog:
        return Real(c_) / log(Real(N + 1));
    }
    return Real(0);
  }

  /// eps_N as an exact rational; only the rational generators support this.
  Rational exact_at(int N) const {
    switch (generator_) {
      case Generator::Zero:
        return Rational(0);
      case Generator::CoverN:
        return Rational(c_ / N);
      case Generator::CoverLog:
        throw domain_error("c/log(N+1) has no exact rational values");
    }
    return Rational(0);
  }

  template <class T>
  T value(int N) const {
    if constexpr (is_exact_v<T>) {
      return exact_at(N);
    } else {
      return at(N);
    }
  }

  /// Checks eps_N in [0, 1) and non-increasing over the given (increasing) N values.
  void validate(std::span<const int> Ns) const {
    Real prev;
    bool first = true;
    for (int N : Ns) {
      Real e = at(N);
      if (e < 0 || e >= 1) {
        throw domain_error("eps_" + std::to_string(N) + " = " + to_decimal(e) + " (" + description() +
                           ") is outside [0, 1)");
      }
      if (!first && prev < e) throw validation_error("epsilon sequence " + description() + " is increasing");
      prev = e;
      first = false;
    }
  }

 private:
  Generator generator_ = Generator::Zero;
  Rational c_{0};
};

/// A family of epsilon sequences tending to 0 uniformly.
struct EpsilonFamily {
  std::vector<EpsilonSequence> members;

  Real uniform_bound(int N) const {
    Real b(0);
    for (const auto& m : members) b = max(b, m.at(N));
    return b;
  }

  void validate(std::span<const int> Ns) const {
    if (members.empty()) throw validation_error("epsilon family is empty");
    for (const auto& m : members) m.validate(Ns);
    Real prev;
    bool first = true;
    for (int N : Ns) {
      Real b = uniform_bound(N);
      if (!first && prev < b) throw validation_error("uniform bound of the epsilon family increases");
      prev = b;
      first = false;
    }
  }
};

inline void check_epsilon(const Real& eps) {
  if (eps < 0 || eps >= 1) throw domain_error("eps_N = " + to_decimal(eps) + " is outside [0, 1)");
}
inline void check_epsilon(const Rational& eps) {
  if (eps < 0 || eps >= 1) throw domain_error("eps_N = " + eps.get_str() + " is outside [0, 1)");
}

// ---------------------------------------------------------------------------
// Xi collections for almost-regular sampling.

struct XiCollection {
  std::map<int, std::vector<Real>> rows;

  const std::vector<Real>& row(int N) const {
    auto it = rows.find(N);
    if (it == rows.end()) throw validation_error("xi collection has no row " + std::to_string(N));
    return it->second;
  }

  void validate() const {
    for (const auto& [N, xs] : rows) {
      if (static_cast<int>(xs.size()) != N) throw validation_error("xi row N must have N entries");
      for (const auto& x : xs) {
        if (x < 0 || x > 1) throw domain_error("xi entry " + to_decimal(x) + " outside [0, 1]");
      }
    }
  }
};

/// Uniform draw in [0, 1) with 53 random bits, independent of the standard library.
inline Real uniform_unit(std::mt19937_64& rng) {
  return ldexp(Real(static_cast<unsigned long>(rng() >> 11)), -53);
}

inline std::vector<Real> random_xi_row(int N, std::mt19937_64& rng) {
  std::vector<Real> xs;
  xs.reserve(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) xs.push_back(uniform_unit(rng));
  return xs;
}

/// N + 1 distinct uniform draws in [-1, 1], sorted decreasing.
inline std::vector<Real> random_irregular_row(int N, std::mt19937_64& rng) {
  if (N < 1) throw domain_error("N must be positive");
  std::vector<Real> h;
  while (static_cast<int>(h.size()) <= N) {
    Real x = 2 * uniform_unit(rng) - 1;
    if (std::find(h.begin(), h.end(), x) == h.end()) h.push_back(std::move(x));
  }
  std::sort(h.begin(), h.end(), [](const Real& a, const Real& b) { return b < a; });
  return h;
}

inline XiCollection random_xi(std::span<const int> Ns, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  XiCollection c;
  for (int N : Ns) c.rows[N] = random_xi_row(N, rng);
  return c;
}

// ---------------------------------------------------------------------------
// Row constructors.

/// h_{N,nu} = 1 - 2 (nu + eps (N - nu)) / N for nu = 0..N.
template <class T>
std::vector<T> regular_frequency_values(int N, const T& eps) {
  if (N < 1) throw domain_error("N must be positive");
  check_epsilon(eps);
  std::vector<T> h;
  h.reserve(static_cast<std::size_t>(N) + 1);
  for (int nu = 0; nu <= N; ++nu) {
    T num = T(T(nu) + T(eps * T(N - nu)));
    h.push_back(T(T(1) - T(T(2) * num / T(N))));
  }
  return h;
}

inline FrequencyRow regular_frequencies(int N, const Real& eps) {
  return FrequencyRow{N, regular_frequency_values<Real>(N, eps)};
}

inline FrequencyMatrix regular_matrix(std::span<const int> Ns, const EpsilonSequence& eps) {
  FrequencyMatrix m;
  m.kind = SamplingKind::Regular;
  for (int N : Ns) m.rows.push_back(regular_frequencies(N, eps.at(N)));
  return m;
}

inline constexpr int kMinkowskiCap = 20;

/// Half-widths d_k = (1/N)(1 - xi_{N,k}/N) of the symmetric pairs A_{N,k}.
inline std::vector<Real> minkowski_half_widths(int N, std::span<const Real> xi) {
  if (N < 1) throw domain_error("N must be positive");
  if (static_cast<int>(xi.size()) != N) throw shape_error("xi row must have N entries");
  std::vector<Real> d;
  d.reserve(xi.size());
  for (const auto& x : xi) {
    if (!x.is_finite() || x < 0 || x > 1) throw domain_error("xi entry " + to_decimal(x) + " outside [0, 1]");
    d.push_back((Real(1) - x / N) / N);
  }
  return d;
}

/// Expands A_{N,1} + ... + A_{N,N} carrying a weight per point.
///
/// Each step adds +d_k with weight `plus` and -d_k with weight `minus`;
/// points closer than merge_tolerance() are merged and their weights summed.
/// The result is sorted non-increasing.
template <class W>
std::vector<std::pair<Real, W>> minkowski_expand(int N, std::span<const Real> xi, const W& plus, const W& minus,
                                                 int cap = kMinkowskiCap) {
  if (N > cap) {
    throw size_error("explicit Minkowski expansion is capped at N = " + std::to_string(cap) + " (asked " +
                     std::to_string(N) + ")");
  }
  const std::vector<Real> d = minkowski_half_widths(N, xi);
  const Real tol = merge_tolerance();
  std::vector<std::pair<Real, W>> pts{{Real(0), W(1)}};
  std::vector<std::pair<Real, W>> next;
  for (const auto& dk : d) {
    next.clear();
    next.reserve(2 * pts.size());
    for (const auto& [x, w] : pts) next.emplace_back(x + dk, W(w * plus));
    for (const auto& [x, w] : pts) next.emplace_back(x - dk, W(w * minus));
    std::stable_sort(next.begin(), next.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    pts.clear();
    for (auto& p : next) {
      if (!pts.empty() && pts.back().first - p.first <= tol) {
        pts.back().second = W(pts.back().second + p.second);
      } else {
        pts.push_back(std::move(p));
      }
    }
  }
  return pts;
}

/// Almost-regular row: the de-duplicated Minkowski sum, non-increasing.
inline FrequencyRow minkowski_frequencies(int N, std::span<const Real> xi, int cap = kMinkowskiCap) {
  auto pts = minkowski_expand<long>(N, xi, 1L, 1L, cap);
  FrequencyRow row{N, {}};
  row.values.reserve(pts.size());
  for (auto& p : pts) {
    // Guard the endpoints against one-ulp excursions from the summation.
    if (p.first > 1) p.first = Real(1);
    if (p.first < -1) p.first = Real(-1);
    row.values.push_back(std::move(p.first));
  }
  return row;
}

inline FrequencyMatrix almost_regular_matrix(const XiCollection& xi) {
  FrequencyMatrix m;
  m.kind = SamplingKind::AlmostRegular;
  for (const auto& [N, xs] : xi.rows) m.rows.push_back(minkowski_frequencies(N, xs));
  return m;
}

// ---------------------------------------------------------------------------
// Classification.

/// Population variance of the consecutive gaps of a row (0 for constant gaps).
inline Real gap_variance(const FrequencyRow& row) {
  const std::size_t n = row.values.size() - 1;
  if (n == 0) return Real(0);
  Real mean(0);
  for (std::size_t i = 0; i < n; ++i) mean += row.values[i] - row.values[i + 1];
  mean = mean / Real(static_cast<unsigned long>(n));
  Real var(0);
  for (std::size_t i = 0; i < n; ++i) {
    Real g = row.values[i] - row.values[i + 1] - mean;
    var += g * g;
  }
  return var / Real(static_cast<unsigned long>(n));
}

inline bool has_constant_gaps(const FrequencyRow& row) {
  const Real tol = merge_tolerance();
  const Real g0 = row.values[0] - row.values[1];
  for (std::size_t i = 1; i + 1 < row.values.size(); ++i) {
    if (abs(row.values[i] - row.values[i + 1] - g0) > tol) return false;
  }
  return true;
}

/// True iff the row equals the regular row for eps_N = (1 - h_{N,0}) / 2 in [0, 1).
inline bool matches_regular(const FrequencyRow& row) {
  if (row.nu() != row.N) return false;
  Real eps = (Real(1) - row.values[0]) / 2;
  if (eps < 0 || eps >= 1) return false;
  const Real tol = merge_tolerance();
  auto expected = regular_frequency_values<Real>(row.N, eps);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (abs(expected[i] - row.values[i]) > tol) return false;
  }
  return true;
}

/// Regular if every row is a regular row; otherwise AlmostRegular for
/// Minkowski-built matrices; otherwise Irregular when nu(N) = N everywhere
/// and some row has non-constant gaps.
inline SamplingKind classify(const FrequencyMatrix& H) {
  H.validate();
  if (std::all_of(H.rows.begin(), H.rows.end(), matches_regular)) return SamplingKind::Regular;
  if (H.kind == SamplingKind::AlmostRegular) return SamplingKind::AlmostRegular;
  const bool square = std::all_of(H.rows.begin(), H.rows.end(), [](const auto& r) { return r.nu() == r.N; });
  const bool some_irregular =
      std::any_of(H.rows.begin(), H.rows.end(), [](const auto& r) { return !has_constant_gaps(r); });
  if (square && some_irregular) return SamplingKind::Irregular;
  throw validation_error("frequency matrix matches none of the sampling classes");
}

// ---------------------------------------------------------------------------
// JSON: {"kind": ..., "rows": [{"N": ..., "values": [decimal strings]}]}

inline nlohmann::json to_json(const FrequencyMatrix& H) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : H.rows) {
    nlohmann::json vals = nlohmann::json::array();
    for (const auto& v : r.values) vals.push_back(to_decimal(v));
    rows.push_back({{"N", r.N}, {"values", vals}});
  }
  return {{"kind", to_string(H.kind)}, {"rows", rows}};
}

inline FrequencyMatrix frequency_matrix_from_json(const nlohmann::json& j) {
  FrequencyMatrix H;
  H.kind = sampling_kind_from_string(j.at("kind").get<std::string>());
  for (const auto& r : j.at("rows")) {
    FrequencyRow row;
    row.N = r.at("N").get<int>();
    for (const auto& v : r.at("values")) row.values.emplace_back(v.get<std::string>());
    H.rows.push_back(std::move(row));
  }
  H.validate();
  return H;
}

}  // namespace supershift
