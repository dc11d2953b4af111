// Test-side oracles, deliberately independent of the library's statevector
// implementation: a tiny dense ket calculus with explicit projectors, a
// measurement-tree enumerator with exact branch probabilities, and a
// binomial tail. Expected values asserted in the suites are produced here.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

using C = std::complex<double>;
using Vec = std::vector<C>;

inline Vec ket(const std::string& bits) {
  std::size_t index = 0;
  for (char c : bits) index = (index << 1) | static_cast<std::size_t>(c == '1');
  Vec v(std::size_t{1} << bits.size(), C{0.0, 0.0});
  v[index] = C{1.0, 0.0};
  return v;
}

inline Vec add(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline Vec scale(C s, const Vec& v) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = s * v[i];
  return out;
}

inline double norm2(const Vec& v) {
  double total = 0.0;
  for (const C& a : v) total += std::norm(a);
  return total;
}

inline Vec kron(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
  return out;
}

inline std::size_t qubit_count(const Vec& v) {
  std::size_t n = 0;
  while ((std::size_t{1} << n) < v.size()) ++n;
  return n;
}

constexpr double kInvSqrt2 = 0.7071067811865475244;

inline Vec phi_plus() { return scale(kInvSqrt2, add(ket("00"), ket("11"))); }
inline Vec psi_plus() { return scale(kInvSqrt2, add(ket("01"), ket("10"))); }

inline Vec ghz(std::size_t n) {
  return scale(kInvSqrt2, add(ket(std::string(n, '0')), ket(std::string(n, '1'))));
}

enum class B { Z, X };

// Projector onto single-qubit outcome, written out explicitly (qubit 0 is
// the leftmost label symbol, i.e. the most significant index bit).
inline Vec project_qubit(const Vec& v, std::size_t qubit, B basis, int outcome) {
  const std::size_t n = qubit_count(v);
  const std::size_t mask = std::size_t{1} << (n - 1 - qubit);
  Vec out(v.size(), C{0.0, 0.0});
  if (basis == B::Z) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const bool one = (i & mask) != 0;
      if (one == (outcome == 1)) out[i] = v[i];
    }
    return out;
  }
  // X basis: |+><+| or |-><-| on the qubit. outcome 0 -> |+>, 1 -> |->.
  const double s = outcome == 0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i & mask) continue;
    const C a0 = v[i];
    const C a1 = v[i | mask];
    const C component = 0.5 * (a0 + s * a1);
    out[i] = component;
    out[i | mask] = s * component;
  }
  return out;
}

struct Measurement {
  std::size_t qubit;
  B basis;
};

struct Branch {
  std::vector<int> outcomes;
  double probability;
};

// All measurement branches with exact probabilities; branches of (near)
// zero probability are pruned.
inline std::vector<Branch> enumerate_branches(const Vec& initial,
                                              const std::vector<Measurement>& ms) {
  std::vector<Branch> result;
  std::function<void(const Vec&, std::size_t, std::vector<int>&)> walk =
      [&](const Vec& v, std::size_t depth, std::vector<int>& outcomes) {
        if (depth == ms.size()) {
          const double p = norm2(v);
          if (p > 1e-15) result.push_back(Branch{outcomes, p});
          return;
        }
        for (int outcome : {0, 1}) {
          Vec projected = project_qubit(v, ms[depth].qubit, ms[depth].basis, outcome);
          if (norm2(projected) <= 1e-15) continue;
          outcomes.push_back(outcome);
          walk(projected, depth + 1, outcomes);
          outcomes.pop_back();
        }
      };
  std::vector<int> outcomes;
  walk(initial, 0, outcomes);
  return result;
}

// ---------------------------------------------------------------------------
// Two-qubit Pauli observables, for commuting-measurement enumeration
// ---------------------------------------------------------------------------

using M2 = std::array<std::array<C, 2>, 2>;

inline M2 pauli(char p) {
  const C o{1.0, 0.0}, i{0.0, 1.0}, z{0.0, 0.0};
  switch (p) {
    case 'I': return {{{o, z}, {z, o}}};
    case 'X': return {{{z, o}, {o, z}}};
    case 'Y': return {{{z, -i}, {i, z}}};
    case 'Z': return {{{o, z}, {z, -o}}};
  }
  throw std::invalid_argument("bad pauli");
}

struct TwoQubitObservable {
  double sign;
  char first, second;
  std::size_t qubit_a, qubit_b;
};

inline Vec apply_observable(const Vec& v, const TwoQubitObservable& obs) {
  const std::size_t n = qubit_count(v);
  const std::size_t mask_a = std::size_t{1} << (n - 1 - obs.qubit_a);
  const std::size_t mask_b = std::size_t{1} << (n - 1 - obs.qubit_b);
  const M2 ma = pauli(obs.first);
  const M2 mb = pauli(obs.second);
  Vec out(v.size(), C{0.0, 0.0});
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == C{0.0, 0.0}) continue;
    const std::size_t a = (i & mask_a) ? 1 : 0;
    const std::size_t b = (i & mask_b) ? 1 : 0;
    for (std::size_t a2 = 0; a2 < 2; ++a2) {
      for (std::size_t b2 = 0; b2 < 2; ++b2) {
        const C coeff = ma[a2][a] * mb[b2][b];
        if (coeff == C{0.0, 0.0}) continue;
        std::size_t j = i;
        j = a2 ? (j | mask_a) : (j & ~mask_a);
        j = b2 ? (j | mask_b) : (j & ~mask_b);
        out[j] += obs.sign * coeff * v[i];
      }
    }
  }
  return out;
}

inline Vec project_eigenvalue(const Vec& v, const TwoQubitObservable& obs,
                              int eigenvalue) {
  const Vec applied = apply_observable(v, obs);
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = 0.5 * (v[i] + static_cast<double>(eigenvalue) * applied[i]);
  }
  return out;
}

// Joint eigenvalue distribution of a sequence of (commuting or not)
// observable measurements, as a map from the +1/-1 outcome tuple to its
// exact probability.
inline std::map<std::vector<int>, double> observable_distribution(
    const Vec& initial, const std::vector<TwoQubitObservable>& observables) {
  std::map<std::vector<int>, double> dist;
  std::function<void(const Vec&, std::size_t, std::vector<int>&)> walk =
      [&](const Vec& v, std::size_t depth, std::vector<int>& outcomes) {
        if (depth == observables.size()) {
          const double p = norm2(v);
          if (p > 1e-15) dist[outcomes] += p;
          return;
        }
        for (int eigenvalue : {1, -1}) {
          Vec projected = project_eigenvalue(v, observables[depth], eigenvalue);
          if (norm2(projected) <= 1e-15) continue;
          outcomes.push_back(eigenvalue);
          walk(projected, depth + 1, outcomes);
          outcomes.pop_back();
        }
      };
  std::vector<int> outcomes;
  walk(initial, 0, outcomes);
  return dist;
}

// ---------------------------------------------------------------------------
// Exact binomial arithmetic
// ---------------------------------------------------------------------------

inline long double binomial_pmf(std::size_t n, std::size_t k, long double p) {
  long double log_c = 0.0L;
  for (std::size_t i = 0; i < k; ++i) {
    log_c += std::log(static_cast<long double>(n - i)) -
             std::log(static_cast<long double>(i + 1));
  }
  return std::exp(log_c + static_cast<long double>(k) * std::log(p) +
                  static_cast<long double>(n - k) * std::log(1.0L - p));
}

inline long double binomial_cdf(std::size_t n, std::size_t k_max, long double p) {
  long double total = 0.0L;
  for (std::size_t k = 0; k <= k_max; ++k) total += binomial_pmf(n, k, p);
  return total;
}

// 3-sigma binomial band around expected probability p over n trials.
inline bool within_3sigma(double observed, double p, std::size_t n) {
  const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return std::abs(observed - p) <= 3.0 * sigma;
}

}  // namespace oracle
