#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qswarm/rng.hpp"

namespace qswarm {

using Amplitude = std::complex<double>;

enum class Basis : std::uint8_t { Z, X };

inline std::string_view basis_name(Basis b) { return b == Basis::Z ? "Z" : "X"; }

inline Basis parse_basis(std::string_view s) {
  if (s == "Z" || s == "z") return Basis::Z;
  if (s == "X" || s == "x") return Basis::X;
  throw std::invalid_argument("unknown basis: " + std::string(s));
}

inline Basis random_basis(std::mt19937_64& rng) {
  return coin_flip(rng) ? Basis::X : Basis::Z;
}

enum class BellState : std::uint8_t { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

// Requested initial state: a named Bell pair, an n-qubit GHZ state, or a
// computational-basis product state given by its bitstring label.
class StateSpec {
 public:
  enum class Kind : std::uint8_t { Bell, Ghz, Product };

  static StateSpec bell(BellState which) {
    StateSpec s;
    s.kind_ = Kind::Bell;
    s.bell_ = which;
    return s;
  }

  static StateSpec ghz(std::size_t n_qubits) {
    StateSpec s;
    s.kind_ = Kind::Ghz;
    s.n_qubits_ = n_qubits;
    return s;
  }

  static StateSpec product(std::string bits) {
    StateSpec s;
    s.kind_ = Kind::Product;
    s.bits_ = std::move(bits);
    return s;
  }

  Kind kind() const { return kind_; }
  BellState bell_state() const { return bell_; }
  std::size_t ghz_width() const { return n_qubits_; }
  const std::string& product_bits() const { return bits_; }

 private:
  StateSpec() = default;
  Kind kind_ = Kind::Bell;
  BellState bell_ = BellState::PhiPlus;
  std::size_t n_qubits_ = 0;
  std::string bits_;
};

// Normalized complex amplitude array over n qubits; the sole carrier of
// entanglement. Qubit 0 is the leftmost symbol of a ket label, so the
// amplitude at index k belongs to |b0 b1 ... b_{n-1}> where b0 is the most
// significant bit of k.
class StateVector {
 public:
  static constexpr std::size_t kMaxQubits = 8;
  static constexpr double kNormTolerance = 1e-12;

  explicit StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits == 0 || n_qubits > kMaxQubits) {
      throw std::invalid_argument("qubit count must be in [1, 8]");
    }
    amps_.assign(std::size_t{1} << n_qubits, Amplitude{0.0, 0.0});
    amps_[0] = Amplitude{1.0, 0.0};
  }

  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }

  const Amplitude& operator[](std::size_t index) const { return amps_[index]; }
  Amplitude& operator[](std::size_t index) { return amps_[index]; }
  const std::vector<Amplitude>& amplitudes() const { return amps_; }

  // Bit of basis-state `index` seen by `qubit` (leftmost qubit first).
  int bit_at(std::size_t index, std::size_t qubit) const {
    return static_cast<int>((index >> (n_qubits_ - 1 - qubit)) & 1u);
  }

  std::size_t qubit_mask(std::size_t qubit) const {
    return std::size_t{1} << (n_qubits_ - 1 - qubit);
  }

  double norm_squared() const {
    double total = 0.0;
    for (const auto& a : amps_) {
      total += std::norm(a);
    }
    return total;
  }

  double normalization_error() const { return std::abs(norm_squared() - 1.0); }

  void renormalize() {
    const double n2 = norm_squared();
    if (n2 <= 0.0) {
      throw std::logic_error("cannot renormalize a zero state");
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : amps_) {
      a *= inv;
    }
  }

  void check_normalized() const {
    if (normalization_error() > kNormTolerance) {
      throw std::logic_error("state norm drifted beyond 1e-12");
    }
  }

 private:
  std::size_t n_qubits_;
  std::vector<Amplitude> amps_;
};

inline StateVector make_state(const StateSpec& spec) {
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  switch (spec.kind()) {
    case StateSpec::Kind::Bell: {
      StateVector s(2);
      s[0] = Amplitude{0.0, 0.0};
      switch (spec.bell_state()) {
        case BellState::PhiPlus:
          s[0b00] = kInvSqrt2;
          s[0b11] = kInvSqrt2;
          break;
        case BellState::PhiMinus:
          s[0b00] = kInvSqrt2;
          s[0b11] = -kInvSqrt2;
          break;
        case BellState::PsiPlus:
          s[0b01] = kInvSqrt2;
          s[0b10] = kInvSqrt2;
          break;
        case BellState::PsiMinus:
          s[0b01] = kInvSqrt2;
          s[0b10] = -kInvSqrt2;
          break;
      }
      return s;
    }
    case StateSpec::Kind::Ghz: {
      const std::size_t n = spec.ghz_width();
      if (n < 2) {
        throw std::invalid_argument("GHZ state needs at least 2 qubits");
      }
      StateVector s(n);
      s[0] = kInvSqrt2;
      s[s.dim() - 1] = kInvSqrt2;
      return s;
    }
    case StateSpec::Kind::Product: {
      const std::string& bits = spec.product_bits();
      if (bits.empty()) {
        throw std::invalid_argument("product state bitstring is empty");
      }
      std::size_t index = 0;
      for (char c : bits) {
        if (c != '0' && c != '1') {
          throw std::invalid_argument("product state bitstring must be 0/1");
        }
        index = (index << 1) | static_cast<std::size_t>(c == '1');
      }
      StateVector s(bits.size());
      s[0] = Amplitude{0.0, 0.0};
      s[index] = Amplitude{1.0, 0.0};
      return s;
    }
  }
  throw std::logic_error("unreachable");
}

inline void apply_hadamard(StateVector& state, std::size_t qubit) {
  if (qubit >= state.n_qubits()) {
    throw std::out_of_range("qubit index out of range");
  }
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  const std::size_t mask = state.qubit_mask(qubit);
  for (std::size_t i = 0; i < state.dim(); ++i) {
    if (i & mask) continue;
    const Amplitude a0 = state[i];
    const Amplitude a1 = state[i | mask];
    state[i] = (a0 + a1) * kInvSqrt2;
    state[i | mask] = (a0 - a1) * kInvSqrt2;
  }
}

// GHZ-style state whose all-equal correlation shows up in the given basis:
// (|0..0> + |1..1>)/sqrt(2) for Z, (|+..+> + |-..->)/sqrt(2) for X.
// For two qubits both variants coincide with the PhiPlus Bell pair.
inline StateVector make_ghz_in_basis(std::size_t n_qubits, Basis basis) {
  StateVector s = make_state(StateSpec::ghz(n_qubits));
  if (basis == Basis::X) {
    for (std::size_t q = 0; q < n_qubits; ++q) {
      apply_hadamard(s, q);
    }
  }
  return s;
}

// Exact Born probability of reading `outcome` on `qubit` in `basis`,
// without collapsing the state.
inline double outcome_probability(const StateVector& state, std::size_t qubit,
                                  Basis basis, int outcome) {
  if (qubit >= state.n_qubits()) {
    throw std::out_of_range("qubit index out of range");
  }
  if (outcome != 0 && outcome != 1) {
    throw std::invalid_argument("outcome bit must be 0 or 1");
  }
  if (basis == Basis::X) {
    StateVector rotated = state;
    apply_hadamard(rotated, qubit);
    return outcome_probability(rotated, qubit, Basis::Z, outcome);
  }
  const std::size_t mask = state.qubit_mask(qubit);
  double p = 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    const bool one = (i & mask) != 0;
    if (one == (outcome == 1)) {
      p += std::norm(state[i]);
    }
  }
  return p;
}

// Projective single-qubit measurement. `u` is a uniform draw in [0,1);
// the outcome is 0 iff u < P(outcome 0). Collapses and renormalizes the
// state, so an entangled partner qubit reflects the result immediately.
// Outcome bit convention: |0> -> 0, |1> -> 1, |+> -> 0, |-> -> 1.
inline int measure_qubit(StateVector& state, std::size_t qubit, Basis basis,
                         double u) {
  if (qubit >= state.n_qubits()) {
    throw std::out_of_range("qubit index out of range");
  }
  if (basis == Basis::X) {
    apply_hadamard(state, qubit);
    const int outcome = measure_qubit(state, qubit, Basis::Z, u);
    apply_hadamard(state, qubit);
    state.check_normalized();
    return outcome;
  }
  const std::size_t mask = state.qubit_mask(qubit);
  double p0 = 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    if (!(i & mask)) {
      p0 += std::norm(state[i]);
    }
  }
  const int outcome = (u < p0) ? 0 : 1;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    const bool one = (i & mask) != 0;
    if (one != (outcome == 1)) {
      state[i] = Amplitude{0.0, 0.0};
    }
  }
  state.renormalize();
  state.check_normalized();
  return outcome;
}

inline int measure_qubit(StateVector& state, std::size_t qubit, Basis basis,
                         std::mt19937_64& rng) {
  return measure_qubit(state, qubit, basis, uniform01(rng));
}

inline StateVector tensor_product(const StateVector& a, const StateVector& b) {
  StateVector out(a.n_qubits() + b.n_qubits());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = 0; j < b.dim(); ++j) {
      out[i * b.dim() + j] = a[i] * b[j];
    }
  }
  return out;
}

}  // namespace qswarm
