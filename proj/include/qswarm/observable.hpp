#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "qswarm/statevector.hpp"

namespace qswarm {

enum class Pauli : std::uint8_t { I, X, Y, Z };

inline char pauli_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

using Mat2 = std::array<std::array<Amplitude, 2>, 2>;
using Mat4 = std::array<std::array<Amplitude, 4>, 4>;

inline Mat2 pauli_matrix(Pauli p) {
  const Amplitude o{1.0, 0.0};
  const Amplitude i{0.0, 1.0};
  const Amplitude z{0.0, 0.0};
  switch (p) {
    case Pauli::I: return {{{o, z}, {z, o}}};
    case Pauli::X: return {{{z, o}, {o, z}}};
    case Pauli::Y: return {{{z, -i}, {i, z}}};
    case Pauli::Z: return {{{o, z}, {z, -o}}};
  }
  throw std::logic_error("unreachable");
}

inline Mat4 kronecker(const Mat2& a, const Mat2& b) {
  Mat4 out{};
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l)
          out[i * 2 + k][j * 2 + l] = a[i][j] * b[k][l];
  return out;
}

inline Mat4 matmul(const Mat4& a, const Mat4& b) {
  Mat4 out{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      Amplitude acc{0.0, 0.0};
      for (std::size_t k = 0; k < 4; ++k) acc += a[i][k] * b[k][j];
      out[i][j] = acc;
    }
  return out;
}

// Action of one Pauli on a basis bit: P|b> = phase * |b'>.
inline void pauli_action(Pauli p, int bit, int& new_bit, Amplitude& phase) {
  switch (p) {
    case Pauli::I:
      new_bit = bit;
      phase = Amplitude{1.0, 0.0};
      return;
    case Pauli::X:
      new_bit = 1 - bit;
      phase = Amplitude{1.0, 0.0};
      return;
    case Pauli::Y:
      new_bit = 1 - bit;
      phase = (bit == 0) ? Amplitude{0.0, 1.0} : Amplitude{0.0, -1.0};
      return;
    case Pauli::Z:
      new_bit = bit;
      phase = (bit == 0) ? Amplitude{1.0, 0.0} : Amplitude{-1.0, 0.0};
      return;
  }
}

// A +/-1 signed product of two single-qubit Paulis acting on a designated
// pair of qubits, e.g. -X(0)Z(2). Such a product squares to the identity,
// so it is Hermitian with eigenvalues exactly +1 and -1.
class SignedPauliObservable {
 public:
  SignedPauliObservable(int sign, std::size_t qubit_a, Pauli pauli_a,
                        std::size_t qubit_b, Pauli pauli_b)
      : sign_(sign), qubit_a_(qubit_a), pauli_a_(pauli_a), qubit_b_(qubit_b),
        pauli_b_(pauli_b) {
    if (sign != 1 && sign != -1) {
      // Any other scalar would break O^2 = I.
      throw std::invalid_argument("observable sign must be +1 or -1");
    }
    if (qubit_a == qubit_b) {
      throw std::invalid_argument("observable factors need distinct qubits");
    }
  }

  int sign() const { return sign_; }
  std::size_t qubit_a() const { return qubit_a_; }
  std::size_t qubit_b() const { return qubit_b_; }
  Pauli pauli_a() const { return pauli_a_; }
  Pauli pauli_b() const { return pauli_b_; }

  std::string str() const {
    std::string s = sign_ < 0 ? "-" : "+";
    s += pauli_char(pauli_a_);
    s += pauli_char(pauli_b_);
    return s;
  }

  // O|psi>, without measurement.
  StateVector apply(const StateVector& state) const {
    if (qubit_a_ >= state.n_qubits() || qubit_b_ >= state.n_qubits()) {
      throw std::out_of_range("observable qubit index out of range");
    }
    StateVector out(state.n_qubits());
    out[0] = Amplitude{0.0, 0.0};
    const std::size_t mask_a = state.qubit_mask(qubit_a_);
    const std::size_t mask_b = state.qubit_mask(qubit_b_);
    for (std::size_t i = 0; i < state.dim(); ++i) {
      if (state[i] == Amplitude{0.0, 0.0}) continue;
      int bit_a = (i & mask_a) ? 1 : 0;
      int bit_b = (i & mask_b) ? 1 : 0;
      int new_a = 0, new_b = 0;
      Amplitude ph_a, ph_b;
      pauli_action(pauli_a_, bit_a, new_a, ph_a);
      pauli_action(pauli_b_, bit_b, new_b, ph_b);
      std::size_t j = i;
      j = new_a ? (j | mask_a) : (j & ~mask_a);
      j = new_b ? (j | mask_b) : (j & ~mask_b);
      out[j] += static_cast<double>(sign_) * ph_a * ph_b * state[i];
    }
    return out;
  }

  // 4x4 matrix of sign * (pauli_a x pauli_b) on the designated pair, used
  // for exact operator-algebra checks.
  Mat4 two_qubit_matrix() const {
    Mat4 m = kronecker(pauli_matrix(pauli_a_), pauli_matrix(pauli_b_));
    if (sign_ < 0) {
      for (auto& row : m)
        for (auto& v : row) v = -v;
    }
    return m;
  }

 private:
  int sign_;
  std::size_t qubit_a_;
  Pauli pauli_a_;
  std::size_t qubit_b_;
  Pauli pauli_b_;
};

// Exact probability that a measurement of `obs` returns `eigenvalue`.
inline double eigenvalue_probability(const StateVector& state,
                                     const SignedPauliObservable& obs,
                                     int eigenvalue) {
  const StateVector applied = obs.apply(state);
  double p = 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    p += std::norm(0.5 * (state[i] + static_cast<double>(eigenvalue) * applied[i]));
  }
  return p;
}

// Projective measurement of a signed two-qubit Pauli observable using the
// eigenprojectors (I +/- O)/2. Returns the sampled eigenvalue and collapses
// the state in place.
inline int measure_observable(StateVector& state,
                              const SignedPauliObservable& obs, double u) {
  const StateVector applied = obs.apply(state);
  double p_plus = 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    p_plus += std::norm(0.5 * (state[i] + applied[i]));
  }
  const int eigenvalue = (u < p_plus) ? 1 : -1;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    state[i] = 0.5 * (state[i] + static_cast<double>(eigenvalue) * applied[i]);
  }
  state.renormalize();
  state.check_normalized();
  return eigenvalue;
}

inline int measure_observable(StateVector& state,
                              const SignedPauliObservable& obs,
                              std::mt19937_64& rng) {
  return measure_observable(state, obs, uniform01(rng));
}

}  // namespace qswarm
