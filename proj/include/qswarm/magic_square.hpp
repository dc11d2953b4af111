#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "qswarm/observable.hpp"
#include "qswarm/rng.hpp"
#include "qswarm/statevector.hpp"

namespace qswarm {

// The standard two-qubit observable table behind the magic square game:
//
//        I Z    Z I    Z Z
//        X I    I X    X X
//       -X Z   -Z X    Y Y
//
// Every row multiplies to +I, every column to -I, and the entries within
// any row or column commute, which is exactly what lets two players answer
// consistently without communicating.
class MagicSquareTable {
 public:
  struct Entry {
    int sign;
    Pauli first;
    Pauli second;
  };

  MagicSquareTable()
      : entries_{{{{{+1, Pauli::I, Pauli::Z},
                    {+1, Pauli::Z, Pauli::I},
                    {+1, Pauli::Z, Pauli::Z}}},
                  {{{+1, Pauli::X, Pauli::I},
                    {+1, Pauli::I, Pauli::X},
                    {+1, Pauli::X, Pauli::X}}},
                  {{{-1, Pauli::X, Pauli::Z},
                    {-1, Pauli::Z, Pauli::X},
                    {+1, Pauli::Y, Pauli::Y}}}}} {}

  const Entry& entry(std::size_t row, std::size_t col) const {
    return entries_.at(row).at(col);
  }

  // The entry bound to a concrete qubit pair of a 4-qubit shared state.
  SignedPauliObservable observable(std::size_t row, std::size_t col,
                                   std::size_t qubit_first,
                                   std::size_t qubit_second) const {
    const Entry& e = entry(row, col);
    return SignedPauliObservable(e.sign, qubit_first, e.first, qubit_second,
                                 e.second);
  }

  Mat4 entry_matrix(std::size_t row, std::size_t col) const {
    const Entry& e = entry(row, col);
    Mat4 m = kronecker(pauli_matrix(e.first), pauli_matrix(e.second));
    if (e.sign < 0) {
      for (auto& r : m)
        for (auto& v : r) v = -v;
    }
    return m;
  }

  Mat4 row_product(std::size_t row) const {
    return matmul(matmul(entry_matrix(row, 0), entry_matrix(row, 1)),
                  entry_matrix(row, 2));
  }

  Mat4 column_product(std::size_t col) const {
    return matmul(matmul(entry_matrix(0, col), entry_matrix(1, col)),
                  entry_matrix(2, col));
  }

 private:
  std::array<std::array<Entry, 3>, 3> entries_;
};

struct GameRound {
  std::size_t row = 0;
  std::size_t col = 0;
  std::array<int, 3> row_values{};  // player A, tiles (row, 0..2)
  std::array<int, 3> col_values{};  // player B, tiles (0..2, col)
  bool win = false;
};

// One round of the game on two shared PhiPlus pairs. Player A holds qubits
// (0, 2) and measures the three observables of its row; player B holds
// (1, 3) and measures its column. The shared tile always agrees.
inline GameRound quantum_round(std::size_t row, std::size_t col,
                               const MagicSquareTable& table,
                               std::mt19937_64& rng) {
  if (row > 2 || col > 2) {
    throw std::out_of_range("row and column must be in 0..2");
  }
  StateVector state =
      tensor_product(make_state(StateSpec::bell(BellState::PhiPlus)),
                     make_state(StateSpec::bell(BellState::PhiPlus)));

  GameRound round;
  round.row = row;
  round.col = col;
  for (std::size_t k = 0; k < 3; ++k) {
    round.row_values[k] = measure_observable(state, table.observable(row, k, 0, 2), rng);
  }
  for (std::size_t k = 0; k < 3; ++k) {
    round.col_values[k] = measure_observable(state, table.observable(k, col, 1, 3), rng);
  }
  round.win = round.row_values[col] == round.col_values[row];
  return round;
}

using SignTriple = std::array<int, 3>;

inline std::array<SignTriple, 4> triples_with_product(int parity) {
  std::array<SignTriple, 4> out{};
  std::size_t n = 0;
  for (int a : {1, -1})
    for (int b : {1, -1})
      for (int c : {1, -1})
        if (a * b * c == parity) out[n++] = {a, b, c};
  return out;
}

struct ClassicalStrategy {
  std::array<SignTriple, 3> row_answers;  // player A: row -> triple, product +1
  std::array<SignTriple, 3> col_answers;  // player B: col -> triple, product -1
};

struct ClassicalOptimum {
  long long numerator = 0;    // of the max expected win probability
  long long denominator = 0;  // over uniform row/col inputs
  std::size_t max_wins = 0;   // inputs won by the best strategy, out of 9
  ClassicalStrategy best;
};

// Exhausts all 64 x 64 deterministic strategy pairs against the 9 uniform
// inputs. No strategy wins all 9: the best wins exactly 8.
inline ClassicalOptimum classical_optimum() {
  const auto row_triples = triples_with_product(+1);
  const auto col_triples = triples_with_product(-1);

  ClassicalOptimum result;
  for (std::size_t a0 = 0; a0 < 4; ++a0)
    for (std::size_t a1 = 0; a1 < 4; ++a1)
      for (std::size_t a2 = 0; a2 < 4; ++a2) {
        const std::array<SignTriple, 3> rows{row_triples[a0], row_triples[a1],
                                             row_triples[a2]};
        for (std::size_t b0 = 0; b0 < 4; ++b0)
          for (std::size_t b1 = 0; b1 < 4; ++b1)
            for (std::size_t b2 = 0; b2 < 4; ++b2) {
              const std::array<SignTriple, 3> cols{
                  col_triples[b0], col_triples[b1], col_triples[b2]};
              std::size_t wins = 0;
              for (std::size_t r = 0; r < 3; ++r)
                for (std::size_t c = 0; c < 3; ++c)
                  if (rows[r][c] == cols[c][r]) ++wins;
              if (wins > result.max_wins) {
                result.max_wins = wins;
                result.best.row_answers = rows;
                result.best.col_answers = cols;
              }
            }
      }

  const long long g = std::gcd(static_cast<long long>(result.max_wins), 9LL);
  result.numerator = static_cast<long long>(result.max_wins) / g;
  result.denominator = 9LL / g;
  return result;
}

struct SensorCheck {
  std::size_t row = 0;
  std::size_t col = 0;
  bool fired = false;
};

// The 3x3 sensor board receives A's row values along its row and B's column
// values along its column. Only the intersection sensor sees both streams;
// it fires iff the two values agree there.
inline SensorCheck sensor_board_check(const GameRound& round) {
  SensorCheck check;
  check.row = round.row;
  check.col = round.col;
  check.fired = round.row_values[round.col] == round.col_values[round.row];
  return check;
}

// The agreed tile value as one shared coordination bit: +1 -> 1, -1 -> 0.
inline int shared_coordination_bit(const GameRound& round) {
  return round.row_values[round.col] == 1 ? 1 : 0;
}

}  // namespace qswarm
