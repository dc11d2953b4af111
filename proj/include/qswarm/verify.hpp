#pragma once

#include <cmath>
#include <functional>
#include <iostream>
#include <string>

#include "qswarm/magic_square.hpp"
#include "qswarm/observable.hpp"
#include "qswarm/protocols.hpp"
#include "qswarm/runner.hpp"
#include "qswarm/security.hpp"
#include "qswarm/statevector.hpp"

namespace qswarm {

namespace detail {

inline bool matrix_is_identity_times(const Mat4& m, double scale) {
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const Amplitude want = (i == j) ? Amplitude{scale, 0.0} : Amplitude{0.0, 0.0};
      if (std::abs(m[i][j] - want) > 1e-12) return false;
    }
  }
  return true;
}

}  // namespace detail

// Fast self-contained invariant checks behind the `verify` subcommand.
// Prints one line per check and returns true iff all pass.
inline bool run_builtin_verification(std::ostream& out) {
  bool all_ok = true;
  const auto check = [&](const std::string& name, const std::function<bool()>& fn) {
    bool ok = false;
    std::string error;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      error = e.what();
    }
    out << (ok ? "[ ok ] " : "[fail] ") << name;
    if (!error.empty()) out << " (" << error << ")";
    out << "\n";
    if (!ok) all_ok = false;
  };

  check("statevector normalization under measurement", [] {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      StateVector s = make_ghz_in_basis(4, coin_flip(rng) ? Basis::X : Basis::Z);
      for (std::size_t q = 0; q < 4; ++q) {
        measure_qubit(s, q, random_basis(rng), rng);
        if (s.normalization_error() > 1e-12) return false;
      }
    }
    return true;
  });

  check("phi+ same-basis agreement (Z and X)", [] {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 2000; ++trial) {
      for (Basis b : {Basis::Z, Basis::X}) {
        StateVector s = make_state(StateSpec::bell(BellState::PhiPlus));
        if (measure_qubit(s, 0, b, rng) != measure_qubit(s, 1, b, rng)) {
          return false;
        }
      }
    }
    return true;
  });

  check("psi+ anti-correlated in Z, correlated in X", [] {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 2000; ++trial) {
      StateVector z = make_state(StateSpec::bell(BellState::PsiPlus));
      if (measure_qubit(z, 0, Basis::Z, rng) == measure_qubit(z, 1, Basis::Z, rng)) {
        return false;
      }
      StateVector x = make_state(StateSpec::bell(BellState::PsiPlus));
      if (measure_qubit(x, 0, Basis::X, rng) != measure_qubit(x, 1, Basis::X, rng)) {
        return false;
      }
    }
    return true;
  });

  check("avoidance outcomes stay inside the four-option tables", [] {
    std::mt19937_64 rng(14);
    for (AvoidanceConfig config :
         {AvoidanceConfig::PhiPsiConfig1, AvoidanceConfig::PsiPhiConfig2}) {
      const auto options = avoidance_options(config);
      std::array<std::size_t, 4> seen{};
      for (int step = 0; step < 2000; ++step) {
        Board board;
        board.add_robot({0, 0});
        board.add_robot({1, 0});
        std::vector<std::mt19937_64> rngs;
        rngs.emplace_back(rng());
        rngs.emplace_back(rng());
        const StepOutcome out =
            avoidance_step(board, {0, 1}, config, rngs);
        bool found = false;
        for (std::size_t i = 0; i < options.size(); ++i) {
          if (options[i].r1_bits == out.bits[0] && options[i].r2_bits == out.bits[1]) {
            ++seen[i];
            found = true;
          }
        }
        if (!found || !out.crashes.empty()) return false;
      }
      for (std::size_t count : seen) {
        if (count == 0) return false;
      }
    }
    return true;
  });

  check("magic square rows multiply to +I, columns to -I", [] {
    MagicSquareTable table;
    for (std::size_t k = 0; k < 3; ++k) {
      if (!detail::matrix_is_identity_times(table.row_product(k), 1.0)) return false;
      if (!detail::matrix_is_identity_times(table.column_product(k), -1.0)) return false;
    }
    return true;
  });

  check("classical optimum is exactly 8/9", [] {
    const ClassicalOptimum c = classical_optimum();
    return c.numerator == 8 && c.denominator == 9 && c.max_wins == 8;
  });

  check("quantum rounds win on every input", [] {
    std::mt19937_64 rng(15);
    MagicSquareTable table;
    for (std::size_t row = 0; row < 3; ++row) {
      for (std::size_t col = 0; col < 3; ++col) {
        for (int trial = 0; trial < 50; ++trial) {
          if (!quantum_round(row, col, table, rng).win) return false;
        }
      }
    }
    return true;
  });

  check("three-party random sift rate near 1/4", [] {
    RngPool pool(16);
    DetectionRngs rngs = DetectionRngs::from_pool(pool);
    const DetectionRecords rec =
        run_detection_rounds(4000, BasisMode::Random, EveStrategy{}, rngs);
    const double rate = static_cast<double>(sift(rec.c, rec.r1, rec.r2).size()) / 4000.0;
    return std::abs(rate - 0.25) < 0.05;
  });

  check("intercept-resend leaves a ~25% error trail, passive none", [] {
    RngPool pool(17);
    DetectionRngs clean_rngs = DetectionRngs::from_pool(pool);
    const DetectionRecords clean = run_detection_rounds(
        2000, BasisMode::Random, EveStrategy{}, clean_rngs);
    const auto clean_valid = sift(clean.c, clean.r1, clean.r2);
    std::mt19937_64 sample_rng = pool.stream("sample");
    const QberEstimate clean_est = estimate_qber(
        clean_valid, clean.r1, clean.r2, 64, 0.1, sample_rng);
    if (clean_est.report.qber != 0.0) return false;

    RngPool eve_pool(17);
    DetectionRngs eve_rngs = DetectionRngs::from_pool(eve_pool);
    EveStrategy eve;
    eve.mode = EveMode::InterceptResendRandomBasis;
    const DetectionRecords tapped =
        run_detection_rounds(4000, BasisMode::Random, eve, eve_rngs);
    const auto valid = sift(tapped.c, tapped.r1, tapped.r2);
    std::size_t disagreements = 0;
    for (std::size_t round : valid) {
      if (tapped.r1.entries[round].bit != tapped.r2.entries[round].bit) {
        ++disagreements;
      }
    }
    const double qber = static_cast<double>(disagreements) /
                        static_cast<double>(valid.size());
    return std::abs(qber - 0.25) < 0.06;
  });

  check("GHZ walk keeps three robots in lockstep", [] {
    Scenario s;
    s.protocol = Protocol::GhzWalk;
    s.name = "verify-ghz";
    s.seed = 18;
    s.steps = 500;
    s.robots.count = 3;
    finalize_scenario(s);
    const RunResult r = run_scenario(s, /*collect_trace=*/false);
    return r.stats.at("identical_move_violations").get<std::size_t>() == 0 &&
           r.stats.at("moved_steps").get<std::size_t>() == 500;
  });

  check("identical seeds give byte-identical traces", [] {
    Scenario s;
    s.protocol = Protocol::Walk;
    s.name = "verify-walk";
    s.seed = 19;
    s.steps = 200;
    finalize_scenario(s);
    const RunResult a = run_scenario(s);
    const RunResult b = run_scenario(s);
    return a.trace.to_jsonl() == b.trace.to_jsonl() &&
           a.stats.dump() == b.stats.dump();
  });

  return all_ok;
}

}  // namespace qswarm
