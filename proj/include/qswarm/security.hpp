#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qswarm/board.hpp"
#include "qswarm/protocols.hpp"
#include "qswarm/rng.hpp"
#include "qswarm/statevector.hpp"

namespace qswarm {

// ---------------------------------------------------------------------------
// Eavesdropping detection (source c, receivers r1/r2, attacker eve)
// ---------------------------------------------------------------------------

enum class EveMode : std::uint8_t {
  Passive,
  InterceptResendRandomBasis,
  InterceptResendFixedBasis,
};

struct EveStrategy {
  EveMode mode = EveMode::Passive;
  Basis fixed_basis = Basis::Z;

  bool intercepts() const { return mode != EveMode::Passive; }
};

enum class BasisMode : std::uint8_t { Predefined, Random };

struct MeasurementEntry {
  std::size_t round = 0;
  Basis basis = Basis::Z;
  int bit = 0;
};

struct MeasurementRecord {
  std::string party;
  std::vector<MeasurementEntry> entries;
};

// One generator per role; the attacker draws only from its own streams, so
// enabling eve never perturbs the honest parties' randomness.
struct DetectionRngs {
  std::mt19937_64 schedule;
  std::mt19937_64 c_basis, r1_basis, r2_basis, eve_basis;
  std::mt19937_64 c_measure, r1_measure, r2_measure, eve_measure;

  static DetectionRngs from_pool(const RngPool& pool) {
    DetectionRngs r{pool.stream("schedule"),
                    pool.stream("basis:c"),
                    pool.stream("basis:r1"),
                    pool.stream("basis:r2"),
                    pool.stream("basis:eve"),
                    pool.stream("measure:c"),
                    pool.stream("measure:r1"),
                    pool.stream("measure:r2"),
                    pool.stream("measure:eve")};
    return r;
  }
};

struct DetectionRecords {
  MeasurementRecord c{"c", {}};
  MeasurementRecord r1{"r1", {}};
  MeasurementRecord r2{"r2", {}};
  MeasurementRecord eve{"eve", {}};  // empty unless eve intercepts
};

// Runs `rounds` rounds of the detection protocol. Per round the source
// prepares a PhiPlus pair and fixes its value by measuring its half in its
// chosen basis; eve may intercept the qubit bound for r1 and resend the
// collapsed state; r1 and r2 then measure their qubits. All measurements
// act on one shared statevector, so every disturbance propagates exactly.
//
// With BasisMode::Predefined all honest parties follow `schedule` (cycled);
// an empty schedule means a shared random one drawn from the schedule
// stream. Random mode gives every party an independent basis per round.
inline DetectionRecords run_detection_rounds(std::size_t rounds, BasisMode mode,
                                             const EveStrategy& eve,
                                             DetectionRngs& rngs,
                                             const std::vector<Basis>& schedule = {}) {
  DetectionRecords rec;
  for (std::size_t round = 0; round < rounds; ++round) {
    Basis b_c, b_r1, b_r2;
    if (mode == BasisMode::Predefined) {
      b_c = b_r1 = b_r2 = schedule.empty() ? random_basis(rngs.schedule)
                                           : schedule[round % schedule.size()];
    } else {
      b_c = random_basis(rngs.c_basis);
      b_r1 = random_basis(rngs.r1_basis);
      b_r2 = random_basis(rngs.r2_basis);
    }

    StateVector state = make_state(StateSpec::bell(BellState::PhiPlus));
    const int bit_c = measure_qubit(state, 0, b_c, rngs.c_measure);
    rec.c.entries.push_back({round, b_c, bit_c});

    if (eve.intercepts()) {
      const Basis b_e = eve.mode == EveMode::InterceptResendFixedBasis
                            ? eve.fixed_basis
                            : random_basis(rngs.eve_basis);
      const int bit_e = measure_qubit(state, 0, b_e, rngs.eve_measure);
      rec.eve.entries.push_back({round, b_e, bit_e});
    }

    const int bit_r1 = measure_qubit(state, 0, b_r1, rngs.r1_measure);
    rec.r1.entries.push_back({round, b_r1, bit_r1});
    const int bit_r2 = measure_qubit(state, 1, b_r2, rngs.r2_measure);
    rec.r2.entries.push_back({round, b_r2, bit_r2});
  }
  return rec;
}

// Rounds where c, r1 and r2 all announced the same basis.
inline std::vector<std::size_t> sift(const MeasurementRecord& c,
                                     const MeasurementRecord& r1,
                                     const MeasurementRecord& r2) {
  if (c.entries.size() != r1.entries.size() ||
      c.entries.size() != r2.entries.size()) {
    throw std::invalid_argument("ragged measurement records");
  }
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < c.entries.size(); ++i) {
    if (c.entries[i].basis == r1.entries[i].basis &&
        c.entries[i].basis == r2.entries[i].basis) {
      valid.push_back(i);
    }
  }
  return valid;
}

enum class Verdict : std::uint8_t { Clean, EavesdropperDetected };

inline std::string_view verdict_name(Verdict v) {
  return v == Verdict::Clean ? "clean" : "eavesdropper-detected";
}

struct DetectionReport {
  std::size_t rounds_used = 0;
  std::size_t disagreements = 0;
  double qber = 0.0;
  double threshold = 0.0;
  Verdict verdict = Verdict::Clean;
};

struct QberEstimate {
  DetectionReport report;
  std::vector<std::size_t> sampled_rounds;    // consumed for the estimate
  std::vector<std::size_t> remaining_rounds;  // still usable as movement bits
};

// Publishes `sample_size` valid rounds and compares r1 against r2 on them.
// The sampled rounds are consumed: callers must only use the returned
// remainder for movement decisions.
inline QberEstimate estimate_qber(const std::vector<std::size_t>& valid_rounds,
                                  const MeasurementRecord& r1,
                                  const MeasurementRecord& r2,
                                  std::size_t sample_size, double threshold,
                                  std::mt19937_64& rng) {
  if (sample_size == 0) {
    throw std::invalid_argument("sample size must be positive");
  }
  if (sample_size > valid_rounds.size()) {
    throw std::invalid_argument("insufficient valid rounds for the sample");
  }
  std::vector<std::size_t> pool = valid_rounds;
  QberEstimate est;
  for (std::size_t k = 0; k < sample_size; ++k) {
    const std::size_t pick = k + uniform_below(rng, pool.size() - k);
    std::swap(pool[k], pool[pick]);
    est.sampled_rounds.push_back(pool[k]);
  }
  est.remaining_rounds.assign(pool.begin() + static_cast<std::ptrdiff_t>(sample_size),
                              pool.end());
  std::sort(est.sampled_rounds.begin(), est.sampled_rounds.end());
  std::sort(est.remaining_rounds.begin(), est.remaining_rounds.end());

  std::size_t disagreements = 0;
  for (std::size_t round : est.sampled_rounds) {
    if (r1.entries.at(round).bit != r2.entries.at(round).bit) {
      ++disagreements;
    }
  }
  est.report.rounds_used = sample_size;
  est.report.disagreements = disagreements;
  est.report.qber = static_cast<double>(disagreements) / static_cast<double>(sample_size);
  est.report.threshold = threshold;
  est.report.verdict = est.report.qber > threshold ? Verdict::EavesdropperDetected
                                                   : Verdict::Clean;
  return est;
}

// ---------------------------------------------------------------------------
// Byzantine robots (honest parties share a predefined basis schedule)
// ---------------------------------------------------------------------------

enum class ByzantineMethod : std::uint8_t {
  GuessBasis,       // guess the schedule basis and measure
  RandomDirection,  // ignore the qubits, move uniformly at random
  FollowWithDelay,  // watch the honest robots move, then copy them
};

inline std::string_view byzantine_method_name(ByzantineMethod m) {
  switch (m) {
    case ByzantineMethod::GuessBasis: return "guess-basis";
    case ByzantineMethod::RandomDirection: return "random-direction";
    case ByzantineMethod::FollowWithDelay: return "follow-delay";
  }
  return "?";
}

struct ByzantineStrategy {
  ByzantineMethod method = ByzantineMethod::GuessBasis;
  std::size_t delay = 1;  // FollowWithDelay only, >= 1
};

struct ByzantineMove {
  bool moved = true;
  Direction direction = Direction::Up;
  int lag = 0;  // sub-ticks after the step deadline
  bool matched_honest = false;
  bool guessed_basis = false;
  bool basis_correct = false;
};

struct ByzantineStepResult {
  Basis schedule_basis = Basis::Z;
  Direction honest_direction = Direction::Up;
  std::vector<std::array<int, 2>> honest_bits;
  std::vector<ByzantineMove> byzantine;
};

// One step of the simultaneous walk with i honest and j Byzantine robots.
// The source prepares two GHZ-style resources of width i + j in the
// schedule basis; honest robot k holds qubit k, Byzantine robot m holds
// qubit i + m. Honest robots always decode the same direction; Byzantine
// interference cannot break that correlation, only their own bits.
inline ByzantineStepResult byzantine_walk_step(
    std::size_t n_honest, const std::vector<ByzantineStrategy>& byzantines,
    Basis schedule_basis, std::size_t step,
    const std::vector<Direction>& honest_history,
    std::vector<std::mt19937_64>& honest_rngs,
    std::vector<std::mt19937_64>& byz_rngs) {
  if (n_honest == 0) {
    throw std::invalid_argument("need at least one honest robot");
  }
  if (honest_rngs.size() != n_honest || byz_rngs.size() != byzantines.size()) {
    throw std::invalid_argument("rng count does not match robot count");
  }
  const std::size_t total = n_honest + byzantines.size();
  ByzantineStepResult result;
  result.schedule_basis = schedule_basis;

  StateVector first = make_ghz_in_basis(total, schedule_basis);
  StateVector second = make_ghz_in_basis(total, schedule_basis);

  for (std::size_t k = 0; k < n_honest; ++k) {
    std::array<int, 2> bits{};
    bits[0] = measure_qubit(first, k, schedule_basis, honest_rngs[k]);
    bits[1] = measure_qubit(second, k, schedule_basis, honest_rngs[k]);
    result.honest_bits.push_back(bits);
  }
  result.honest_direction =
      decode_direction(result.honest_bits[0][0], result.honest_bits[0][1]);
  for (const auto& bits : result.honest_bits) {
    if (decode_direction(bits[0], bits[1]) != result.honest_direction) {
      throw std::logic_error("honest robots diverged on a shared basis");
    }
  }

  for (std::size_t m = 0; m < byzantines.size(); ++m) {
    const std::size_t qubit = n_honest + m;
    const ByzantineStrategy& strat = byzantines[m];
    ByzantineMove move;
    switch (strat.method) {
      case ByzantineMethod::GuessBasis: {
        const Basis guess = random_basis(byz_rngs[m]);
        const int b0 = measure_qubit(first, qubit, guess, byz_rngs[m]);
        const int b1 = measure_qubit(second, qubit, guess, byz_rngs[m]);
        move.direction = decode_direction(b0, b1);
        move.guessed_basis = true;
        move.basis_correct = (guess == schedule_basis);
        break;
      }
      case ByzantineMethod::RandomDirection: {
        move.direction = static_cast<Direction>(uniform_below(byz_rngs[m], 4));
        break;
      }
      case ByzantineMethod::FollowWithDelay: {
        if (strat.delay == 0) {
          throw std::invalid_argument("follow delay must be >= 1");
        }
        move.lag = 1;  // can only move after watching the honest deadline
        if (step >= strat.delay) {
          move.direction = honest_history[step - strat.delay];
        } else {
          move.moved = false;  // nothing to copy yet
        }
        break;
      }
    }
    move.matched_honest = move.moved && move.direction == result.honest_direction;
    result.byzantine.push_back(move);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Byzantine identification from the synchronized move log
// ---------------------------------------------------------------------------

struct MoveLogEntry {
  bool moved = false;
  Direction direction = Direction::Up;
  int lag = 0;
};

struct IdentificationReport {
  std::vector<std::size_t> suspects;
  std::vector<std::size_t> flagged_by_timing;
  std::vector<std::size_t> flagged_by_mismatch;
};

// Inspects the last `window` steps of the per-robot move log. A robot is
// flagged if it ever moved after the step deadline (or skipped a step), or
// if its rate of agreement with the on-deadline majority falls below
// `min_match_rate`. Honest robots move on the deadline and always agree.
inline IdentificationReport identify_byzantine(
    const std::vector<std::vector<MoveLogEntry>>& logs, std::size_t window,
    double min_match_rate = 1.0) {
  if (window == 0) {
    throw std::invalid_argument("identification window must be non-empty");
  }
  if (logs.empty()) {
    throw std::invalid_argument("empty move log");
  }
  const std::size_t steps = logs.front().size();
  for (const auto& log : logs) {
    if (log.size() != steps) {
      throw std::invalid_argument("ragged move logs");
    }
  }
  if (steps < window) {
    throw std::invalid_argument("move log shorter than the window");
  }

  const std::size_t begin = steps - window;
  std::vector<Direction> reference(window, Direction::Up);
  for (std::size_t t = 0; t < window; ++t) {
    std::array<std::size_t, 4> votes{};
    for (const auto& log : logs) {
      const MoveLogEntry& e = log[begin + t];
      if (e.moved && e.lag == 0) {
        ++votes[static_cast<std::size_t>(e.direction)];
      }
    }
    std::size_t best = 0;
    for (std::size_t d = 1; d < votes.size(); ++d) {
      if (votes[d] > votes[best]) best = d;
    }
    reference[t] = static_cast<Direction>(best);
  }

  IdentificationReport report;
  for (std::size_t robot = 0; robot < logs.size(); ++robot) {
    bool late = false;
    std::size_t matches = 0;
    for (std::size_t t = 0; t < window; ++t) {
      const MoveLogEntry& e = logs[robot][begin + t];
      if (!e.moved || e.lag > 0) late = true;
      if (e.moved && e.direction == reference[t]) ++matches;
    }
    const double match_rate =
        static_cast<double>(matches) / static_cast<double>(window);
    const bool mismatch = match_rate < min_match_rate;
    if (late) report.flagged_by_timing.push_back(robot);
    if (mismatch) report.flagged_by_mismatch.push_back(robot);
    if (late || mismatch) report.suspects.push_back(robot);
  }
  return report;
}

}  // namespace qswarm
