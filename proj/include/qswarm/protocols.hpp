#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qswarm/board.hpp"
#include "qswarm/rng.hpp"
#include "qswarm/statevector.hpp"

namespace qswarm {

enum class AvoidanceConfig : std::uint8_t {
  PhiPsiConfig1,  // first pair PhiPlus, second pair PsiPlus
  PsiPhiConfig2,  // first pair PsiPlus, second pair PhiPlus
};

inline std::string_view avoidance_config_name(AvoidanceConfig c) {
  return c == AvoidanceConfig::PhiPsiConfig1 ? "config1" : "config2";
}

// Per-step directive for controlled movement: one bitstring per resource,
// bit i of each addressed to robot i.
struct DirectiveStep {
  std::string first;
  std::string second;
};

// Emits the two multi-qubit resources consumed by one protocol step. Each
// robot is assigned one qubit index (its participant index) in each.
class EntanglementSource {
 public:
  enum class Mode : std::uint8_t { EprPair, Ghz, ProductDirective, AvoidancePair };

  struct Emission {
    StateVector first;
    StateVector second;
  };

  static EntanglementSource epr() { return EntanglementSource(Mode::EprPair, 2); }

  static EntanglementSource ghz(std::size_t width) {
    if (width < 2 || width > StateVector::kMaxQubits) {
      throw std::invalid_argument("GHZ source width must be in [2, 8]");
    }
    return EntanglementSource(Mode::Ghz, width);
  }

  static EntanglementSource product_directive(std::vector<DirectiveStep> schedule) {
    if (schedule.empty()) {
      throw std::invalid_argument("directive schedule is empty");
    }
    const std::size_t width = schedule.front().first.size();
    for (const auto& step : schedule) {
      if (step.first.size() != width || step.second.size() != width) {
        throw std::invalid_argument("directive bitstrings must share one width");
      }
    }
    EntanglementSource s(Mode::ProductDirective, width);
    s.schedule_ = std::move(schedule);
    return s;
  }

  static EntanglementSource avoidance() {
    return EntanglementSource(Mode::AvoidancePair, 2);
  }

  Mode mode() const { return mode_; }
  std::size_t width() const { return width_; }

  Emission emit(std::size_t step_index) const {
    switch (mode_) {
      case Mode::EprPair:
        return {make_state(StateSpec::bell(BellState::PhiPlus)),
                make_state(StateSpec::bell(BellState::PhiPlus))};
      case Mode::Ghz:
        return {make_state(StateSpec::ghz(width_)),
                make_state(StateSpec::ghz(width_))};
      case Mode::ProductDirective: {
        const DirectiveStep& d = schedule_[step_index % schedule_.size()];
        return {make_state(StateSpec::product(d.first)),
                make_state(StateSpec::product(d.second))};
      }
      case Mode::AvoidancePair:
        throw std::logic_error("avoidance emission needs a pair config");
    }
    throw std::logic_error("unreachable");
  }

  Emission emit_avoidance(AvoidanceConfig config) const {
    if (mode_ != Mode::AvoidancePair) {
      throw std::logic_error("source is not in avoidance mode");
    }
    if (config == AvoidanceConfig::PhiPsiConfig1) {
      return {make_state(StateSpec::bell(BellState::PhiPlus)),
              make_state(StateSpec::bell(BellState::PsiPlus))};
    }
    return {make_state(StateSpec::bell(BellState::PsiPlus)),
            make_state(StateSpec::bell(BellState::PhiPlus))};
  }

 private:
  EntanglementSource(Mode mode, std::size_t width) : mode_(mode), width_(width) {}

  Mode mode_;
  std::size_t width_;
  std::vector<DirectiveStep> schedule_;
};

// Result of one protocol step: the two measured bits per robot, the decoded
// direction, positions after the move, and any crash events.
struct StepOutcome {
  std::vector<std::array<int, 2>> bits;
  std::vector<Direction> directions;
  std::vector<Position> positions;
  std::vector<CrashEvent> crashes;
};

namespace detail {

inline void require_uncrashed(const Board& board,
                              const std::vector<std::size_t>& robots) {
  for (std::size_t id : robots) {
    if (board.robot(id).crashed) {
      throw std::invalid_argument("protocol step involves a crashed robot");
    }
  }
}

// Robot k measures qubit k of both resources in the Z basis and decodes the
// resulting bit pair into a direction. Shared statevectors make the
// collapse visible to every later measurement of the same resource.
inline StepOutcome measure_and_move(Board& board,
                                    const std::vector<std::size_t>& robots,
                                    EntanglementSource::Emission emission,
                                    std::vector<std::mt19937_64>& robot_rngs) {
  StepOutcome out;
  out.bits.resize(robots.size());
  out.directions.resize(robots.size());
  out.positions.resize(robots.size());
  for (std::size_t k = 0; k < robots.size(); ++k) {
    out.bits[k][0] = measure_qubit(emission.first, k, Basis::Z, robot_rngs[k]);
    out.bits[k][1] = measure_qubit(emission.second, k, Basis::Z, robot_rngs[k]);
    out.directions[k] = decode_direction(out.bits[k][0], out.bits[k][1]);
  }
  std::map<std::size_t, Direction> moves;
  for (std::size_t k = 0; k < robots.size(); ++k) {
    moves[robots[k]] = out.directions[k];
  }
  out.crashes = board.apply_moves(moves);
  for (std::size_t k = 0; k < robots.size(); ++k) {
    out.positions[k] = board.robot(robots[k]).position;
  }
  return out;
}

}  // namespace detail

// Two robots sharing two PhiPlus pairs per step measure identical bit pairs
// and move in the same direction, so their relative offset never changes.
inline StepOutcome coordinated_step(Board& board,
                                    const std::vector<std::size_t>& robots,
                                    const EntanglementSource& source,
                                    std::vector<std::mt19937_64>& robot_rngs) {
  if (robots.size() != 2 || source.mode() != EntanglementSource::Mode::EprPair) {
    throw std::invalid_argument("coordinated_step needs two robots and an EPR source");
  }
  detail::require_uncrashed(board, robots);
  return detail::measure_and_move(board, robots, source.emit(0), robot_rngs);
}

// n-robot extension over two GHZ(n) resources per step.
inline StepOutcome ghz_coordinated_step(Board& board,
                                        const std::vector<std::size_t>& robots,
                                        const EntanglementSource& source,
                                        std::vector<std::mt19937_64>& robot_rngs) {
  if (source.mode() != EntanglementSource::Mode::Ghz) {
    throw std::invalid_argument("ghz_coordinated_step needs a GHZ source");
  }
  if (robots.size() != source.width()) {
    throw std::invalid_argument("robot count does not match resource width");
  }
  detail::require_uncrashed(board, robots);
  return detail::measure_and_move(board, robots, source.emit(0), robot_rngs);
}

// Product-state resources make every measurement deterministic: the source
// decides the complete path while the robots run the usual algorithm.
inline StepOutcome controlled_step(Board& board,
                                   const std::vector<std::size_t>& robots,
                                   const EntanglementSource& source,
                                   std::size_t step_index,
                                   std::vector<std::mt19937_64>& robot_rngs) {
  if (source.mode() != EntanglementSource::Mode::ProductDirective) {
    throw std::invalid_argument("controlled_step needs a directive source");
  }
  if (robots.size() != source.width()) {
    throw std::invalid_argument("directive width does not match robot count");
  }
  detail::require_uncrashed(board, robots);
  return detail::measure_and_move(board, robots, source.emit(step_index), robot_rngs);
}

// The four joint outcomes of one avoidance step under each pair config.
// Frozen from the protocol definition; index = (r1 first bit, r1 second bit).
struct AvoidanceOption {
  std::array<int, 2> r1_bits;
  std::array<int, 2> r2_bits;
};

inline std::array<AvoidanceOption, 4> avoidance_options(AvoidanceConfig config) {
  if (config == AvoidanceConfig::PhiPsiConfig1) {
    return {{{{0, 0}, {0, 1}},
             {{0, 1}, {0, 0}},
             {{1, 0}, {1, 1}},
             {{1, 1}, {1, 0}}}};
  }
  return {{{{0, 0}, {1, 0}},
           {{0, 1}, {1, 1}},
           {{1, 0}, {0, 0}},
           {{1, 1}, {0, 1}}}};
}

// One step of the collision-free random walk for two robots: the source
// sends (PhiPlus, PsiPlus) or (PsiPlus, PhiPlus), so the joint outcome is
// confined to four options that never move the robots toward each other.
inline StepOutcome avoidance_step(Board& board,
                                  const std::vector<std::size_t>& robots,
                                  AvoidanceConfig config,
                                  std::vector<std::mt19937_64>& robot_rngs) {
  if (robots.size() != 2) {
    throw std::invalid_argument("avoidance_step needs exactly two robots");
  }
  detail::require_uncrashed(board, robots);
  EntanglementSource source = EntanglementSource::avoidance();
  return detail::measure_and_move(board, robots, source.emit_avoidance(config),
                                  robot_rngs);
}

// For robots at Manhattan distance 1 either config is collision-free; at
// the four diagonally adjacent offsets exactly one config is, and the
// source picks it. Everywhere else the choice is a fair coin.
inline AvoidanceConfig choose_avoidance_config(Position r1, Position r2,
                                               std::mt19937_64& source_rng) {
  const std::int64_t dx = r2.x - r1.x;
  const std::int64_t dy = r2.y - r1.y;
  if (dx == 1 && dy == -1) return AvoidanceConfig::PsiPhiConfig2;
  if (dx == -1 && dy == 1) return AvoidanceConfig::PsiPhiConfig2;
  if (dx == 1 && dy == 1) return AvoidanceConfig::PhiPsiConfig1;
  if (dx == -1 && dy == -1) return AvoidanceConfig::PhiPsiConfig1;
  return coin_flip(source_rng) ? AvoidanceConfig::PsiPhiConfig2
                               : AvoidanceConfig::PhiPsiConfig1;
}

// Subset sifting for n robots and source c: per round, the maximal set of
// robots whose basis equals c's is recorded (as a bitmask of robot
// indices). Rounds where every robot matches are valid for global use;
// other rounds stay usable by the recorded subset alone.
inline std::map<std::uint32_t, std::vector<std::size_t>> sift_subsets(
    const std::vector<std::vector<Basis>>& robot_bases,
    const std::vector<Basis>& source_bases) {
  if (robot_bases.empty()) {
    throw std::invalid_argument("sift_subsets needs at least one robot log");
  }
  for (const auto& log : robot_bases) {
    if (log.size() != source_bases.size()) {
      throw std::invalid_argument("ragged basis logs");
    }
  }
  std::map<std::uint32_t, std::vector<std::size_t>> out;
  for (std::size_t round = 0; round < source_bases.size(); ++round) {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < robot_bases.size(); ++i) {
      if (robot_bases[i][round] == source_bases[round]) {
        mask |= (1u << i);
      }
    }
    if (mask != 0) {
      out[mask].push_back(round);
    }
  }
  return out;
}

inline std::uint32_t all_robots_mask(std::size_t n_robots) {
  return (1u << n_robots) - 1u;
}

}  // namespace qswarm
