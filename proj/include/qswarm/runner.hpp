#pragma once

#include <array>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qswarm/board.hpp"
#include "qswarm/magic_square.hpp"
#include "qswarm/protocols.hpp"
#include "qswarm/rng.hpp"
#include "qswarm/scenario.hpp"
#include "qswarm/security.hpp"
#include "qswarm/trace.hpp"

namespace qswarm {

struct RunResult {
  Scenario scenario;
  TraceLog trace;
  Json stats;
};

namespace detail {

struct DirectionTally {
  std::array<std::size_t, 4> counts{};
  std::size_t total = 0;

  void add(Direction d) {
    ++counts[static_cast<std::size_t>(d)];
    ++total;
  }

  Json counts_json() const {
    Json j;
    j["up"] = counts[0];
    j["down"] = counts[1];
    j["right"] = counts[2];
    j["left"] = counts[3];
    return j;
  }

  Json frequencies_json() const {
    Json j;
    const double t = total > 0 ? static_cast<double>(total) : 1.0;
    j["up"] = static_cast<double>(counts[0]) / t;
    j["down"] = static_cast<double>(counts[1]) / t;
    j["right"] = static_cast<double>(counts[2]) / t;
    j["left"] = static_cast<double>(counts[3]) / t;
    return j;
  }
};

inline std::string bits_string(const std::array<int, 2>& bits) {
  std::string s;
  s += static_cast<char>('0' + bits[0]);
  s += static_cast<char>('0' + bits[1]);
  return s;
}

inline Board make_board(const Scenario& s) {
  Board board = s.bounds ? Board(*s.bounds) : Board();
  for (const Position& p : s.robots.positions) {
    board.add_robot(p);
  }
  return board;
}

inline void trace_step_moves(TraceLog& trace, std::size_t step,
                             const Board& board,
                             const std::vector<std::size_t>& ids,
                             const std::vector<Direction>& dirs,
                             const std::vector<CrashEvent>& crashes) {
  for (std::size_t k = 0; k < ids.size(); ++k) {
    trace.move(step, robot_name(ids[k]), dirs[k], board.robot(ids[k]).position);
  }
  for (const CrashEvent& c : crashes) {
    trace.crash(step, c);
  }
}

inline std::string subset_label(std::uint32_t mask, std::size_t n_robots) {
  std::string label;
  for (std::size_t i = 0; i < n_robots; ++i) {
    if (mask & (1u << i)) {
      if (!label.empty()) label += "+";
      label += robot_name(i);
    }
  }
  return label;
}

// ---------------------------------------------------------------------------

inline RunResult run_walk(const Scenario& s, bool collect_trace) {
  RunResult result;
  result.scenario = s;
  TraceLog& trace = result.trace;

  RngPool pool(s.seed);
  std::vector<std::mt19937_64> walk_rngs, measure_rngs;
  for (std::size_t i = 0; i < 2; ++i) {
    walk_rngs.push_back(pool.stream("walk:" + robot_name(i)));
    measure_rngs.push_back(pool.stream("measure:" + robot_name(i)));
  }

  Board board = make_board(s);
  const std::vector<std::size_t> ids{0, 1};
  EntanglementSource source = EntanglementSource::epr();

  bool coordinated = s.coordination.mode == CoordinationMode::Global;
  std::optional<std::size_t> switch_step = coordinated ? std::optional<std::size_t>(0)
                                                       : std::nullopt;
  std::optional<Position> locked_offset;
  bool offset_constant = true;
  DirectionTally tally;
  std::size_t coordinated_steps = 0, independent_steps = 0, crash_count = 0;

  for (std::size_t step = 0; step < s.steps; ++step) {
    if (!coordinated) {
      const std::int64_t d = manhattan_distance(board.robot(0).position,
                                                board.robot(1).position);
      if (d <= s.coordination.threshold) {
        coordinated = true;
        switch_step = step;
      }
    }

    std::vector<CrashEvent> crashes;
    if (coordinated) {
      if (collect_trace) {
        trace.emit(step, "c", "phi+", 2);
        trace.emit(step, "c", "phi+", 2);
      }
      StepOutcome out = coordinated_step(board, ids, source, measure_rngs);
      if (collect_trace) {
        for (std::size_t k = 0; k < ids.size(); ++k) {
          trace.measure(step, robot_name(ids[k]), Basis::Z, bits_string(out.bits[k]));
        }
        trace_step_moves(trace, step, board, ids, out.directions, out.crashes);
      }
      crashes = out.crashes;
      tally.add(out.directions[0]);
      ++coordinated_steps;

      const Position a = board.robot(0).position;
      const Position b = board.robot(1).position;
      const Position offset{b.x - a.x, b.y - a.y};
      if (!locked_offset) {
        locked_offset = offset;
      } else if (offset != *locked_offset) {
        offset_constant = false;
      }
    } else {
      std::vector<Direction> dirs(2);
      std::map<std::size_t, Direction> moves;
      for (std::size_t k = 0; k < 2; ++k) {
        dirs[k] = static_cast<Direction>(uniform_below(walk_rngs[k], 4));
        moves[ids[k]] = dirs[k];
      }
      crashes = board.apply_moves(moves);
      if (collect_trace) {
        trace_step_moves(trace, step, board, ids, dirs, crashes);
      }
      ++independent_steps;
    }

    for (const CrashEvent& c : crashes) crash_count += c.robots.size();
    if (board.robot(0).crashed || board.robot(1).crashed) {
      break;  // nobody left to coordinate with
    }
  }

  Json stats;
  stats["protocol"] = "walk";
  stats["name"] = s.name;
  stats["seed"] = s.seed;
  stats["steps"] = s.steps;
  stats["coordination_mode"] =
      s.coordination.mode == CoordinationMode::Global ? "global" : "local";
  stats["coordination_threshold"] = s.coordination.threshold;
  if (switch_step) {
    stats["switch_step"] = *switch_step;
  } else {
    stats["switch_step"] = nullptr;
  }
  stats["coordinated_steps"] = coordinated_steps;
  stats["independent_steps"] = independent_steps;
  stats["direction_counts"] = tally.counts_json();
  stats["direction_frequencies"] = tally.frequencies_json();
  stats["direction_trials"] = tally.total;
  stats["relative_offset_constant"] = offset_constant;
  stats["crashed_robots"] = crash_count;
  stats["final_distance"] =
      manhattan_distance(board.robot(0).position, board.robot(1).position);
  result.stats = std::move(stats);
  return result;
}

// ---------------------------------------------------------------------------

inline RunResult run_ghz_walk(const Scenario& s, bool collect_trace) {
  RunResult result;
  result.scenario = s;
  TraceLog& trace = result.trace;

  const std::size_t n = s.robots.count;
  RngPool pool(s.seed);
  std::mt19937_64 schedule = pool.stream("schedule");
  std::mt19937_64 c_basis = pool.stream("basis:c");
  std::vector<std::mt19937_64> basis_rngs, measure_rngs;
  for (std::size_t i = 0; i < n; ++i) {
    basis_rngs.push_back(pool.stream("basis:" + robot_name(i)));
    measure_rngs.push_back(pool.stream("measure:" + robot_name(i)));
  }

  Board board = make_board(s);
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;

  std::vector<std::vector<Basis>> robot_bases(n);
  std::vector<Basis> source_bases;
  DirectionTally tally;
  std::size_t moved_steps = 0, identical_violations = 0, crash_count = 0;

  for (std::size_t step = 0; step < s.steps; ++step) {
    const Basis b_c = s.basis_mode == BasisMode::Predefined
                          ? random_basis(schedule)
                          : random_basis(c_basis);
    StateVector first = make_ghz_in_basis(n, b_c);
    StateVector second = make_ghz_in_basis(n, b_c);
    if (collect_trace) {
      const std::string state = b_c == Basis::Z ? "ghz" : "ghz-x";
      trace.emit(step, "c", state, n);
      trace.emit(step, "c", state, n);
    }

    std::vector<std::array<int, 2>> bits(n);
    std::vector<Basis> bases(n);
    for (std::size_t k = 0; k < n; ++k) {
      bases[k] = s.basis_mode == BasisMode::Predefined
                     ? b_c
                     : random_basis(basis_rngs[k]);
      bits[k][0] = measure_qubit(first, k, bases[k], measure_rngs[k]);
      bits[k][1] = measure_qubit(second, k, bases[k], measure_rngs[k]);
      robot_bases[k].push_back(bases[k]);
      if (collect_trace) {
        trace.measure(step, robot_name(k), bases[k], bits_string(bits[k]));
      }
    }
    source_bases.push_back(b_c);
    if (collect_trace && s.basis_mode == BasisMode::Random) {
      trace.publish(step, "c", b_c);
      for (std::size_t k = 0; k < n; ++k) {
        trace.publish(step, robot_name(k), bases[k]);
      }
    }

    bool all_match = true;
    for (std::size_t k = 0; k < n; ++k) {
      if (bases[k] != b_c) all_match = false;
    }
    if (!all_match) continue;  // round kept for subsets, no global move

    std::vector<Direction> dirs(n);
    std::map<std::size_t, Direction> moves;
    for (std::size_t k = 0; k < n; ++k) {
      dirs[k] = decode_direction(bits[k][0], bits[k][1]);
      moves[k] = dirs[k];
    }
    for (std::size_t k = 1; k < n; ++k) {
      if (dirs[k] != dirs[0]) ++identical_violations;
    }
    const std::vector<CrashEvent> crashes = board.apply_moves(moves);
    if (collect_trace) {
      trace_step_moves(trace, step, board, ids, dirs, crashes);
    }
    for (const CrashEvent& c : crashes) crash_count += c.robots.size();
    tally.add(dirs[0]);
    ++moved_steps;
    bool any_crashed = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (board.robot(k).crashed) any_crashed = true;
    }
    if (any_crashed) break;
  }

  const auto subsets = sift_subsets(robot_bases, source_bases);
  const std::uint32_t full = all_robots_mask(n);
  const std::size_t all_match_rounds =
      subsets.count(full) ? subsets.at(full).size() : 0;

  Json subset_counts;
  for (const auto& [mask, rounds] : subsets) {
    subset_counts[subset_label(mask, n)] = rounds.size();
  }

  Json stats;
  stats["protocol"] = "ghz-walk";
  stats["name"] = s.name;
  stats["seed"] = s.seed;
  stats["steps"] = s.steps;
  stats["robots"] = n;
  stats["basis_mode"] = std::string(basis_mode_name(s.basis_mode));
  stats["moved_steps"] = moved_steps;
  stats["all_match_rounds"] = all_match_rounds;
  stats["all_match_fraction"] =
      static_cast<double>(all_match_rounds) / static_cast<double>(s.steps);
  stats["expected_all_match_fraction"] =
      s.basis_mode == BasisMode::Random ? std::pow(0.5, static_cast<double>(n)) : 1.0;
  stats["subset_counts"] = subset_counts;
  stats["identical_move_violations"] = identical_violations;
  stats["direction_counts"] = tally.counts_json();
  stats["direction_trials"] = tally.total;
  stats["crashed_robots"] = crash_count;
  result.stats = std::move(stats);
  return result;
}

// ---------------------------------------------------------------------------

inline RunResult run_control(const Scenario& s, bool collect_trace) {
  RunResult result;
  result.scenario = s;
  TraceLog& trace = result.trace;

  const std::size_t n = s.robots.count;
  RngPool pool(s.seed);
  std::vector<std::mt19937_64> measure_rngs;
  for (std::size_t i = 0; i < n; ++i) {
    measure_rngs.push_back(pool.stream("measure:" + robot_name(i)));
  }

  Board board = make_board(s);
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  EntanglementSource source = EntanglementSource::product_directive(s.directives);

  std::vector<DirectionTally> tallies(n);
  std::size_t crash_count = 0, executed = 0;

  for (std::size_t step = 0; step < s.steps; ++step) {
    const DirectiveStep& d = s.directives[step % s.directives.size()];
    if (collect_trace) {
      trace.emit(step, "c", "product:" + d.first, n);
      trace.emit(step, "c", "product:" + d.second, n);
    }
    StepOutcome out = controlled_step(board, ids, source, step, measure_rngs);
    if (collect_trace) {
      for (std::size_t k = 0; k < n; ++k) {
        trace.measure(step, robot_name(k), Basis::Z, bits_string(out.bits[k]));
      }
      trace_step_moves(trace, step, board, ids, out.directions, out.crashes);
    }
    for (std::size_t k = 0; k < n; ++k) tallies[k].add(out.directions[k]);
    for (const CrashEvent& c : out.crashes) crash_count += c.robots.size();
    ++executed;
    bool any_crashed = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (board.robot(k).crashed) any_crashed = true;
    }
    if (any_crashed) break;
  }

  Json per_robot = Json::array();
  for (std::size_t k = 0; k < n; ++k) {
    Json r;
    r["robot"] = robot_name(k);
    r["direction_counts"] = tallies[k].counts_json();
    r["final_position"] = position_json(board.robot(k).position);
    per_robot.push_back(r);
  }

  Json stats;
  stats["protocol"] = "control";
  stats["name"] = s.name;
  stats["seed"] = s.seed;
  stats["steps"] = s.steps;
  stats["executed_steps"] = executed;
  stats["robots"] = n;
  stats["directive_period"] = s.directives.size();
  stats["per_robot"] = per_robot;
  stats["crashed_robots"] = crash_count;
  result.stats = std::move(stats);
  return result;
}

// ---------------------------------------------------------------------------

inline RunResult run_avoid(const Scenario& s, bool collect_trace) {
  RunResult result;
  result.scenario = s;
  TraceLog& trace = result.trace;

  RngPool pool(s.seed);
  std::mt19937_64 emission = pool.stream("emission");
  std::vector<std::mt19937_64> measure_rngs;
  for (std::size_t i = 0; i < 2; ++i) {
    measure_rngs.push_back(pool.stream("measure:" + robot_name(i)));
  }

  Board board = make_board(s);
  const std::vector<std::size_t> ids{0, 1};
  const std::int64_t initial_distance =
      manhattan_distance(board.robot(0).position, board.robot(1).position);
  std::int64_t min_distance = initial_distance;
  std::size_t crash_count = 0;
  std::array<std::size_t, 2> config_counts{};
  std::map<std::string, std::size_t> outcome_counts;

  for (std::size_t step = 0; step < s.steps; ++step) {
    const AvoidanceConfig config = choose_avoidance_config(
        board.robot(0).position, board.robot(1).position, emission);
    ++config_counts[config == AvoidanceConfig::PhiPsiConfig1 ? 0 : 1];
    if (collect_trace) {
      const bool c1 = config == AvoidanceConfig::PhiPsiConfig1;
      trace.emit(step, "c", c1 ? "phi+" : "psi+", 2);
      trace.emit(step, "c", c1 ? "psi+" : "phi+", 2);
    }
    StepOutcome out = avoidance_step(board, ids, config, measure_rngs);
    if (collect_trace) {
      for (std::size_t k = 0; k < 2; ++k) {
        trace.measure(step, robot_name(k), Basis::Z, bits_string(out.bits[k]));
      }
      trace_step_moves(trace, step, board, ids, out.directions, out.crashes);
    }
    const std::string key = std::string(avoidance_config_name(config)) + ":" +
                            std::string(direction_name(out.directions[0])) + "-" +
                            std::string(direction_name(out.directions[1]));
    ++outcome_counts[key];
    for (const CrashEvent& c : out.crashes) crash_count += c.robots.size();
    const std::int64_t d =
        manhattan_distance(board.robot(0).position, board.robot(1).position);
    if (d < min_distance) min_distance = d;
    if (board.robot(0).crashed || board.robot(1).crashed) break;
  }

  Json outcomes;
  for (const auto& [key, count] : outcome_counts) outcomes[key] = count;

  Json stats;
  stats["protocol"] = "avoid";
  stats["name"] = s.name;
  stats["seed"] = s.seed;
  stats["steps"] = s.steps;
  stats["crashed_robots"] = crash_count;
  stats["config_counts"] = Json{{"config1", config_counts[0]},
                                {"config2", config_counts[1]}};
  stats["outcome_counts"] = outcomes;
  stats["initial_distance"] = initial_distance;
  stats["min_distance"] = min_distance;
  stats["final_distance"] =
      manhattan_distance(board.robot(0).position, board.robot(1).position);
  result.stats = std::move(stats);
  return result;
}

// ---------------------------------------------------------------------------

inline RunResult run_qkd(const Scenario& s, bool collect_trace) {
  RunResult result;
  result.scenario = s;
  TraceLog& trace = result.trace;

  RngPool pool(s.seed);
  DetectionRngs rngs = DetectionRngs::from_pool(pool);
  std::mt19937_64 sample_rng = pool.stream("sample");

  const DetectionRecords records =
      run_detection_rounds(s.rounds, s.basis_mode, s.eve, rngs, s.schedule);

  if (collect_trace) {
    for (std::size_t round = 0; round < s.rounds; ++round) {
      trace.emit(round, "c", "phi+", 2);
      const auto log_measure = [&](const MeasurementRecord& rec,
                                   std::size_t index) {
        const MeasurementEntry& e = rec.entries[index];
        trace.measure(round, rec.party, e.basis, std::string(1, static_cast<char>('0' + e.bit)));
      };
      log_measure(records.c, round);
      if (s.eve.intercepts()) log_measure(records.eve, round);
      log_measure(records.r1, round);
      log_measure(records.r2, round);
      trace.publish(round, "c", records.c.entries[round].basis);
      trace.publish(round, "r1", records.r1.entries[round].basis);
      trace.publish(round, "r2", records.r2.entries[round].basis);
    }
  }

  const std::vector<std::size_t> valid = sift(records.c, records.r1, records.r2);
  const QberEstimate estimate =
      estimate_qber(valid, records.r1, records.r2, s.detection.sample_size,
                    s.detection.threshold, sample_rng);
  if (collect_trace) {
    trace.verdict(s.rounds > 0 ? s.rounds - 1 : 0, estimate.report);
  }

  // Residual agreement on the rounds kept for movement, for reporting only.
  std::size_t residual_disagreements = 0;
  for (std::size_t round : estimate.remaining_rounds) {
    if (records.r1.entries[round].bit != records.r2.entries[round].bit) {
      ++residual_disagreements;
    }
  }

  Json stats;
  stats["protocol"] = "qkd";
  stats["name"] = s.name;
  stats["seed"] = s.seed;
  stats["rounds"] = s.rounds;
  stats["basis_mode"] = std::string(basis_mode_name(s.basis_mode));
  stats["eve"] = std::string(eve_mode_name(s.eve.mode));
  if (s.eve.mode == EveMode::InterceptResendFixedBasis) {
    stats["eve_basis"] = std::string(basis_name(s.eve.fixed_basis));
  }
  stats["valid_rounds"] = valid.size();
  stats["sift_fraction"] =
      static_cast<double>(valid.size()) / static_cast<double>(s.rounds);
  stats["expected_sift_fraction"] =
      s.basis_mode == BasisMode::Random ? 0.25 : 1.0;
  stats["detection"] = Json{{"sample_size", estimate.report.rounds_used},
                            {"threshold", estimate.report.threshold},
                            {"disagreements", estimate.report.disagreements},
                            {"qber", estimate.report.qber},
                            {"verdict", std::string(verdict_name(estimate.report.verdict))}};
  stats["movement_rounds_remaining"] = estimate.remaining_rounds.size();
  stats["residual_disagreements"] = residual_disagreements;
  result.stats = std::move(stats);
  return result;
}

// ---------------------------------------------------------------------------

inline RunResult run_byzantine(const Scenario& s, bool collect_trace) {
  RunResult result;
  result.scenario = s;
  TraceLog& trace = result.trace;

  const std::size_t n = s.robots.count;
  std::vector<bool> is_byz(n, false);
  for (const auto& b : s.byzantine) is_byz[b.robot] = true;
  std::vector<std::size_t> honest_ids, byz_ids;
  std::vector<ByzantineStrategy> strategies;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_byz[i]) continue;
    honest_ids.push_back(i);
  }
  for (const auto& b : s.byzantine) {
    byz_ids.push_back(b.robot);
    strategies.push_back(b.strategy);
  }

  RngPool pool(s.seed);
  std::mt19937_64 schedule = pool.stream("schedule");
  std::vector<std::mt19937_64> honest_rngs, byz_rngs;
  for (std::size_t id : honest_ids) {
    honest_rngs.push_back(pool.stream("measure:" + robot_name(id)));
  }
  for (std::size_t id : byz_ids) {
    byz_rngs.push_back(pool.stream("byz:" + robot_name(id)));
  }

  Board board = make_board(s);
  std::vector<Direction> honest_history;
  std::vector<std::vector<MoveLogEntry>> move_logs(n);
  struct ByzTally {
    std::size_t matches = 0, moves = 0, basis_correct = 0, guesses = 0;
  };
  std::vector<ByzTally> tallies(byz_ids.size());
  std::size_t crash_count = 0;

  for (std::size_t step = 0; step < s.steps; ++step) {
    const Basis basis = random_basis(schedule);
    const ByzantineStepResult res = byzantine_walk_step(
        honest_ids.size(), strategies, basis, step, honest_history,
        honest_rngs, byz_rngs);
    honest_history.push_back(res.honest_direction);

    if (collect_trace) {
      const std::string state = basis == Basis::Z ? "ghz" : "ghz-x";
      trace.emit(step, "c", state, n);
      trace.emit(step, "c", state, n);
      for (std::size_t k = 0; k < honest_ids.size(); ++k) {
        trace.measure(step, robot_name(honest_ids[k]), basis,
                      bits_string(res.honest_bits[k]));
      }
    }

    std::map<std::size_t, Direction> moves;
    for (std::size_t id : honest_ids) moves[id] = res.honest_direction;
    for (std::size_t m = 0; m < byz_ids.size(); ++m) {
      if (res.byzantine[m].moved) {
        moves[byz_ids[m]] = res.byzantine[m].direction;
      }
    }
    const std::vector<CrashEvent> crashes = board.apply_moves(moves);
    for (const CrashEvent& c : crashes) crash_count += c.robots.size();

    for (std::size_t id : honest_ids) {
      move_logs[id].push_back({true, res.honest_direction, 0});
      if (collect_trace) {
        trace.move(step, robot_name(id), res.honest_direction,
                   board.robot(id).position);
      }
    }
    for (std::size_t m = 0; m < byz_ids.size(); ++m) {
      const ByzantineMove& mv = res.byzantine[m];
      move_logs[byz_ids[m]].push_back({mv.moved, mv.direction, mv.lag});
      ByzTally& t = tallies[m];
      if (mv.moved) {
        ++t.moves;
        if (mv.matched_honest) ++t.matches;
        if (collect_trace) {
          trace.move(step, robot_name(byz_ids[m]), mv.direction,
                     board.robot(byz_ids[m]).position, mv.lag);
        }
      }
      if (mv.guessed_basis) {
        ++t.guesses;
        if (mv.basis_correct) ++t.basis_correct;
      }
    }
    if (collect_trace) {
      for (const CrashEvent& c : crashes) trace.crash(step, c);
    }
  }

  const IdentificationReport report = identify_byzantine(
      move_logs, s.identification.window, s.identification.min_match_rate);

  auto names = [](const std::vector<std::size_t>& ids) {
    Json arr = Json::array();
    for (std::size_t id : ids) arr.push_back(robot_name(id));
    return arr;
  };

  Json per_byz = Json::array();
  for (std::size_t m = 0; m < byz_ids.size(); ++m) {
    const ByzTally& t = tallies[m];
    Json b;
    b["robot"] = robot_name(byz_ids[m]);
    b["strategy"] = std::string(byzantine_method_name(strategies[m].method));
    if (strategies[m].method == ByzantineMethod::FollowWithDelay) {
      b["delay"] = strategies[m].delay;
    }
    b["steps"] = s.steps;
    b["moves"] = t.moves;
    b["matches"] = t.matches;
    b["match_rate"] = s.steps > 0
                          ? static_cast<double>(t.matches) / static_cast<double>(s.steps)
                          : 0.0;
    switch (strategies[m].method) {
      case ByzantineMethod::GuessBasis:
        // Right basis (p=1/2) always matches; a wrong basis still matches
        // by luck 1/4 of the time: 1/2 + 1/2 * 1/4.
        b["expected_match_rate"] = 0.625;
        b["basis_guess_success_rate"] =
            t.guesses > 0 ? static_cast<double>(t.basis_correct) /
                                static_cast<double>(t.guesses)
                          : 0.0;
        break;
      case ByzantineMethod::RandomDirection:
        b["expected_match_rate"] = 0.25;
        break;
      case ByzantineMethod::FollowWithDelay:
        break;
    }
    per_byz.push_back(b);
  }

  Json stats;
  stats["protocol"] = "byzantine";
  stats["name"] = s.name;
  stats["seed"] = s.seed;
  stats["steps"] = s.steps;
  stats["robots"] = n;
  stats["honest"] = names(honest_ids);
  stats["byzantine"] = per_byz;
  stats["identification"] = Json{
      {"window", s.identification.window},
      {"min_match_rate", s.identification.min_match_rate},
      {"suspects", names(report.suspects)},
      {"flagged_by_timing", names(report.flagged_by_timing)},
      {"flagged_by_mismatch", names(report.flagged_by_mismatch)}};
  stats["crashed_robots"] = crash_count;
  result.stats = std::move(stats);
  return result;
}

// ---------------------------------------------------------------------------

inline RunResult run_magic_square(const Scenario& s, bool collect_trace) {
  RunResult result;
  result.scenario = s;
  TraceLog& trace = result.trace;

  RngPool pool(s.seed);
  std::mt19937_64 inputs = pool.stream("inputs");
  std::mt19937_64 game = pool.stream("game");

  MagicSquareTable table;
  std::size_t wins = 0, sensor_fires = 0;
  std::size_t row_parity_violations = 0, col_parity_violations = 0;
  std::array<std::array<std::size_t, 3>, 3> input_counts{};
  std::array<std::array<std::size_t, 3>, 3> input_wins{};

  for (std::size_t round_index = 0; round_index < s.rounds; ++round_index) {
    const std::size_t row = uniform_below(inputs, 3);
    const std::size_t col = uniform_below(inputs, 3);
    const GameRound round = quantum_round(row, col, table, game);
    const SensorCheck sensor = sensor_board_check(round);
    ++input_counts[row][col];
    if (round.win) {
      ++wins;
      ++input_wins[row][col];
    }
    if (sensor.fired) ++sensor_fires;
    if (round.row_values[0] * round.row_values[1] * round.row_values[2] != 1) {
      ++row_parity_violations;
    }
    if (round.col_values[0] * round.col_values[1] * round.col_values[2] != -1) {
      ++col_parity_violations;
    }
    if (collect_trace) {
      trace.emit(round_index, "c", "phi+ x phi+", 4);
      trace.game_round(round_index, round, sensor, shared_coordination_bit(round));
    }
  }

  const ClassicalOptimum classical = classical_optimum();

  Json inputs_json = Json::array();
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      inputs_json.push_back(Json{{"row", r},
                                 {"col", c},
                                 {"rounds", input_counts[r][c]},
                                 {"wins", input_wins[r][c]}});
    }
  }

  Json stats;
  stats["protocol"] = "magic-square";
  stats["name"] = s.name;
  stats["seed"] = s.seed;
  stats["rounds"] = s.rounds;
  stats["wins"] = wins;
  stats["win_rate"] = static_cast<double>(wins) / static_cast<double>(s.rounds);
  stats["sensor_fires"] = sensor_fires;
  stats["row_parity_violations"] = row_parity_violations;
  stats["col_parity_violations"] = col_parity_violations;
  stats["per_input"] = inputs_json;
  stats["classical_optimum"] = Json{{"numerator", classical.numerator},
                                    {"denominator", classical.denominator},
                                    {"max_wins_of_9", classical.max_wins}};
  result.stats = std::move(stats);
  return result;
}

}  // namespace detail

// Executes a validated scenario deterministically. With `collect_trace`
// false only the stats summary is produced (used by sweeps).
inline RunResult run_scenario(const Scenario& s, bool collect_trace = true) {
  validate_scenario(s);
  switch (s.protocol) {
    case Protocol::Walk: return detail::run_walk(s, collect_trace);
    case Protocol::GhzWalk: return detail::run_ghz_walk(s, collect_trace);
    case Protocol::Control: return detail::run_control(s, collect_trace);
    case Protocol::Avoid: return detail::run_avoid(s, collect_trace);
    case Protocol::Qkd: return detail::run_qkd(s, collect_trace);
    case Protocol::Byzantine: return detail::run_byzantine(s, collect_trace);
    case Protocol::MagicSquare: return detail::run_magic_square(s, collect_trace);
  }
  throw std::logic_error("unreachable");
}

// Output directory resolution: the environment override wins over the
// scenario's own setting.
inline std::filesystem::path resolve_output_directory(const Scenario& s) {
  if (const char* env = std::getenv("QSWARM_OUTPUT_DIR")) {
    if (*env != '\0') return std::filesystem::path(env);
  }
  return std::filesystem::path(s.output.directory);
}

struct OutputPaths {
  std::filesystem::path trace;
  std::filesystem::path stats;
};

inline OutputPaths write_outputs(const RunResult& result) {
  const std::filesystem::path dir = resolve_output_directory(result.scenario);
  std::filesystem::create_directories(dir);
  OutputPaths paths{dir / (result.scenario.name + ".trace.jsonl"),
                    dir / (result.scenario.name + ".stats.json")};
  write_file_atomic(paths.trace, result.trace.to_jsonl());
  write_file_atomic(paths.stats, result.stats.dump(2) + "\n");
  return paths;
}

// ---------------------------------------------------------------------------
// Parameter sweeps
// ---------------------------------------------------------------------------

struct SweepSpec {
  // Field name -> values, in declaration order; the cartesian product is
  // executed grid-major, then by seed, so the report order is stable.
  std::vector<std::pair<std::string, std::vector<std::string>>> fields;
  std::vector<std::uint64_t> seeds;
};

inline Json run_sweep(const Scenario& base, const SweepSpec& spec) {
  if (spec.seeds.empty()) {
    throw ScenarioError("sweep needs at least one seed");
  }
  std::vector<std::map<std::string, std::string>> grid_points;
  grid_points.emplace_back();
  for (const auto& [field, values] : spec.fields) {
    if (values.empty()) {
      throw ScenarioError("sweep field '" + field + "' has no values");
    }
    std::vector<std::map<std::string, std::string>> expanded;
    for (const auto& point : grid_points) {
      for (const std::string& value : values) {
        auto next = point;
        next[field] = value;
        expanded.push_back(std::move(next));
      }
    }
    grid_points = std::move(expanded);
  }

  Json rows = Json::array();
  for (const auto& point : grid_points) {
    for (std::uint64_t seed : spec.seeds) {
      Scenario scenario = base;
      for (const auto& [field, values] : spec.fields) {
        apply_override(scenario, field, point.at(field));
      }
      scenario.seed = seed;
      const RunResult result = run_scenario(scenario, /*collect_trace=*/false);
      Json grid;
      for (const auto& [field, values] : spec.fields) {
        (void)values;
        grid[field] = point.at(field);
      }
      rows.push_back(Json{{"grid", grid}, {"seed", seed}, {"stats", result.stats}});
    }
  }
  return rows;
}

}  // namespace qswarm
