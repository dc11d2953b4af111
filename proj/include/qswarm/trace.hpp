#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qswarm/board.hpp"
#include "qswarm/magic_square.hpp"
#include "qswarm/security.hpp"
#include "qswarm/statevector.hpp"

namespace qswarm {

using Json = nlohmann::ordered_json;

inline std::string robot_name(std::size_t index) {
  return "r" + std::to_string(index + 1);
}

inline Json position_json(Position p) {
  return Json{{"x", p.x}, {"y", p.y}};
}

// Append-only event log; one JSON object per event, written as JSON Lines.
// Field order is fixed so identical runs serialize byte-identically.
class TraceLog {
 public:
  void emit(std::size_t step, const std::string& source,
            const std::string& state, std::size_t qubits) {
    Json e = header(step, "emit");
    e["source"] = source;
    e["state"] = state;
    e["qubits"] = qubits;
    push(step, std::move(e));
  }

  void measure(std::size_t step, const std::string& party, Basis basis,
               const std::string& bits) {
    Json e = header(step, "measure");
    e["party"] = party;
    e["basis"] = std::string(basis_name(basis));
    e["bits"] = bits;
    push(step, std::move(e));
  }

  void publish(std::size_t step, const std::string& party, Basis basis) {
    Json e = header(step, "publish");
    e["party"] = party;
    e["basis"] = std::string(basis_name(basis));
    push(step, std::move(e));
  }

  void move(std::size_t step, const std::string& robot, Direction direction,
            Position position, int lag = 0) {
    Json e = header(step, "move");
    e["robot"] = robot;
    e["direction"] = std::string(direction_name(direction));
    e["position"] = position_json(position);
    if (lag > 0) e["lag"] = lag;
    push(step, std::move(e));
  }

  void crash(std::size_t step, const CrashEvent& event) {
    Json e = header(step, "crash");
    Json robots = Json::array();
    for (std::size_t id : event.robots) robots.push_back(robot_name(id));
    e["robots"] = robots;
    e["position"] = position_json(event.position);
    push(step, std::move(e));
  }

  void verdict(std::size_t step, const DetectionReport& report) {
    Json e = header(step, "verdict");
    e["rounds_used"] = report.rounds_used;
    e["disagreements"] = report.disagreements;
    e["qber"] = report.qber;
    e["threshold"] = report.threshold;
    e["verdict"] = std::string(verdict_name(report.verdict));
    push(step, std::move(e));
  }

  void game_round(std::size_t step, const GameRound& round,
                  const SensorCheck& sensor, int shared_bit) {
    Json e = header(step, "game-round");
    e["row"] = round.row;
    e["col"] = round.col;
    e["row_values"] = round.row_values;
    e["col_values"] = round.col_values;
    e["win"] = round.win;
    e["sensor"] = Json{{"row", sensor.row}, {"col", sensor.col},
                       {"fired", sensor.fired}};
    e["shared_bit"] = shared_bit;
    push(step, std::move(e));
  }

  const std::vector<Json>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

  std::string to_jsonl() const {
    std::string out;
    for (const Json& e : events_) {
      out += e.dump();
      out += '\n';
    }
    return out;
  }

 private:
  Json header(std::size_t step, const char* kind) const {
    return Json{{"step", step}, {"kind", kind}};
  }

  void push(std::size_t step, Json&& e) {
    if (!events_.empty() && step < last_step_) {
      throw std::logic_error("trace steps must be non-decreasing");
    }
    last_step_ = step;
    events_.push_back(std::move(e));
  }

  std::vector<Json> events_;
  std::size_t last_step_ = 0;
};

// Writes via a temp file plus rename, so readers never observe a partial
// file and aborted runs leave no half-written outputs.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
      throw std::runtime_error("failed writing " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace qswarm
