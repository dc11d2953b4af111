#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qswarm/board.hpp"
#include "qswarm/protocols.hpp"
#include "qswarm/security.hpp"

namespace qswarm {

using Json = nlohmann::ordered_json;

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

enum class Protocol : std::uint8_t {
  Walk,
  GhzWalk,
  Control,
  Avoid,
  Qkd,
  Byzantine,
  MagicSquare,
};

inline std::string_view protocol_name(Protocol p) {
  switch (p) {
    case Protocol::Walk: return "walk";
    case Protocol::GhzWalk: return "ghz-walk";
    case Protocol::Control: return "control";
    case Protocol::Avoid: return "avoid";
    case Protocol::Qkd: return "qkd";
    case Protocol::Byzantine: return "byzantine";
    case Protocol::MagicSquare: return "magic-square";
  }
  return "?";
}

inline Protocol parse_protocol(const std::string& s) {
  if (s == "walk") return Protocol::Walk;
  if (s == "ghz-walk") return Protocol::GhzWalk;
  if (s == "control") return Protocol::Control;
  if (s == "avoid") return Protocol::Avoid;
  if (s == "qkd") return Protocol::Qkd;
  if (s == "byzantine") return Protocol::Byzantine;
  if (s == "magic-square") return Protocol::MagicSquare;
  throw ScenarioError("unknown protocol: " + s);
}

enum class CoordinationMode : std::uint8_t { Global, Local };

struct CoordinationConfig {
  CoordinationMode mode = CoordinationMode::Global;
  std::int64_t threshold = 1;  // switch to coordinated steps at this distance
  friend bool operator==(const CoordinationConfig&, const CoordinationConfig&) = default;
};

struct RobotSetup {
  std::size_t count = 2;
  std::vector<Position> positions;  // empty until finalized
  friend bool operator==(const RobotSetup&, const RobotSetup&) = default;
};

struct DetectionConfig {
  std::size_t sample_size = 64;
  double threshold = 0.1;
  friend bool operator==(const DetectionConfig&, const DetectionConfig&) = default;
};

struct IdentificationConfig {
  std::size_t window = 20;
  double min_match_rate = 1.0;
  friend bool operator==(const IdentificationConfig&, const IdentificationConfig&) = default;
};

struct ByzantineRobotConfig {
  std::size_t robot = 0;
  ByzantineStrategy strategy;
  friend bool operator==(const ByzantineRobotConfig& a, const ByzantineRobotConfig& b) {
    return a.robot == b.robot && a.strategy.method == b.strategy.method &&
           a.strategy.delay == b.strategy.delay;
  }
};

struct OutputConfig {
  std::string directory = ".";
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct Scenario {
  std::string name = "scenario";
  Protocol protocol = Protocol::Walk;
  std::uint64_t seed = 0;
  std::size_t steps = 0;   // walk, ghz-walk, control, avoid, byzantine
  std::size_t rounds = 0;  // qkd, magic-square
  RobotSetup robots;
  CoordinationConfig coordination;
  BasisMode basis_mode = BasisMode::Predefined;
  std::vector<Basis> schedule;  // predefined-mode basis schedule, cycled
  EveStrategy eve;
  std::vector<ByzantineRobotConfig> byzantine;
  DetectionConfig detection;
  IdentificationConfig identification;
  std::optional<Bounds> bounds;
  std::vector<DirectiveStep> directives;
  OutputConfig output;

  bool uses_steps() const {
    return protocol != Protocol::Qkd && protocol != Protocol::MagicSquare;
  }
  bool uses_board() const {
    return protocol != Protocol::Qkd && protocol != Protocol::MagicSquare;
  }

  friend bool operator==(const Scenario& a, const Scenario& b) {
    auto eve_eq = [](const EveStrategy& x, const EveStrategy& y) {
      return x.mode == y.mode &&
             (x.mode != EveMode::InterceptResendFixedBasis ||
              x.fixed_basis == y.fixed_basis);
    };
    auto dir_eq = [](const std::vector<DirectiveStep>& x,
                     const std::vector<DirectiveStep>& y) {
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].first != y[i].first || x[i].second != y[i].second) return false;
      }
      return true;
    };
    return a.name == b.name && a.protocol == b.protocol && a.seed == b.seed &&
           a.steps == b.steps && a.rounds == b.rounds && a.robots == b.robots &&
           a.coordination == b.coordination && a.basis_mode == b.basis_mode &&
           a.schedule == b.schedule && eve_eq(a.eve, b.eve) &&
           a.byzantine == b.byzantine &&
           a.detection == b.detection && a.identification == b.identification &&
           a.bounds == b.bounds && dir_eq(a.directives, b.directives) &&
           a.output == b.output;
  }
};

namespace detail {

inline void check_keys(const Json& obj, const std::string& path,
                       const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) {
      throw ScenarioError("unknown key '" + key + "' in " + path);
    }
  }
}

inline std::size_t positive_count(const Json& obj, const std::string& path,
                                  const std::string& key) {
  if (!obj.contains(key)) {
    throw ScenarioError(path + " requires '" + key + "'");
  }
  const Json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) {
    throw ScenarioError("'" + key + "' in " + path + " must be a positive integer");
  }
  return v.get<std::size_t>();
}

inline std::pair<std::size_t, std::size_t> line_col_of(const std::string& text,
                                                       std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

inline std::string_view basis_mode_name(BasisMode m) {
  return m == BasisMode::Predefined ? "predefined" : "random";
}

inline BasisMode parse_basis_mode(const std::string& s) {
  if (s == "predefined") return BasisMode::Predefined;
  if (s == "random") return BasisMode::Random;
  throw ScenarioError("unknown basis_mode: " + s);
}

inline std::string_view eve_mode_name(EveMode m) {
  switch (m) {
    case EveMode::Passive: return "passive";
    case EveMode::InterceptResendRandomBasis: return "intercept-random";
    case EveMode::InterceptResendFixedBasis: return "intercept-fixed";
  }
  return "?";
}

inline EveMode parse_eve_mode(const std::string& s) {
  if (s == "passive") return EveMode::Passive;
  if (s == "intercept-random") return EveMode::InterceptResendRandomBasis;
  if (s == "intercept-fixed") return EveMode::InterceptResendFixedBasis;
  throw ScenarioError("unknown eve strategy: " + s);
}

inline ByzantineMethod parse_byzantine_method(const std::string& s) {
  if (s == "guess-basis") return ByzantineMethod::GuessBasis;
  if (s == "random-direction") return ByzantineMethod::RandomDirection;
  if (s == "follow-delay") return ByzantineMethod::FollowWithDelay;
  throw ScenarioError("unknown byzantine strategy: " + s);
}

// Fills default initial positions (a spaced row on the x axis) when the
// config gave none. Byzantine runs spread the robots far enough apart that
// no pair can meet within the configured number of steps.
inline void finalize_scenario(Scenario& s) {
  if (!s.uses_board()) return;
  if (s.robots.positions.empty()) {
    std::int64_t spacing = 3;
    if (s.protocol == Protocol::Avoid) spacing = 1;
    if (s.protocol == Protocol::Byzantine) {
      spacing = 2 * static_cast<std::int64_t>(s.steps) + 2;
    }
    for (std::size_t i = 0; i < s.robots.count; ++i) {
      s.robots.positions.push_back(
          Position{static_cast<std::int64_t>(i) * spacing, 0});
    }
  }
}

inline void validate_scenario(const Scenario& s) {
  if (s.uses_steps() && s.steps == 0) {
    throw ScenarioError("'steps' must be positive");
  }
  if (!s.uses_steps() && s.rounds == 0) {
    throw ScenarioError("'rounds' must be positive");
  }

  if (s.uses_board()) {
    if (s.robots.count < 2) {
      throw ScenarioError("scenario needs at least two robots");
    }
    if (s.robots.count > StateVector::kMaxQubits) {
      throw ScenarioError("at most 8 robots are supported");
    }
    if (s.robots.positions.size() != s.robots.count) {
      throw ScenarioError("robot position count does not match robot count");
    }
    for (std::size_t i = 0; i < s.robots.positions.size(); ++i) {
      for (std::size_t j = i + 1; j < s.robots.positions.size(); ++j) {
        if (s.robots.positions[i] == s.robots.positions[j]) {
          throw ScenarioError("two robots share an initial tile");
        }
      }
      if (s.bounds && !s.bounds->contains(s.robots.positions[i])) {
        throw ScenarioError("initial position outside board bounds");
      }
    }
  }

  switch (s.protocol) {
    case Protocol::Walk:
      if (s.robots.count != 2) {
        throw ScenarioError("walk uses exactly two robots");
      }
      if (s.coordination.mode == CoordinationMode::Local &&
          s.coordination.threshold < 1) {
        throw ScenarioError("coordination threshold must be >= 1");
      }
      break;
    case Protocol::Avoid:
      if (s.robots.count != 2) {
        throw ScenarioError("avoid uses exactly two robots");
      }
      break;
    case Protocol::Control: {
      if (s.directives.empty()) {
        throw ScenarioError("control requires a directive schedule");
      }
      for (const auto& step : s.directives) {
        for (const std::string* bits : {&step.first, &step.second}) {
          if (bits->size() != s.robots.count) {
            throw ScenarioError("directive width does not match robot count");
          }
          for (char c : *bits) {
            if (c != '0' && c != '1') {
              throw ScenarioError("directive bitstrings must contain only 0/1");
            }
          }
        }
      }
      break;
    }
    case Protocol::Qkd:
      if (s.detection.sample_size == 0) {
        throw ScenarioError("detection sample_size must be positive");
      }
      if (s.detection.sample_size > s.rounds) {
        throw ScenarioError("detection sample_size exceeds the round count");
      }
      if (s.detection.threshold < 0.0 || s.detection.threshold >= 1.0) {
        throw ScenarioError("detection threshold must lie in [0, 1)");
      }
      break;
    case Protocol::Byzantine: {
      if (s.byzantine.empty()) {
        throw ScenarioError("byzantine scenario needs at least one byzantine robot");
      }
      std::set<std::size_t> roster;
      for (const auto& b : s.byzantine) {
        if (b.robot >= s.robots.count) {
          throw ScenarioError("byzantine roster references an unknown robot");
        }
        if (!roster.insert(b.robot).second) {
          throw ScenarioError("robot listed twice in the byzantine roster");
        }
        if (b.strategy.method == ByzantineMethod::FollowWithDelay &&
            b.strategy.delay == 0) {
          throw ScenarioError("follow-delay requires delay >= 1");
        }
      }
      if (roster.size() * 2 >= s.robots.count) {
        throw ScenarioError("honest robots must outnumber byzantine ones");
      }
      if (s.identification.window == 0) {
        throw ScenarioError("identification window must be positive");
      }
      if (s.identification.window > s.steps) {
        throw ScenarioError("identification window exceeds the step count");
      }
      if (s.identification.min_match_rate < 0.0 ||
          s.identification.min_match_rate > 1.0) {
        throw ScenarioError("min_match_rate must lie in [0, 1]");
      }
      break;
    }
    case Protocol::GhzWalk:
    case Protocol::MagicSquare:
      break;
  }
}

inline Scenario scenario_from_json(const Json& doc) {
  if (!doc.is_object()) {
    throw ScenarioError("config root must be an object");
  }
  if (!doc.contains("protocol")) {
    throw ScenarioError("config requires 'protocol'");
  }

  Scenario s;
  s.protocol = parse_protocol(doc.at("protocol").get<std::string>());

  std::set<std::string> allowed{"name", "protocol", "seed", "output"};
  switch (s.protocol) {
    case Protocol::Walk:
      allowed.insert({"steps", "robots", "coordination", "board"});
      break;
    case Protocol::GhzWalk:
      allowed.insert({"steps", "robots", "basis_mode", "board"});
      break;
    case Protocol::Control:
      allowed.insert({"steps", "robots", "directives", "board"});
      break;
    case Protocol::Avoid:
      allowed.insert({"steps", "robots", "board"});
      break;
    case Protocol::Qkd:
      allowed.insert({"rounds", "basis_mode", "schedule", "eve", "detection"});
      break;
    case Protocol::Byzantine:
      allowed.insert({"steps", "robots", "byzantine", "identification", "board"});
      break;
    case Protocol::MagicSquare:
      allowed.insert({"rounds"});
      break;
  }
  detail::check_keys(doc, "config", allowed);
  if (doc.contains("name")) s.name = doc.at("name").get<std::string>();
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_integer()) {
      throw ScenarioError("'seed' must be an integer");
    }
    s.seed = doc.at("seed").get<std::uint64_t>();
  }

  if (s.uses_steps()) {
    s.steps = detail::positive_count(doc, "config", "steps");
  } else {
    s.rounds = detail::positive_count(doc, "config", "rounds");
  }

  if (doc.contains("robots")) {
    const Json& r = doc.at("robots");
    detail::check_keys(r, "robots", {"count", "positions"});
    if (r.contains("count")) {
      s.robots.count = detail::positive_count(r, "robots", "count");
    }
    if (r.contains("positions")) {
      for (const Json& p : r.at("positions")) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
            !p[1].is_number_integer()) {
          throw ScenarioError("positions must be [x, y] integer pairs");
        }
        s.robots.positions.push_back(
            Position{p[0].get<std::int64_t>(), p[1].get<std::int64_t>()});
      }
      if (!r.contains("count")) {
        s.robots.count = s.robots.positions.size();
      }
    }
  }

  if (doc.contains("coordination")) {
    const Json& c = doc.at("coordination");
    detail::check_keys(c, "coordination", {"mode", "threshold"});
    if (c.contains("mode")) {
      const std::string mode = c.at("mode").get<std::string>();
      if (mode == "global") {
        s.coordination.mode = CoordinationMode::Global;
      } else if (mode == "local") {
        s.coordination.mode = CoordinationMode::Local;
      } else {
        throw ScenarioError("coordination mode must be 'global' or 'local'");
      }
    }
    if (c.contains("threshold")) {
      s.coordination.threshold = c.at("threshold").get<std::int64_t>();
    }
  }

  if (doc.contains("basis_mode")) {
    s.basis_mode = parse_basis_mode(doc.at("basis_mode").get<std::string>());
  } else if (s.protocol == Protocol::Qkd) {
    s.basis_mode = BasisMode::Random;
  }

  if (doc.contains("schedule")) {
    if (s.basis_mode != BasisMode::Predefined) {
      throw ScenarioError("'schedule' requires basis_mode 'predefined'");
    }
    const std::string schedule = doc.at("schedule").get<std::string>();
    if (schedule.empty()) {
      throw ScenarioError("'schedule' must not be empty");
    }
    for (char c : schedule) {
      s.schedule.push_back(parse_basis(std::string(1, c)));
    }
  }

  if (doc.contains("eve")) {
    const Json& e = doc.at("eve");
    detail::check_keys(e, "eve", {"strategy", "basis"});
    if (e.contains("strategy")) {
      s.eve.mode = parse_eve_mode(e.at("strategy").get<std::string>());
    }
    if (s.eve.mode == EveMode::InterceptResendFixedBasis) {
      if (!e.contains("basis")) {
        throw ScenarioError("intercept-fixed eve requires 'basis'");
      }
      s.eve.fixed_basis = parse_basis(e.at("basis").get<std::string>());
    } else if (e.contains("basis")) {
      throw ScenarioError("'basis' is only valid for intercept-fixed eve");
    }
  }

  if (doc.contains("byzantine")) {
    for (const Json& b : doc.at("byzantine")) {
      detail::check_keys(b, "byzantine[]", {"robot", "strategy", "delay"});
      ByzantineRobotConfig cfg;
      if (!b.contains("robot") || !b.at("robot").is_number_integer() ||
          b.at("robot").get<std::int64_t>() < 0) {
        throw ScenarioError("byzantine entries need a non-negative 'robot' index");
      }
      cfg.robot = b.at("robot").get<std::size_t>();
      if (!b.contains("strategy")) {
        throw ScenarioError("byzantine entries need a 'strategy'");
      }
      cfg.strategy.method =
          parse_byzantine_method(b.at("strategy").get<std::string>());
      if (b.contains("delay")) {
        if (cfg.strategy.method != ByzantineMethod::FollowWithDelay) {
          throw ScenarioError("'delay' is only valid for follow-delay");
        }
        cfg.strategy.delay = b.at("delay").get<std::size_t>();
      }
      s.byzantine.push_back(cfg);
    }
  }

  if (doc.contains("detection")) {
    const Json& d = doc.at("detection");
    detail::check_keys(d, "detection", {"sample_size", "threshold"});
    if (d.contains("sample_size")) {
      s.detection.sample_size = detail::positive_count(d, "detection", "sample_size");
    }
    if (d.contains("threshold")) {
      s.detection.threshold = d.at("threshold").get<double>();
    }
  }

  if (doc.contains("identification")) {
    const Json& i = doc.at("identification");
    detail::check_keys(i, "identification", {"window", "min_match_rate"});
    if (i.contains("window")) {
      s.identification.window = detail::positive_count(i, "identification", "window");
    }
    if (i.contains("min_match_rate")) {
      s.identification.min_match_rate = i.at("min_match_rate").get<double>();
    }
  }

  if (doc.contains("board")) {
    const Json& b = doc.at("board");
    detail::check_keys(b, "board", {"bounds"});
    if (b.contains("bounds")) {
      const Json& bounds = b.at("bounds");
      detail::check_keys(bounds, "board.bounds",
                         {"min_x", "min_y", "max_x", "max_y"});
      Bounds box;
      box.min_x = bounds.at("min_x").get<std::int64_t>();
      box.min_y = bounds.at("min_y").get<std::int64_t>();
      box.max_x = bounds.at("max_x").get<std::int64_t>();
      box.max_y = bounds.at("max_y").get<std::int64_t>();
      if (box.min_x > box.max_x || box.min_y > box.max_y) {
        throw ScenarioError("board bounds are inverted");
      }
      s.bounds = box;
    }
  }

  if (doc.contains("directives")) {
    for (const Json& step : doc.at("directives")) {
      if (!step.is_array() || step.size() != 2) {
        throw ScenarioError("each directive step is a pair of bitstrings");
      }
      s.directives.push_back(
          DirectiveStep{step[0].get<std::string>(), step[1].get<std::string>()});
    }
  }

  if (doc.contains("output")) {
    const Json& o = doc.at("output");
    detail::check_keys(o, "output", {"directory"});
    if (o.contains("directory")) {
      s.output.directory = o.at("directory").get<std::string>();
    }
  }

  finalize_scenario(s);
  validate_scenario(s);
  return s;
}

// Parses a config file's contents. Malformed JSON is reported with the line
// and column of the first error; semantic problems name the offending field.
inline Scenario parse_scenario(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_col_of(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ScenarioError("config is not valid JSON at line " + std::to_string(line) +
                        ", column " + std::to_string(col));
  }
  return scenario_from_json(doc);
}

inline Json render_scenario(const Scenario& s) {
  Json doc;
  doc["name"] = s.name;
  doc["protocol"] = std::string(protocol_name(s.protocol));
  doc["seed"] = s.seed;
  if (s.uses_steps()) {
    doc["steps"] = s.steps;
  } else {
    doc["rounds"] = s.rounds;
  }
  if (s.uses_board()) {
    Json robots;
    robots["count"] = s.robots.count;
    Json positions = Json::array();
    for (const Position& p : s.robots.positions) {
      positions.push_back(Json::array({p.x, p.y}));
    }
    robots["positions"] = positions;
    doc["robots"] = robots;
  }
  if (s.protocol == Protocol::Walk) {
    doc["coordination"] = Json{
        {"mode", s.coordination.mode == CoordinationMode::Global ? "global" : "local"},
        {"threshold", s.coordination.threshold}};
  }
  if (s.protocol == Protocol::Qkd || s.protocol == Protocol::GhzWalk) {
    doc["basis_mode"] = std::string(basis_mode_name(s.basis_mode));
  }
  if (s.protocol == Protocol::Qkd) {
    if (!s.schedule.empty()) {
      std::string schedule;
      for (Basis b : s.schedule) schedule += basis_name(b);
      doc["schedule"] = schedule;
    }
    Json eve;
    eve["strategy"] = std::string(eve_mode_name(s.eve.mode));
    if (s.eve.mode == EveMode::InterceptResendFixedBasis) {
      eve["basis"] = std::string(basis_name(s.eve.fixed_basis));
    }
    doc["eve"] = eve;
    doc["detection"] = Json{{"sample_size", s.detection.sample_size},
                            {"threshold", s.detection.threshold}};
  }
  if (s.protocol == Protocol::Byzantine) {
    Json roster = Json::array();
    for (const auto& b : s.byzantine) {
      Json entry;
      entry["robot"] = b.robot;
      entry["strategy"] = std::string(byzantine_method_name(b.strategy.method));
      if (b.strategy.method == ByzantineMethod::FollowWithDelay) {
        entry["delay"] = b.strategy.delay;
      }
      roster.push_back(entry);
    }
    doc["byzantine"] = roster;
    doc["identification"] = Json{{"window", s.identification.window},
                                 {"min_match_rate", s.identification.min_match_rate}};
  }
  if (s.protocol == Protocol::Control) {
    Json directives = Json::array();
    for (const auto& step : s.directives) {
      directives.push_back(Json::array({step.first, step.second}));
    }
    doc["directives"] = directives;
  }
  if (s.bounds) {
    doc["board"] = Json{{"bounds",
                         Json{{"min_x", s.bounds->min_x},
                              {"min_y", s.bounds->min_y},
                              {"max_x", s.bounds->max_x},
                              {"max_y", s.bounds->max_y}}}};
  }
  doc["output"] = Json{{"directory", s.output.directory}};
  return doc;
}

// Sets one sweepable field from its string form; unknown fields are errors.
inline void apply_override(Scenario& s, const std::string& field,
                           const std::string& value) {
  auto as_count = [&](const std::string& v) {
    const long long n = std::stoll(v);
    if (n <= 0) throw ScenarioError("'" + field + "' must be positive");
    return static_cast<std::size_t>(n);
  };
  if (field == "robots") {
    s.robots.count = as_count(value);
    s.robots.positions.clear();
  } else if (field == "steps") {
    if (!s.uses_steps()) throw ScenarioError("protocol does not take 'steps'");
    s.steps = as_count(value);
  } else if (field == "rounds") {
    if (s.uses_steps()) throw ScenarioError("protocol does not take 'rounds'");
    s.rounds = as_count(value);
  } else if (field == "detection.sample_size") {
    s.detection.sample_size = as_count(value);
  } else if (field == "detection.threshold") {
    s.detection.threshold = std::stod(value);
  } else if (field == "coordination.threshold") {
    s.coordination.threshold = std::stoll(value);
  } else if (field == "identification.window") {
    s.identification.window = as_count(value);
  } else if (field == "identification.min_match_rate") {
    s.identification.min_match_rate = std::stod(value);
  } else if (field == "basis_mode") {
    s.basis_mode = parse_basis_mode(value);
  } else if (field == "eve.strategy") {
    s.eve.mode = parse_eve_mode(value);
  } else {
    throw ScenarioError("cannot sweep unknown field '" + field + "'");
  }
  finalize_scenario(s);
  validate_scenario(s);
}

}  // namespace qswarm
