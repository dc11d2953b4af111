#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qswarm {

struct Position {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend auto operator<=>(const Position&, const Position&) = default;
};

enum class Direction : std::uint8_t { Up, Down, Right, Left };

inline std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::Up: return "up";
    case Direction::Down: return "down";
    case Direction::Right: return "right";
    case Direction::Left: return "left";
  }
  return "?";
}

inline Direction parse_direction(std::string_view s) {
  if (s == "up") return Direction::Up;
  if (s == "down") return Direction::Down;
  if (s == "right") return Direction::Right;
  if (s == "left") return Direction::Left;
  throw std::invalid_argument("unknown direction: " + std::string(s));
}

inline Position step_toward(Position p, Direction d) {
  switch (d) {
    case Direction::Up: return {p.x, p.y + 1};
    case Direction::Down: return {p.x, p.y - 1};
    case Direction::Right: return {p.x + 1, p.y};
    case Direction::Left: return {p.x - 1, p.y};
  }
  return p;
}

// Movement encoding of a measured two-bit pair:
// 00 -> up, 11 -> down, 01 -> right, 10 -> left.
inline Direction decode_direction(int first_bit, int second_bit) {
  if (first_bit == 0 && second_bit == 0) return Direction::Up;
  if (first_bit == 1 && second_bit == 1) return Direction::Down;
  if (first_bit == 0 && second_bit == 1) return Direction::Right;
  return Direction::Left;
}

inline std::int64_t manhattan_distance(Position a, Position b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

struct Bounds {
  std::int64_t min_x = 0;
  std::int64_t min_y = 0;
  std::int64_t max_x = 0;
  std::int64_t max_y = 0;
  bool contains(Position p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct RobotState {
  std::size_t id = 0;
  Position position;
  bool crashed = false;
  std::vector<Position> path;  // path.back() == position, always
};

struct CrashEvent {
  Position position;
  std::vector<std::size_t> robots;
};

// Grid world with simultaneous 4-direction moves and crash-on-collision.
// The board is unbounded unless bounds are given; a move that would leave
// the bounds is an error, not a clamp or wrap. Two robots moving to the
// same tile crash there and never move again, as do robots that swap tiles
// (the swap rule can be disabled).
class Board {
 public:
  Board() = default;
  explicit Board(Bounds bounds) : bounds_(bounds) {}

  std::size_t add_robot(Position start) {
    if (bounds_ && !bounds_->contains(start)) {
      throw std::invalid_argument("robot starts outside board bounds");
    }
    if (occupant(start)) {
      throw std::invalid_argument("tile already occupied");
    }
    RobotState r;
    r.id = robots_.size();
    r.position = start;
    r.path.push_back(start);
    robots_.push_back(std::move(r));
    return robots_.back().id;
  }

  std::size_t robot_count() const { return robots_.size(); }
  const RobotState& robot(std::size_t id) const { return robots_.at(id); }
  const std::vector<RobotState>& robots() const { return robots_; }

  std::optional<std::size_t> occupant(Position p) const {
    for (const auto& r : robots_) {
      if (r.position == p) return r.id;
    }
    return std::nullopt;
  }

  bool swap_crashes() const { return swap_crashes_; }
  void set_swap_crashes(bool on) { swap_crashes_ = on; }
  const std::optional<Bounds>& bounds() const { return bounds_; }

  // Applies all moves simultaneously. Any tile holding two or more robots
  // afterwards, and (if enabled) any pair exchanging tiles, crashes every
  // robot involved at its landing tile.
  std::vector<CrashEvent> apply_moves(
      const std::map<std::size_t, Direction>& moves) {
    for (const auto& [id, dir] : moves) {
      (void)dir;
      if (id >= robots_.size()) {
        throw std::out_of_range("unknown robot id");
      }
      if (robots_[id].crashed) {
        throw std::invalid_argument("crashed robot cannot move");
      }
    }

    std::vector<Position> target(robots_.size());
    std::vector<bool> moved(robots_.size(), false);
    for (std::size_t id = 0; id < robots_.size(); ++id) {
      target[id] = robots_[id].position;
    }
    for (const auto& [id, dir] : moves) {
      target[id] = step_toward(robots_[id].position, dir);
      moved[id] = true;
      if (bounds_ && !bounds_->contains(target[id])) {
        throw std::domain_error("move leaves board bounds");
      }
    }

    std::vector<bool> crash(robots_.size(), false);
    if (swap_crashes_) {
      for (const auto& [a, da] : moves) {
        (void)da;
        for (const auto& [b, db] : moves) {
          (void)db;
          if (a < b && target[a] == robots_[b].position &&
              target[b] == robots_[a].position) {
            crash[a] = crash[b] = true;
          }
        }
      }
    }
    std::map<Position, std::vector<std::size_t>> by_tile;
    for (std::size_t id = 0; id < robots_.size(); ++id) {
      by_tile[target[id]].push_back(id);
    }
    for (const auto& [tile, ids] : by_tile) {
      (void)tile;
      if (ids.size() >= 2) {
        for (std::size_t id : ids) crash[id] = true;
      }
    }

    std::vector<CrashEvent> events;
    std::map<Position, std::vector<std::size_t>> crash_tiles;
    for (std::size_t id = 0; id < robots_.size(); ++id) {
      if (moved[id]) {
        robots_[id].position = target[id];
        robots_[id].path.push_back(target[id]);
      }
      if (crash[id] && !robots_[id].crashed) {
        robots_[id].crashed = true;
        crash_tiles[robots_[id].position].push_back(id);
      }
    }
    for (auto& [tile, ids] : crash_tiles) {
      events.push_back(CrashEvent{tile, std::move(ids)});
    }
    return events;
  }

 private:
  std::vector<RobotState> robots_;
  std::optional<Bounds> bounds_;
  bool swap_crashes_ = true;
};

}  // namespace qswarm
