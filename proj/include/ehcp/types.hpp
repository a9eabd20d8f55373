#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace ehcp {

/// Player identifier from the tracking feed; the ball uses a sentinel value.
struct EntityId {
  std::int64_t value = 0;

  static constexpr EntityId ball() { return EntityId{-1}; }
  constexpr bool is_ball() const { return value == -1; }

  friend constexpr auto operator<=>(const EntityId&, const EntityId&) = default;
};

inline std::string to_string(EntityId id) {
  return id.is_ball() ? std::string("BALL") : std::to_string(id.value);
}

/// (game_id, play_id); play ids are only unique within a game.
struct PlayKey {
  std::int64_t game_id = 0;
  std::int64_t play_id = 0;

  friend constexpr auto operator<=>(const PlayKey&, const PlayKey&) = default;
};

inline std::string to_string(const PlayKey& k) {
  return std::to_string(k.game_id) + "/" + std::to_string(k.play_id);
}

/// Raised when input violates a documented precondition.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a dataset violates an integrity rule (duplicates, bad joins).
class DataIntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ehcp

template <>
struct std::hash<ehcp::EntityId> {
  std::size_t operator()(const ehcp::EntityId& e) const noexcept {
    return std::hash<std::int64_t>{}(e.value);
  }
};

template <>
struct std::hash<ehcp::PlayKey> {
  std::size_t operator()(const ehcp::PlayKey& k) const noexcept {
    return std::hash<std::int64_t>{}(k.game_id) * 1000003u ^
           std::hash<std::int64_t>{}(k.play_id);
  }
};
