#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "ehcp/types.hpp"

namespace ehcp {

inline constexpr double kFieldLength = 120.0;
inline constexpr double kFieldWidth = 53.3;
inline constexpr double kFrameRate = 10.0;  // frames per second

enum class TeamSide { home, away, ball };
enum class PassResult { caught, incomplete, intercepted, run, sack };

std::string to_string(TeamSide side);
std::string to_string(PassResult result);

struct TrackingFrame {
  PlayKey play;
  int frame_index = 0;
  /// Seconds; wall-clock seconds after parsing, seconds-from-snap once assembled.
  double timestamp = 0.0;
  EntityId entity;
  double x = 0.0;
  double y = 0.0;
  double speed = 0.0;
  double step_distance = 0.0;
  double direction = 0.0;
  std::string event_tag;
  TeamSide team = TeamSide::home;
  std::string display_name;
  std::string position;

  friend bool operator==(const TrackingFrame&, const TrackingFrame&) = default;
};

struct PlayMeta {
  PlayKey key;
  int quarter = 1;
  double clock_seconds = 900.0;
  int down = 1;
  double yards_to_go = 10.0;
  int home_score_pre = 0;
  int visitor_score_pre = 0;
  std::optional<bool> offense_is_home;
  PassResult pass_result = PassResult::incomplete;
  std::optional<double> pass_length;
  std::string description;
  bool is_penalty = false;
  bool is_special_teams = false;

  bool is_pass_play() const {
    return pass_result != PassResult::run && pass_result != PassResult::sack;
  }
  friend bool operator==(const PlayMeta&, const PlayMeta&) = default;
};

struct EventTimeline {
  int snap_frame = 0;
  int throw_frame = 0;
  int arrival_frame = 0;
  std::string outcome_tag;

  double snap_to_throw() const { return (throw_frame - snap_frame) / kFrameRate; }
  double air_time() const { return (arrival_frame - throw_frame) / kFrameRate; }
  double snap_to_arrival() const { return (arrival_frame - snap_frame) / kFrameRate; }
  friend bool operator==(const EventTimeline&, const EventTimeline&) = default;
};

using Track = std::vector<TrackingFrame>;

struct PlaySequence {
  PlayMeta meta;
  std::map<EntityId, Track> tracks;
  EventTimeline timeline;
  std::optional<EntityId> targeted_receiver;
  std::optional<EntityId> passer;
  /// Distance each entity covered in earlier plays of the same game.
  std::map<EntityId, double> prior_game_distance;

  const TrackingFrame* frame(EntityId id, int frame_index) const;
  const Track* track(EntityId id) const;
  bool is_offense(EntityId id) const;
  bool is_defense(EntityId id) const;
  std::vector<EntityId> offense() const;
  std::vector<EntityId> defense() const;
  /// Offensive non-passers tracked from snap through arrival.
  std::vector<EntityId> route_runners() const;
  /// Frame index nearest to `seconds` after the snap.
  int frame_at(double seconds_after_snap) const;

  friend bool operator==(const PlaySequence&, const PlaySequence&) = default;
};

/// A play that cannot be used; carries the reason logged by assembly.
class ExclusionError : public InputError {
 public:
  using InputError::InputError;
};

/// Column-name map plus value vocabularies, read from key=value text.
struct ColumnMapping {
  std::map<std::string, std::string> tracking;  // field -> column
  std::map<std::string, std::string> plays;
  std::map<std::string, PassResult> results;    // code -> result
  std::map<std::string, TeamSide> teams;        // code -> side
  std::set<std::string> snap_events;
  std::set<std::string> throw_events;
  std::set<std::string> arrival_events;

  static ColumnMapping big_data_bowl();
  static ColumnMapping parse(std::istream& in);
  static ColumnMapping load(const std::string& path);
  void write(std::ostream& out) const;
};

struct Rejection {
  std::string source;
  std::size_t line = 0;
  std::string reason;
};

template <class T>
struct ParseResult {
  T rows;
  std::vector<Rejection> rejections;
  std::size_t input_rows = 0;
  std::size_t accepted_rows = 0;
};

using FramesByPlay = std::map<PlayKey, std::vector<TrackingFrame>>;

ParseResult<FramesByPlay> parse_tracking_csv(std::istream& in, const ColumnMapping& mapping,
                                             const std::string& source = "tracking");
ParseResult<FramesByPlay> parse_tracking_csv(const std::string& path, const ColumnMapping& mapping);
ParseResult<std::vector<PlayMeta>> parse_plays_csv(std::istream& in, const ColumnMapping& mapping,
                                                   const std::string& source = "plays");
ParseResult<std::vector<PlayMeta>> parse_plays_csv(const std::string& path,
                                                   const ColumnMapping& mapping);

struct Exclusion {
  PlayKey key;
  std::string reason;
};

struct AssemblyResult {
  std::vector<PlaySequence> plays;
  std::vector<Exclusion> excluded;
};

AssemblyResult assemble_plays(const FramesByPlay& frames, const std::vector<PlayMeta>& metas,
                              const ColumnMapping& mapping = ColumnMapping::big_data_bowl());

EventTimeline resolve_events(const PlaySequence& play,
                             const ColumnMapping& mapping = ColumnMapping::big_data_bowl());
EntityId identify_passer(const PlaySequence& play);
EntityId identify_targeted_receiver(const PlaySequence& play);

void write_rejections(std::ostream& out, const std::vector<Rejection>& rejections);
void write_exclusions(std::ostream& out, const std::vector<Exclusion>& excluded);
/// Writes tracks using the default column layout; frames keep their timestamps.
void write_tracking_csv(std::ostream& out, const std::vector<PlaySequence>& plays);
void write_tracking_csv(std::ostream& out, const FramesByPlay& frames);
void write_plays_csv(std::ostream& out, const std::vector<PlayMeta>& metas);

}  // namespace ehcp
