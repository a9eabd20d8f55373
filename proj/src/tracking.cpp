#include "ehcp/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "ehcp/csv.hpp"

namespace ehcp {

std::string to_string(TeamSide side) {
  switch (side) {
    case TeamSide::home: return "home";
    case TeamSide::away: return "away";
    case TeamSide::ball: return "ball";
  }
  return "?";
}

std::string to_string(PassResult result) {
  switch (result) {
    case PassResult::caught: return "caught";
    case PassResult::incomplete: return "incomplete";
    case PassResult::intercepted: return "intercepted";
    case PassResult::run: return "run";
    case PassResult::sack: return "sack";
  }
  return "?";
}

namespace {

const std::vector<std::string> kRequiredTracking = {
    "game_id", "play_id", "frame_index", "entity_id", "x", "y",
    "speed", "step_distance", "direction", "team_side"};
const std::vector<std::string> kOptionalTracking = {"timestamp", "event_tag", "display_name",
                                                    "position"};
const std::vector<std::string> kRequiredPlays = {
    "game_id", "play_id", "quarter", "clock", "down", "yards_to_go",
    "home_score_pre", "visitor_score_pre", "pass_result"};
const std::vector<std::string> kOptionalPlays = {"offense_is_home", "pass_length", "description",
                                                 "is_penalty", "is_special_teams"};

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::set<std::string> split_list(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.insert(item);
  }
  return out;
}

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ",";
    out += s;
  }
  return out;
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

// Column indices for the mapped fields that exist in the header.
std::map<std::string, std::size_t> resolve_columns(const std::vector<std::string>& header,
                                                   const std::map<std::string, std::string>& fields,
                                                   const std::vector<std::string>& required,
                                                   const std::vector<std::string>& optional,
                                                   const std::string& group) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index.emplace(trim(header[i]), i);
  std::map<std::string, std::size_t> out;
  for (const auto& f : required) {
    auto it = fields.find(f);
    if (it == fields.end()) {
      throw InputError("schema error: mapping has no entry for required field " + group + "." + f);
    }
    auto col = index.find(it->second);
    if (col == index.end()) {
      throw InputError("schema error: missing required column '" + it->second + "' (field " +
                       group + "." + f + ")");
    }
    out[f] = col->second;
  }
  for (const auto& f : optional) {
    auto it = fields.find(f);
    if (it == fields.end()) continue;
    auto col = index.find(it->second);
    if (col != index.end()) out[f] = col->second;
  }
  return out;
}

// Seconds of day from "YYYY-MM-DD hh:mm:ss[.fff]" (or 'T' separated), or plain seconds.
std::optional<double> parse_timestamp(const std::string& raw) {
  if (auto v = csv::parse_double(raw)) return v;
  auto pos = raw.find_first_of(" T");
  if (pos == std::string::npos) return std::nullopt;
  std::string clock = raw.substr(pos + 1);
  if (!clock.empty() && clock.back() == 'Z') clock.pop_back();
  int h = 0, m = 0;
  double s = 0.0;
  char c1 = 0, c2 = 0;
  std::istringstream ss(clock);
  if (!(ss >> h >> c1 >> m >> c2 >> s) || c1 != ':' || c2 != ':') return std::nullopt;
  return h * 3600.0 + m * 60.0 + s;
}

// "MM:SS", "MM:SS:xx" or plain seconds.
std::optional<double> parse_clock(const std::string& raw) {
  if (auto v = csv::parse_double(raw)) return v;
  std::vector<std::string> parts;
  std::stringstream ss(raw);
  std::string p;
  while (std::getline(ss, p, ':')) parts.push_back(p);
  if (parts.size() < 2 || parts.size() > 3) return std::nullopt;
  auto mm = csv::parse_int(parts[0]);
  auto sec = csv::parse_double(parts[1]);
  if (!mm || !sec) return std::nullopt;
  return *mm * 60.0 + *sec;
}

std::optional<bool> parse_bool(const std::string& raw) {
  std::string s = raw;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "t" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "f" || s == "no") return false;
  return std::nullopt;
}

struct RowError {
  std::string reason;
};

}  // namespace

ColumnMapping ColumnMapping::big_data_bowl() {
  std::istringstream in(R"(# Big Data Bowl 2019 release layout
tracking.game_id=gameId
tracking.play_id=playId
tracking.frame_index=frame.id
tracking.timestamp=time
tracking.entity_id=nflId
tracking.x=x
tracking.y=y
tracking.speed=s
tracking.step_distance=dis
tracking.direction=dir
tracking.event_tag=event
tracking.team_side=team
tracking.display_name=displayName
tracking.position=position
plays.game_id=gameId
plays.play_id=playId
plays.quarter=quarter
plays.clock=GameClock
plays.down=down
plays.yards_to_go=yardsToGo
plays.home_score_pre=HomeScoreBeforePlay
plays.visitor_score_pre=VisitorScoreBeforePlay
plays.offense_is_home=offenseIsHome
plays.pass_result=PassResult
plays.pass_length=PassLength
plays.description=playDescription
plays.is_penalty=isPenalty
plays.is_special_teams=isSTPlay
result.C=caught
result.I=incomplete
result.IN=intercepted
result.R=run
result.S=sack
team.home=home
team.away=away
team.ball=ball
events.snap=ball_snap
events.throw=pass_forward,pass_shovel
events.arrival=pass_outcome_caught,pass_outcome_incomplete,pass_outcome_interception
)");
  return parse(in);
}

ColumnMapping ColumnMapping::parse(std::istream& in) {
  ColumnMapping m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("mapping line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto dot = key.find('.');
    if (dot == std::string::npos) {
      throw InputError("mapping line " + std::to_string(lineno) + ": key must be group.name");
    }
    const std::string group = key.substr(0, dot);
    const std::string name = key.substr(dot + 1);
    if (group == "tracking") {
      m.tracking[name] = value;
    } else if (group == "plays") {
      m.plays[name] = value;
    } else if (group == "result") {
      static const std::map<std::string, PassResult> names = {
          {"caught", PassResult::caught},   {"incomplete", PassResult::incomplete},
          {"intercepted", PassResult::intercepted}, {"run", PassResult::run},
          {"sack", PassResult::sack}};
      auto it = names.find(value);
      if (it == names.end()) {
        throw InputError("mapping line " + std::to_string(lineno) + ": unknown pass result '" +
                         value + "'");
      }
      m.results[name] = it->second;
    } else if (group == "team") {
      static const std::map<std::string, TeamSide> names = {
          {"home", TeamSide::home}, {"away", TeamSide::away}, {"ball", TeamSide::ball}};
      auto it = names.find(value);
      if (it == names.end()) {
        throw InputError("mapping line " + std::to_string(lineno) + ": unknown team side '" +
                         value + "'");
      }
      m.teams[name] = it->second;
    } else if (group == "events") {
      if (name == "snap") m.snap_events = split_list(value);
      else if (name == "throw") m.throw_events = split_list(value);
      else if (name == "arrival") m.arrival_events = split_list(value);
      else throw InputError("mapping line " + std::to_string(lineno) + ": unknown event group");
    } else {
      throw InputError("mapping line " + std::to_string(lineno) + ": unknown group '" + group + "'");
    }
  }
  return m;
}

ColumnMapping ColumnMapping::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mapping file " + path);
  return parse(in);
}

void ColumnMapping::write(std::ostream& out) const {
  for (const auto& [k, v] : tracking) out << "tracking." << k << "=" << v << "\n";
  for (const auto& [k, v] : plays) out << "plays." << k << "=" << v << "\n";
  for (const auto& [k, v] : results) out << "result." << k << "=" << to_string(v) << "\n";
  for (const auto& [k, v] : teams) out << "team." << k << "=" << to_string(v) << "\n";
  out << "events.snap=" << join(snap_events) << "\n";
  out << "events.throw=" << join(throw_events) << "\n";
  out << "events.arrival=" << join(arrival_events) << "\n";
}

ParseResult<FramesByPlay> parse_tracking_csv(std::istream& in, const ColumnMapping& mapping,
                                             const std::string& source) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw InputError("schema error: " + source + " is empty");
  const auto cols = resolve_columns(header->fields, mapping.tracking, kRequiredTracking,
                                    kOptionalTracking, "tracking");
  auto get = [&](const csv::Record& r, const std::string& f) -> const std::string& {
    return r.fields[cols.at(f)];
  };
  auto has = [&](const std::string& f) { return cols.count(f) > 0; };

  ParseResult<FramesByPlay> result;
  while (auto rec = reader.next()) {
    if (rec->fields.size() == 1 && trim(rec->fields[0]).empty()) continue;
    ++result.input_rows;
    auto reject = [&](std::string reason) {
      result.rejections.push_back({source, rec->line, std::move(reason)});
    };
    if (rec->fields.size() != header->fields.size()) {
      reject("field count " + std::to_string(rec->fields.size()) + " != header " +
             std::to_string(header->fields.size()));
      continue;
    }
    try {
      TrackingFrame f;
      auto game = csv::parse_int(get(*rec, "game_id"));
      auto play = csv::parse_int(get(*rec, "play_id"));
      if (!game || !play) throw RowError{"unparseable game_id/play_id"};
      f.play = {*game, *play};
      auto frame = csv::parse_int(get(*rec, "frame_index"));
      if (!frame || *frame < 1) throw RowError{"frame_index must be a positive integer"};
      f.frame_index = static_cast<int>(*frame);

      auto team = mapping.teams.find(trim(get(*rec, "team_side")));
      if (team == mapping.teams.end()) {
        throw RowError{"unknown team code '" + get(*rec, "team_side") + "'"};
      }
      f.team = team->second;
      if (f.team == TeamSide::ball) {
        f.entity = EntityId::ball();
      } else {
        auto id = csv::parse_int(get(*rec, "entity_id"));
        if (!id || *id < 0) throw RowError{"unparseable entity_id '" + get(*rec, "entity_id") + "'"};
        f.entity = EntityId{*id};
      }

      auto x = csv::parse_double(get(*rec, "x"));
      auto y = csv::parse_double(get(*rec, "y"));
      if (!x || !y) throw RowError{"unparseable coordinate"};
      if (*x < 0.0 || *x > kFieldLength) throw RowError{"x out of field bounds [0,120]"};
      if (*y < 0.0 || *y > kFieldWidth) throw RowError{"y out of field bounds [0,53.3]"};
      f.x = *x;
      f.y = *y;

      // The ball row carries NA kinematics in the public release; default those to 0.
      auto numeric = [&](const std::string& field, const char* label) -> double {
        const std::string& raw = get(*rec, field);
        if (f.team == TeamSide::ball && is_missing_token(trim(raw))) return 0.0;
        auto v = csv::parse_double(raw);
        if (!v) throw RowError{std::string("unparseable ") + label};
        return *v;
      };
      f.speed = numeric("speed", "speed");
      if (f.speed < 0.0) throw RowError{"negative speed"};
      f.step_distance = numeric("step_distance", "step distance");
      if (f.step_distance < 0.0) throw RowError{"negative step distance"};
      f.direction = numeric("direction", "direction");
      f.direction = std::fmod(f.direction, 360.0);
      if (f.direction < 0.0) f.direction += 360.0;

      if (has("timestamp")) {
        auto t = parse_timestamp(trim(get(*rec, "timestamp")));
        if (!t) throw RowError{"unparseable timestamp"};
        f.timestamp = *t;
      } else {
        f.timestamp = (f.frame_index - 1) / kFrameRate;
      }
      if (has("event_tag")) {
        std::string tag = trim(get(*rec, "event_tag"));
        if (!is_missing_token(tag)) f.event_tag = std::move(tag);
      }
      if (has("display_name")) f.display_name = get(*rec, "display_name");
      if (has("position")) {
        std::string pos = trim(get(*rec, "position"));
        if (!is_missing_token(pos)) f.position = std::move(pos);
      }
      result.rows[f.play].push_back(std::move(f));
      ++result.accepted_rows;
    } catch (const RowError& e) {
      reject(e.reason);
    }
  }
  return result;
}

ParseResult<FramesByPlay> parse_tracking_csv(const std::string& path, const ColumnMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open tracking file " + path);
  return parse_tracking_csv(in, mapping, path);
}

ParseResult<std::vector<PlayMeta>> parse_plays_csv(std::istream& in, const ColumnMapping& mapping,
                                                   const std::string& source) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw InputError("schema error: " + source + " is empty");
  const auto cols =
      resolve_columns(header->fields, mapping.plays, kRequiredPlays, kOptionalPlays, "plays");
  auto get = [&](const csv::Record& r, const std::string& f) -> const std::string& {
    return r.fields[cols.at(f)];
  };
  auto has = [&](const std::string& f) { return cols.count(f) > 0; };

  ParseResult<std::vector<PlayMeta>> result;
  while (auto rec = reader.next()) {
    if (rec->fields.size() == 1 && trim(rec->fields[0]).empty()) continue;
    ++result.input_rows;
    auto reject = [&](std::string reason) {
      result.rejections.push_back({source, rec->line, std::move(reason)});
    };
    if (rec->fields.size() != header->fields.size()) {
      reject("field count " + std::to_string(rec->fields.size()) + " != header " +
             std::to_string(header->fields.size()));
      continue;
    }
    try {
      PlayMeta m;
      auto game = csv::parse_int(get(*rec, "game_id"));
      auto play = csv::parse_int(get(*rec, "play_id"));
      if (!game || !play) throw RowError{"unparseable game_id/play_id"};
      m.key = {*game, *play};
      auto quarter = csv::parse_int(get(*rec, "quarter"));
      if (!quarter || *quarter < 1 || *quarter > 5) throw RowError{"quarter must be 1-5"};
      m.quarter = static_cast<int>(*quarter);
      auto clock = parse_clock(trim(get(*rec, "clock")));
      if (!clock || *clock < 0.0) throw RowError{"unparseable clock"};
      m.clock_seconds = *clock;
      auto down = csv::parse_int(get(*rec, "down"));
      if (!down || *down < 1 || *down > 4) throw RowError{"down must be 1-4"};
      m.down = static_cast<int>(*down);
      auto ytg = csv::parse_double(get(*rec, "yards_to_go"));
      if (!ytg || *ytg <= 0.0) throw RowError{"yards_to_go must be positive"};
      m.yards_to_go = *ytg;
      auto hs = csv::parse_int(get(*rec, "home_score_pre"));
      auto vs = csv::parse_int(get(*rec, "visitor_score_pre"));
      if (!hs || !vs || *hs < 0 || *vs < 0) throw RowError{"scores must be nonnegative integers"};
      m.home_score_pre = static_cast<int>(*hs);
      m.visitor_score_pre = static_cast<int>(*vs);
      const std::string code = trim(get(*rec, "pass_result"));
      auto res = mapping.results.find(code);
      if (res == mapping.results.end()) throw RowError{"unknown result code '" + code + "'"};
      m.pass_result = res->second;
      if (has("offense_is_home")) {
        m.offense_is_home = parse_bool(trim(get(*rec, "offense_is_home")));
      }
      if (has("pass_length")) m.pass_length = csv::parse_double(get(*rec, "pass_length"));
      if (has("description")) m.description = get(*rec, "description");
      if (has("is_penalty")) m.is_penalty = parse_bool(trim(get(*rec, "is_penalty"))).value_or(false);
      if (has("is_special_teams")) {
        m.is_special_teams = parse_bool(trim(get(*rec, "is_special_teams"))).value_or(false);
      }
      result.rows.push_back(std::move(m));
      ++result.accepted_rows;
    } catch (const RowError& e) {
      reject(e.reason);
    }
  }
  return result;
}

ParseResult<std::vector<PlayMeta>> parse_plays_csv(const std::string& path,
                                                   const ColumnMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open plays file " + path);
  return parse_plays_csv(in, mapping, path);
}

// ---------------------------------------------------------------------------

const Track* PlaySequence::track(EntityId id) const {
  auto it = tracks.find(id);
  return it == tracks.end() ? nullptr : &it->second;
}

const TrackingFrame* PlaySequence::frame(EntityId id, int frame_index) const {
  const Track* t = track(id);
  if (!t) return nullptr;
  auto it = std::lower_bound(t->begin(), t->end(), frame_index,
                             [](const TrackingFrame& f, int v) { return f.frame_index < v; });
  if (it == t->end() || it->frame_index != frame_index) return nullptr;
  return &*it;
}

bool PlaySequence::is_offense(EntityId id) const {
  const Track* t = track(id);
  if (!t || t->empty() || t->front().team == TeamSide::ball) return false;
  const bool home = t->front().team == TeamSide::home;
  return home == meta.offense_is_home.value_or(true);
}

bool PlaySequence::is_defense(EntityId id) const {
  const Track* t = track(id);
  if (!t || t->empty() || t->front().team == TeamSide::ball) return false;
  return !is_offense(id);
}

std::vector<EntityId> PlaySequence::offense() const {
  std::vector<EntityId> out;
  for (const auto& [id, t] : tracks) {
    if (is_offense(id)) out.push_back(id);
  }
  return out;
}

std::vector<EntityId> PlaySequence::defense() const {
  std::vector<EntityId> out;
  for (const auto& [id, t] : tracks) {
    if (is_defense(id)) out.push_back(id);
  }
  return out;
}

std::vector<EntityId> PlaySequence::route_runners() const {
  static const std::set<std::string> kEligible = {"WR", "TE", "RB", "FB", "HB"};
  std::vector<EntityId> out;
  for (EntityId id : offense()) {
    if (passer && id == *passer) continue;
    const Track& t = tracks.at(id);
    if (!t.front().position.empty() && !kEligible.count(t.front().position)) continue;
    if (!frame(id, timeline.snap_frame) || !frame(id, timeline.arrival_frame)) continue;
    out.push_back(id);
  }
  return out;
}

int PlaySequence::frame_at(double seconds_after_snap) const {
  return timeline.snap_frame + static_cast<int>(std::lround(seconds_after_snap * kFrameRate));
}

EventTimeline resolve_events(const PlaySequence& play, const ColumnMapping& mapping) {
  std::map<int, std::set<std::string>> tags;
  for (const auto& [id, track] : play.tracks) {
    for (const auto& f : track) {
      if (!f.event_tag.empty()) tags[f.frame_index].insert(f.event_tag);
    }
  }
  auto first_after = [&](const std::set<std::string>& wanted, int after,
                         std::string* which) -> std::optional<int> {
    for (const auto& [frame, names] : tags) {
      if (frame <= after) continue;
      for (const auto& n : names) {
        if (wanted.count(n)) {
          if (which) *which = n;
          return frame;
        }
      }
    }
    return std::nullopt;
  };
  EventTimeline tl;
  auto snap = first_after(mapping.snap_events, std::numeric_limits<int>::min(), nullptr);
  if (!snap) throw ExclusionError("missing snap event");
  auto thrown = first_after(mapping.throw_events, *snap, nullptr);
  if (!thrown) throw ExclusionError("missing pass release event after snap");
  auto arrival = first_after(mapping.arrival_events, *thrown, &tl.outcome_tag);
  if (!arrival) throw ExclusionError("missing pass arrival event after release");
  tl.snap_frame = *snap;
  tl.throw_frame = *thrown;
  tl.arrival_frame = *arrival;
  return tl;
}

namespace {

// Nearest candidate to a point at a frame; ties go to the smaller id.
std::optional<std::pair<EntityId, double>> nearest_to(const PlaySequence& play,
                                                      const std::vector<EntityId>& candidates,
                                                      int frame_index, double x, double y) {
  std::optional<std::pair<EntityId, double>> best;
  for (EntityId id : candidates) {
    const TrackingFrame* f = play.frame(id, frame_index);
    if (!f) continue;
    const double d = std::hypot(f->x - x, f->y - y);
    if (!best || d < best->second || (d == best->second && id < best->first)) best = {{id, d}};
  }
  return best;
}

}  // namespace

EntityId identify_passer(const PlaySequence& play) {
  const TrackingFrame* ball = play.frame(EntityId::ball(), play.timeline.throw_frame);
  if (!ball) throw ExclusionError("ball untracked at pass release");
  auto best = nearest_to(play, play.offense(), play.timeline.throw_frame, ball->x, ball->y);
  if (!best) throw ExclusionError("no offensive player tracked at pass release");
  return best->first;
}

EntityId identify_targeted_receiver(const PlaySequence& play) {
  const TrackingFrame* ball = play.frame(EntityId::ball(), play.timeline.arrival_frame);
  if (!ball) throw ExclusionError("no target: ball untracked at arrival");
  std::vector<EntityId> candidates;
  for (EntityId id : play.offense()) {
    if (play.passer && id == *play.passer) continue;
    candidates.push_back(id);
  }
  auto best = nearest_to(play, candidates, play.timeline.arrival_frame, ball->x, ball->y);
  constexpr double kMaxTargetDistance = 10.0;
  if (!best || best->second > kMaxTargetDistance) throw ExclusionError("no target");
  return best->first;
}

AssemblyResult assemble_plays(const FramesByPlay& frames, const std::vector<PlayMeta>& metas,
                              const ColumnMapping& mapping) {
  std::map<PlayKey, const PlayMeta*> meta_by_key;
  for (const auto& m : metas) {
    if (!meta_by_key.emplace(m.key, &m).second) {
      throw DataIntegrityError("duplicate play row " + to_string(m.key));
    }
  }

  // Distance covered in earlier plays of each game, over all tracked plays.
  std::map<PlayKey, std::map<EntityId, double>> prior_distance;
  {
    std::int64_t game = std::numeric_limits<std::int64_t>::min();
    std::map<EntityId, double> running;
    for (const auto& [key, rows] : frames) {
      if (key.game_id != game) {
        game = key.game_id;
        running.clear();
      }
      prior_distance[key] = running;
      std::vector<const TrackingFrame*> ordered;
      ordered.reserve(rows.size());
      for (const auto& f : rows) ordered.push_back(&f);
      std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) {
        return std::tie(a->entity, a->frame_index) < std::tie(b->entity, b->frame_index);
      });
      for (const auto* f : ordered) {
        if (!f->entity.is_ball()) running[f->entity] += f->step_distance;
      }
    }
  }

  AssemblyResult out;
  std::set<PlayKey> keys;
  for (const auto& [k, v] : frames) keys.insert(k);
  for (const auto& [k, v] : meta_by_key) keys.insert(k);

  for (const PlayKey& key : keys) {
    auto mit = meta_by_key.find(key);
    auto fit = frames.find(key);
    auto exclude = [&](std::string reason) { out.excluded.push_back({key, std::move(reason)}); };
    if (fit == frames.end() || fit->second.empty()) {
      exclude("no tracking");
      continue;
    }
    if (mit == meta_by_key.end()) {
      exclude("no play row");
      continue;
    }
    const PlayMeta& meta = *mit->second;
    if (!meta.is_pass_play()) {
      exclude("not a pass play (" + to_string(meta.pass_result) + ")");
      continue;
    }
    if (meta.is_penalty) {
      exclude("penalty on play");
      continue;
    }
    if (meta.is_special_teams) {
      exclude("special teams play");
      continue;
    }

    PlaySequence play;
    play.meta = meta;
    for (const auto& f : fit->second) play.tracks[f.entity].push_back(f);
    for (auto& [id, track] : play.tracks) {
      std::stable_sort(track.begin(), track.end(), [](const auto& a, const auto& b) {
        return a.frame_index < b.frame_index;
      });
      for (std::size_t i = 1; i < track.size(); ++i) {
        if (track[i].frame_index == track[i - 1].frame_index) {
          throw DataIntegrityError("duplicate frame " + std::to_string(track[i].frame_index) +
                                   " for entity " + to_string(id) + " in play " + to_string(key));
        }
      }
    }
    if (!play.track(EntityId::ball())) {
      exclude("no ball track");
      continue;
    }
    try {
      play.timeline = resolve_events(play, mapping);
      const TrackingFrame* snap_ball = play.frame(EntityId::ball(), play.timeline.snap_frame);
      if (!snap_ball) throw ExclusionError("ball untracked at snap");
      if (!play.meta.offense_is_home) {
        // the center holds the ball at the snap
        std::vector<EntityId> players;
        for (const auto& [id, t] : play.tracks) {
          if (!id.is_ball()) players.push_back(id);
        }
        auto nearest = nearest_to(play, players, play.timeline.snap_frame, snap_ball->x, snap_ball->y);
        if (!nearest) throw ExclusionError("no players tracked at snap");
        play.meta.offense_is_home = play.tracks.at(nearest->first).front().team == TeamSide::home;
      }
      const double snap_time = snap_ball->timestamp;
      for (auto& [id, track] : play.tracks) {
        for (auto& f : track) f.timestamp -= snap_time;
      }
      play.passer = identify_passer(play);
      play.targeted_receiver = identify_targeted_receiver(play);
      if (!play.frame(*play.targeted_receiver, play.timeline.snap_frame) ||
          !play.frame(*play.targeted_receiver, play.timeline.throw_frame)) {
        throw ExclusionError("target not tracked from snap to arrival");
      }
    } catch (const ExclusionError& e) {
      exclude(e.what());
      continue;
    }
    play.prior_game_distance = prior_distance[key];
    out.plays.push_back(std::move(play));
  }
  return out;
}

void write_rejections(std::ostream& out, const std::vector<Rejection>& rejections) {
  csv::write_row(out, {"source", "line", "reason"});
  for (const auto& r : rejections) csv::write_row(out, {r.source, std::to_string(r.line), r.reason});
}

void write_exclusions(std::ostream& out, const std::vector<Exclusion>& excluded) {
  csv::write_row(out, {"gameId", "playId", "reason"});
  for (const auto& e : excluded) {
    csv::write_row(out, {std::to_string(e.key.game_id), std::to_string(e.key.play_id), e.reason});
  }
}

namespace {

const std::vector<std::string> kTrackingHeader = {
    "time", "x", "y", "s", "dis", "dir", "event", "nflId", "displayName",
    "position", "team", "frame.id", "gameId", "playId"};

void write_frame(std::ostream& out, const TrackingFrame& f) {
  using csv::format_double;
  csv::write_row(out, {format_double(f.timestamp), format_double(f.x), format_double(f.y),
                       format_double(f.speed), format_double(f.step_distance),
                       format_double(f.direction), f.event_tag.empty() ? "NA" : f.event_tag,
                       f.entity.is_ball() ? "NA" : std::to_string(f.entity.value),
                       f.display_name, f.position, to_string(f.team),
                       std::to_string(f.frame_index), std::to_string(f.play.game_id),
                       std::to_string(f.play.play_id)});
}

std::string result_code(PassResult r) {
  switch (r) {
    case PassResult::caught: return "C";
    case PassResult::incomplete: return "I";
    case PassResult::intercepted: return "IN";
    case PassResult::run: return "R";
    case PassResult::sack: return "S";
  }
  return "";
}

}  // namespace

void write_tracking_csv(std::ostream& out, const std::vector<PlaySequence>& plays) {
  csv::write_row(out, kTrackingHeader);
  for (const auto& p : plays) {
    for (const auto& [id, track] : p.tracks) {
      for (const auto& f : track) write_frame(out, f);
    }
  }
}

void write_tracking_csv(std::ostream& out, const FramesByPlay& frames) {
  csv::write_row(out, kTrackingHeader);
  for (const auto& [key, rows] : frames) {
    for (const auto& f : rows) write_frame(out, f);
  }
}

void write_plays_csv(std::ostream& out, const std::vector<PlayMeta>& metas) {
  csv::write_row(out, {"gameId", "playId", "quarter", "GameClock", "down", "yardsToGo",
                       "HomeScoreBeforePlay", "VisitorScoreBeforePlay", "offenseIsHome",
                       "isPenalty", "isSTPlay", "PassLength", "PassResult", "playDescription"});
  for (const auto& m : metas) {
    std::string clock;
    if (m.clock_seconds == std::floor(m.clock_seconds)) {
      const int total = static_cast<int>(m.clock_seconds);
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%02d:%02d", total / 60, total % 60);
      clock = buf;
    } else {
      clock = csv::format_double(m.clock_seconds);
    }
    csv::write_row(out, {std::to_string(m.key.game_id), std::to_string(m.key.play_id),
                         std::to_string(m.quarter), clock, std::to_string(m.down),
                         csv::format_double(m.yards_to_go), std::to_string(m.home_score_pre),
                         std::to_string(m.visitor_score_pre),
                         m.offense_is_home ? (*m.offense_is_home ? "TRUE" : "FALSE") : "NA",
                         m.is_penalty ? "TRUE" : "FALSE", m.is_special_teams ? "TRUE" : "FALSE",
                         m.pass_length ? csv::format_double(*m.pass_length) : "NA",
                         result_code(m.pass_result), m.description});
  }
}

}  // namespace ehcp
