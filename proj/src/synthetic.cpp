#include "ehcp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ehcp/features.hpp"
#include "ehcp/random.hpp"

namespace ehcp {

namespace {

constexpr double kMidField = kFieldWidth / 2.0;

struct Kinematics {
  double x = 0.0, y = 0.0, vx = 0.0, vy = 0.0;
};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Smooth stem-and-break route; t in seconds after the snap.
struct Route {
  double x0 = 0.0, y0 = 0.0, v = 6.0, u = 3.0, t_break = 1.2;
  static constexpr double kWidth = 0.3;

  Kinematics at(double t) const {
    if (t <= 0.0) return {x0, y0, 0.0, 0.0};
    const double s = sigmoid((t - t_break) / kWidth);
    const double lateral = u * (t - t_break) * s;
    const double dlateral = u * (s + (t - t_break) * s * (1.0 - s) / kWidth);
    // subtract the value at t=0 so the path is continuous at the snap
    const double s0 = sigmoid(-t_break / kWidth);
    return {x0 + v * t, y0 + lateral - u * (-t_break) * s0, v, dlateral};
  }
};

struct Path {
  EntityId id;
  TeamSide team = TeamSide::home;
  std::string name;
  std::string position;
  std::vector<Kinematics> k;  // one per frame
};

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

double direction_of(double vx, double vy) {
  if (std::hypot(vx, vy) < 1e-12) return 90.0;
  double deg = std::atan2(vx, vy) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

double wrap(double d) {
  while (d > 180.0) d -= 360.0;
  while (d <= -180.0) d += 360.0;
  return d;
}

struct Attempt {
  SyntheticPlay result;
  bool ok = false;
};

Attempt try_generate(std::uint64_t seed, const SyntheticParams& p,
                     const std::map<EntityId, double>& prior_distance) {
  Rng rng(seed);
  const double noise = p.noise_scale;
  const int snap_frame = p.pre_snap_frames + 1;
  const int throw_frame = snap_frame + static_cast<int>(std::lround(p.throw_time * kFrameRate));
  const int arrival_frame =
      throw_frame + std::max(1, static_cast<int>(std::lround(p.air_time * kFrameRate)));
  const int last_frame = arrival_frame + p.post_arrival_frames;
  const auto time_of = [&](int f) { return (f - snap_frame) / kFrameRate; };

  const double los = 20.0 + 35.0 * rng.uniform();
  const std::int64_t base = p.passer_id * 100;
  const TeamSide offense = p.offense_is_home ? TeamSide::home : TeamSide::away;
  const TeamSide defense = p.offense_is_home ? TeamSide::away : TeamSide::home;

  std::vector<Route> routes(static_cast<std::size_t>(p.route_count));
  struct Cover {
    double dx, dy, drift_x, drift_y, lag;
  };
  std::vector<Cover> covers(routes.size());
  for (std::size_t k = 0; k < routes.size(); ++k) {
    Route& r = routes[k];
    const double lane = 8.0 + (kFieldWidth - 16.0) * (k + 0.5) / static_cast<double>(routes.size());
    r.x0 = los;
    r.y0 = clamp(lane + noise * rng.normal(), 8.0, kFieldWidth - 8.0);
    r.v = clamp(6.0 + noise * rng.normal(), 3.0, 8.0);
    r.t_break = clamp(1.2 + 0.4 * noise * rng.normal(), 0.5, 2.5);
    const double toward_middle = r.y0 < kMidField ? 1.0 : -1.0;
    r.u = toward_middle * clamp(2.5 + noise * rng.normal(), 0.0, 4.0);
    covers[k] = {clamp(2.5 + 0.8 * noise * rng.normal(), 0.5, 5.0),
                 clamp(noise * rng.normal(), -3.0, 3.0), clamp(0.3 * noise * rng.normal(), -0.5, 0.5),
                 clamp(0.3 * noise * rng.normal(), -0.5, 0.5), 0.3};
  }
  const int target_route =
      p.target_route ? *p.target_route : static_cast<int>(rng.index(routes.size()));
  const double land_dx = p.ball_landing_noise ? 0.7 * noise * rng.normal() : 0.0;
  const double land_dy = p.ball_landing_noise ? 0.7 * noise * rng.normal() : 0.0;

  std::vector<Path> paths;
  auto add_path = [&](EntityId id, TeamSide team, std::string name, std::string pos) -> Path& {
    paths.push_back({id, team, std::move(name), std::move(pos), {}});
    return paths.back();
  };

  // offense
  {
    Path& qb = add_path(EntityId{p.passer_id}, offense, p.passer_name, "QB");
    for (int f = 1; f <= last_frame; ++f) {
      const double t = time_of(f);
      if (p.stationary || t <= 0.0) {
        qb.k.push_back({los - 1.0, kMidField, 0.0, 0.0});
        continue;
      }
      const double u = std::min(t / 1.2, 1.0);
      const double s = 3 * u * u - 2 * u * u * u;
      const double ds = t < 1.2 ? (6 * u - 6 * u * u) / 1.2 : 0.0;
      qb.k.push_back({los - 1.0 - 4.0 * s, kMidField, -4.0 * ds, 0.0});
    }
    Path& center = add_path(EntityId{base + 1}, offense, "C" + std::to_string(base + 1), "C");
    for (int f = 1; f <= last_frame; ++f) center.k.push_back({los, kMidField, 0.0, 0.0});
  }
  for (std::size_t k = 0; k < routes.size(); ++k) {
    const EntityId id{base + 10 + static_cast<std::int64_t>(k)};
    Path& wr = add_path(id, offense, "WR" + std::to_string(id.value), "WR");
    for (int f = 1; f <= last_frame; ++f) {
      const double t = p.stationary ? 0.0 : time_of(f);
      wr.k.push_back(routes[k].at(t));
    }
  }
  // defense
  for (std::size_t k = 0; k < routes.size(); ++k) {
    const EntityId id{base + 50 + static_cast<std::int64_t>(k)};
    Path& db = add_path(id, defense, "CB" + std::to_string(id.value), "CB");
    const Cover& c = covers[k];
    for (int f = 1; f <= last_frame; ++f) {
      const double t = p.stationary ? 0.0 : time_of(f);
      const double tt = std::max(0.0, t);
      const Kinematics r = routes[k].at(std::max(0.0, t - c.lag));
      const bool moving = t > 0.0;
      db.k.push_back({r.x + c.dx + c.drift_x * tt, r.y + c.dy + c.drift_y * tt,
                      moving ? r.vx + c.drift_x : 0.0, moving ? r.vy + c.drift_y : 0.0});
    }
  }
  {
    const EntityId id{base + 90};
    Path& fs = add_path(id, defense, "FS" + std::to_string(id.value), "FS");
    for (int f = 1; f <= last_frame; ++f) {
      const double t = p.stationary ? 0.0 : std::max(0.0, time_of(f));
      fs.k.push_back({los + 15.0 + 0.5 * t, kMidField, t > 0.0 ? 0.5 : 0.0, 0.0});
    }
  }
  // ball
  const Path& qb_path = paths[0];
  const Path& target_path = paths[2 + static_cast<std::size_t>(target_route)];
  {
    const Kinematics land = target_path.k[static_cast<std::size_t>(arrival_frame - 1)];
    const double land_x = land.x + land_dx;
    const double land_y = land.y + land_dy;
    const Kinematics release = qb_path.k[static_cast<std::size_t>(throw_frame - 1)];
    const double rel_x = release.x + 0.3;
    const double rel_y = release.y;
    Path& ball = add_path(EntityId::ball(), TeamSide::ball, "football", "");
    for (int f = 1; f <= last_frame; ++f) {
      const double t = time_of(f);
      const Kinematics q = qb_path.k[static_cast<std::size_t>(f - 1)];
      if (t <= 0.0) {
        ball.k.push_back({los + 0.2, kMidField, 0.0, 0.0});
      } else if (f < throw_frame) {
        const double w = std::min(t / 0.3, 1.0);
        ball.k.push_back({(1 - w) * (los + 0.2) + w * (q.x + 0.3), kMidField, 0.0, 0.0});
      } else if (f <= arrival_frame) {
        const double w = static_cast<double>(f - throw_frame) / (arrival_frame - throw_frame);
        const double air = (arrival_frame - throw_frame) / kFrameRate;
        ball.k.push_back({rel_x + w * (land_x - rel_x), rel_y + w * (land_y - rel_y),
                          (land_x - rel_x) / air, (land_y - rel_y) / air});
      } else {
        ball.k.push_back({land_x, land_y, 0.0, 0.0});
      }
    }
  }

  Attempt out;
  for (auto& path : paths) {
    for (auto& k : path.k) {
      if (k.x < 0.5 || k.x > kFieldLength - 0.5 || k.y < 0.5 || k.y > kFieldWidth - 0.5) return out;
    }
  }

  // frames
  PlaySequence& play = out.result.play;
  play.meta.key = p.key;
  play.meta.quarter = 1 + static_cast<int>(rng.index(4));
  play.meta.clock_seconds = static_cast<double>(rng.index(900));
  play.meta.down = 1 + static_cast<int>(rng.index(4));
  play.meta.yards_to_go = 1.0 + static_cast<double>(rng.index(15));
  play.meta.home_score_pre = static_cast<int>(rng.index(36));
  play.meta.visitor_score_pre = static_cast<int>(rng.index(36));
  play.meta.offense_is_home = p.offense_is_home;
  play.meta.description = "(synthetic) " + p.passer_name + " pass";

  for (const auto& path : paths) {
    Track& track = play.tracks[path.id];
    for (int f = 1; f <= last_frame; ++f) {
      const Kinematics& k = path.k[static_cast<std::size_t>(f - 1)];
      TrackingFrame fr;
      fr.play = p.key;
      fr.frame_index = f;
      fr.timestamp = time_of(f);
      fr.entity = path.id;
      fr.x = k.x;
      fr.y = k.y;
      fr.speed = path.id.is_ball() ? 0.0 : std::hypot(k.vx, k.vy);
      if (f > 1) {
        const Kinematics& prev = path.k[static_cast<std::size_t>(f - 2)];
        fr.step_distance = std::hypot(k.x - prev.x, k.y - prev.y);
      }
      fr.direction = path.id.is_ball() ? 0.0 : direction_of(k.vx, k.vy);
      fr.team = path.team;
      fr.display_name = path.name;
      fr.position = path.position;
      if (f == snap_frame) fr.event_tag = "ball_snap";
      if (f == throw_frame) fr.event_tag = "pass_forward";
      track.push_back(fr);
    }
  }
  play.timeline = {snap_frame, throw_frame, arrival_frame, ""};
  play.passer = EntityId{p.passer_id};
  play.prior_game_distance = prior_distance;

  // ground truth from the generator's own paths
  SyntheticTruth& truth = out.result.truth;
  truth.passer = EntityId{p.passer_id};
  truth.target = target_path.id;
  for (std::size_t k = 0; k < routes.size(); ++k) truth.receivers.push_back(paths[2 + k].id);

  auto frame_pos = [&](const Path& path, int f) { return path.k[static_cast<std::size_t>(f - 1)]; };
  const Path& ball_path = paths.back();

  // the target must be the unique nearest offensive non-passer to the ball at arrival
  {
    const Kinematics b = frame_pos(ball_path, arrival_frame);
    const Kinematics t = frame_pos(target_path, arrival_frame);
    const double d_target = std::hypot(t.x - b.x, t.y - b.y);
    if (d_target > 5.0) return out;
    for (std::size_t i = 1; i < paths.size(); ++i) {
      const Path& other = paths[i];
      if (other.team != offense || other.id == target_path.id) continue;
      const Kinematics o = frame_pos(other, arrival_frame);
      if (std::hypot(o.x - b.x, o.y - b.y) <= d_target + 0.5) return out;
    }
  }

  auto block = [&](int f, const std::string& suffix) {
    const Kinematics r = frame_pos(target_path, f);
    const Kinematics b = frame_pos(ball_path, f);
    const Path* best = nullptr;
    double best_d = 0.0, second_d = 1e300;
    for (const auto& path : paths) {
      if (path.team != defense) continue;
      const Kinematics d = frame_pos(path, f);
      const double dist = std::sqrt((d.x - r.x) * (d.x - r.x) + (d.y - r.y) * (d.y - r.y));
      if (!best || dist < best_d) {
        if (best) second_d = best_d;
        best = &path;
        best_d = dist;
      } else {
        second_d = std::min(second_d, dist);
      }
    }
    const Kinematics d = frame_pos(*best, f);
    auto& cv = truth.covariates;
    cv["rec_speed_" + suffix] = std::sqrt(r.vx * r.vx + r.vy * r.vy);
    cv["rec_dir_" + suffix] = direction_of(r.vx, r.vy);
    auto put = [&](const std::string& stem, const Kinematics& a, const Kinematics& c) {
      const double h = std::abs(a.x - c.x), v = std::abs(a.y - c.y);
      cv[stem + "_euc_" + suffix] = std::sqrt(h * h + v * v);
      cv[stem + "_hor_" + suffix] = h;
      cv[stem + "_ver_" + suffix] = v;
    };
    put("rec_def", r, d);
    put("rec_ball", r, b);
    put("def_ball", d, b);
    double cum = 0.0;
    if (auto it = prior_distance.find(target_path.id); it != prior_distance.end()) cum = it->second;
    for (int g = 2; g <= f; ++g) {
      const Kinematics a = frame_pos(target_path, g - 1);
      const Kinematics c = frame_pos(target_path, g);
      cum += std::hypot(c.x - a.x, c.y - a.y);
    }
    cv["rec_cum_dist_" + suffix] = cum;
    return std::pair{best->id, second_d - best_d};
  };
  const auto [def_throw, gap_throw] = block(throw_frame, "throw");
  const auto [def_arrival, gap_arrival] = block(arrival_frame, "arrival");
  if (gap_throw < 1e-6 || gap_arrival < 1e-6) return out;  // ambiguous nearest defender
  truth.nearest_defender_at_arrival = def_arrival;
  auto& cv = truth.covariates;
  cv[cov::kDeltaSpeed] = cv[cov::kRecSpeedArrival] - cv[cov::kRecSpeedThrow];
  cv[cov::kDeltaSeparation] = cv[cov::kSeparationArrival] - cv[cov::kSeparationThrow];
  cv[cov::kDeltaDirection] = wrap(cv[cov::kRecDirArrival] - cv[cov::kRecDirThrow]);
  cv[cov::kDeltaCumDist] = cv[cov::kCumDistArrival] - cv[cov::kCumDistThrow];
  cv[cov::kTimeSnapThrow] = (throw_frame - snap_frame) / kFrameRate;
  cv[cov::kTimeAir] = (arrival_frame - throw_frame) / kFrameRate;
  cv[cov::kTimeSnapArrival] = (arrival_frame - snap_frame) / kFrameRate;
  {
    const PlayMeta& m = play.meta;
    const int off = p.offense_is_home ? m.home_score_pre : m.visitor_score_pre;
    const int def = p.offense_is_home ? m.visitor_score_pre : m.home_score_pre;
    const int margin = off > def ? off - def : def - off;
    cv[cov::kSecondsLeftHalf] = (m.quarter % 2 == 1) ? m.clock_seconds + 900.0 : m.clock_seconds;
    cv[cov::kDown] = m.down;
    cv[cov::kYardsToGo] = m.yards_to_go;
    cv[cov::kOffenseLeading] = off > def ? 1.0 : 0.0;
    cv[cov::kScoreMargin] = margin == 0 ? 0.0 : (margin <= 8 ? 1.0 : 2.0);
  }

  truth.completion_probability = sigmoid(
      synthetic_completion_logit(cv[cov::kSeparationArrival], cv[cov::kRecBallArrival]));
  const bool caught = p.caught ? *p.caught : rng.uniform() < truth.completion_probability;
  play.meta.pass_result = caught ? PassResult::caught : PassResult::incomplete;
  play.timeline.outcome_tag = caught ? "pass_outcome_caught" : "pass_outcome_incomplete";
  for (auto& [id, track] : play.tracks) {
    track[static_cast<std::size_t>(arrival_frame - 1)].event_tag = play.timeline.outcome_tag;
  }
  play.targeted_receiver = truth.target;
  out.ok = true;
  return out;
}

}  // namespace

double synthetic_completion_logit(double separation_at_arrival, double receiver_ball_at_arrival) {
  return 1.5 + 0.8 * (separation_at_arrival - 2.0) - 1.5 * receiver_ball_at_arrival;
}

SyntheticPlay generate_synthetic_play(std::uint64_t seed, const SyntheticParams& params,
                                      const std::map<EntityId, double>& prior_distance) {
  if (params.route_count < 1) throw InputError("route_count must be at least 1");
  if (params.throw_time <= 0.0 || params.air_time <= 0.0) {
    throw InputError("throw and air times must be positive");
  }
  if (params.target_route && (*params.target_route < 0 || *params.target_route >= params.route_count)) {
    throw InputError("target_route out of range");
  }
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    Attempt a = try_generate(derive_seed(seed, attempt), params, prior_distance);
    if (a.ok) return std::move(a.result);
  }
  throw InputError("could not generate a valid synthetic play for these parameters");
}

std::vector<SyntheticPlay> generate_synthetic_game(std::uint64_t seed,
                                                  const SyntheticGameOptions& options) {
  Rng rng(seed);
  std::vector<SyntheticPlay> out;
  std::map<EntityId, double> running;
  for (int i = 0; i < options.plays; ++i) {
    SyntheticParams p = options.base;
    p.key = {options.game_id, i + 1};
    if (options.randomize_timing) {
      p.throw_time = 1.5 + 0.1 * static_cast<double>(rng.index(21));
      p.air_time = 0.5 + 0.1 * static_cast<double>(rng.index(21));
    }
    SyntheticPlay sp = generate_synthetic_play(rng.engine()(), p, running);
    for (const auto& [id, track] : sp.play.tracks) {
      if (id.is_ball()) continue;
      for (const auto& f : track) running[id] += f.step_distance;
    }
    out.push_back(std::move(sp));
  }
  return out;
}

SyntheticDataset generate_synthetic_dataset(std::uint64_t seed, int games, int plays_per_game,
                                            int route_count) {
  SyntheticDataset ds;
  for (int g = 0; g < games; ++g) {
    SyntheticGameOptions opt;
    opt.game_id = 2017090700 + g;
    opt.plays = plays_per_game;
    opt.base.route_count = route_count;
    opt.base.passer_id = 100 + (g % 4);
    opt.base.passer_name = "QB" + std::to_string(g % 4 + 1);
    opt.base.offense_is_home = (g % 2) == 0;
    auto plays = generate_synthetic_game(derive_seed(seed, static_cast<std::uint64_t>(g)), opt);
    for (auto& sp : plays) {
      ds.metas.push_back(sp.play.meta);
      auto& rows = ds.frames[sp.play.meta.key];
      for (const auto& [id, track] : sp.play.tracks) {
        rows.insert(rows.end(), track.begin(), track.end());
      }
      ds.plays.push_back(std::move(sp));
    }
  }
  return ds;
}

}  // namespace ehcp
