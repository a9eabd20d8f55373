#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ehcp/tracking.hpp"

namespace ehcp {

struct SyntheticParams {
  PlayKey key{1, 1};
  int route_count = 3;
  double throw_time = 2.5;  // seconds after the snap
  double air_time = 1.0;
  double noise_scale = 1.0;
  int pre_snap_frames = 10;
  int post_arrival_frames = 5;
  /// Route index thrown to; drawn from the seed when unset.
  std::optional<int> target_route;
  /// Forces the outcome; otherwise drawn from the generator's completion model.
  std::optional<bool> caught;
  bool offense_is_home = true;
  /// Nobody moves after the snap (ball included, apart from the throw).
  bool stationary = false;
  /// Ball lands exactly on the target when false.
  bool ball_landing_noise = true;
  std::int64_t passer_id = 100;
  std::string passer_name = "QB";
};

/// Values the generator knows by construction.
struct SyntheticTruth {
  EntityId target;
  EntityId passer;
  std::vector<EntityId> receivers;
  EntityId nearest_defender_at_arrival;
  /// Full covariate map of the targeted pass, computed from the generator's own paths.
  std::map<std::string, double> covariates;
  double completion_probability = 0.5;
};

struct SyntheticPlay {
  PlaySequence play;
  SyntheticTruth truth;
};

/// Deterministic in (seed, params). `prior_distance` seeds game-level cumulative distance.
SyntheticPlay generate_synthetic_play(std::uint64_t seed, const SyntheticParams& params,
                                      const std::map<EntityId, double>& prior_distance = {});

/// Log-odds of completion used by the generator to draw outcomes.
double synthetic_completion_logit(double separation_at_arrival, double receiver_ball_at_arrival);

struct SyntheticGameOptions {
  std::int64_t game_id = 1;
  int plays = 10;
  bool randomize_timing = true;
  SyntheticParams base;
};

/// Consecutive plays of one game (play ids 1..n) sharing players, so that
/// cumulative game distance accumulates across plays.
std::vector<SyntheticPlay> generate_synthetic_game(std::uint64_t seed, const SyntheticGameOptions& options);

/// A multi-game dataset with several passers, ready to be written as CSV.
struct SyntheticDataset {
  std::vector<SyntheticPlay> plays;
  FramesByPlay frames;
  std::vector<PlayMeta> metas;
};
SyntheticDataset generate_synthetic_dataset(std::uint64_t seed, int games, int plays_per_game,
                                            int route_count = 3);

}  // namespace ehcp
