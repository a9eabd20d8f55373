#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ehcp/imputation.hpp"
#include "ehcp/model.hpp"
#include <json.hpp>

namespace ehcp {

/// A pass that was not thrown: receiver `receiver` at `t` seconds after the snap.
struct HypotheticalPass {
  PlayKey play;
  EntityId receiver;
  double t = 0.0;
  std::map<std::string, double> observed;  // throw-phase + situational
};

/// Reads observables from tracking at the frame nearest `t`.
/// Throws ExtractionError when t is before the snap or the receiver is untracked.
HypotheticalPass make_hypothetical(const PlaySequence& play, EntityId receiver, double t);

struct EhcpEstimate {
  std::vector<double> draws;  // one per posterior draw
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t m = 0;
  ImputationMode mode = ImputationMode::joint;
  std::uint64_t seed = 0;
};

/// EHCP_j = mean over imputations of F_j(x_obs, x_miss^(k)); the imputations are
/// drawn once from `seed` and shared by all posterior draws.
EhcpEstimate ehcp_estimate(const PosteriorModel& model, const std::map<std::string, double>& observed,
                           const DonorPool& pool, const ImputationRequest& request, std::uint64_t seed);

/// Times 0, step, 2*step, ... up to `duration`: floor(duration/step) + 1 points.
std::vector<double> trajectory_grid(double duration, double step);

struct TrajectoryPoint {
  double t = 0.0;
  EhcpEstimate estimate;
};

struct Trajectory {
  EntityId receiver;
  std::string name;
  std::vector<TrajectoryPoint> points;
  std::vector<std::string> notices;  // skipped grid times
};

Trajectory route_trajectory(const PosteriorModel& model, const PlaySequence& play, EntityId receiver,
                            std::span<const double> grid, const DonorPool& pool,
                            const ImputationRequest& request, std::uint64_t seed);

struct PlayReportConfig {
  double step = 0.5;
  ImputationRequest imputation;
  std::uint64_t seed = 1;
};

/// Per-receiver trajectories plus the fitted probability of the actual pass.
nlohmann::json play_report(const PosteriorModel& model, const PlaySequence& play, const DonorPool& pool,
                           const PlayReportConfig& config);

nlohmann::json to_json(const EhcpEstimate& e, bool include_draws = false);

}  // namespace ehcp
