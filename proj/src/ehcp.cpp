#include "ehcp/ehcp.hpp"

#include <cmath>

#include "ehcp/csv.hpp"
#include "ehcp/diagnostics.hpp"

namespace ehcp {

HypotheticalPass make_hypothetical(const PlaySequence& play, EntityId receiver, double t) {
  if (!(t >= 0.0)) throw ExtractionError("hypothetical throw time must be at or after the snap");
  const int frame = play.frame_at(t);
  if (!play.frame(receiver, frame)) {
    throw ExtractionError("receiver " + to_string(receiver) + " is not tracked at t=" + csv::format_double(t));
  }
  HypotheticalPass h;
  h.play = play.meta.key;
  h.receiver = receiver;
  h.t = (frame - play.timeline.snap_frame) / kFrameRate;
  h.observed = extract_throw_observables(play, receiver, frame);
  return h;
}

EhcpEstimate ehcp_estimate(const PosteriorModel& model, const std::map<std::string, double>& observed,
                           const DonorPool& pool, const ImputationRequest& request, std::uint64_t seed) {
  const auto imputations = sample_missing(pool, request, seed, &observed);
  EhcpEstimate e;
  e.m = imputations.size();
  e.mode = request.mode;
  e.seed = seed;
  e.draws.assign(model.draw_count(), 0.0);
  auto x = observed;
  std::size_t k = 0;
  for (const auto& block : imputations) {
    for (const auto& [name, value] : block) x[name] = value;
    const auto p = model.predict(x);
    ++k;
    // running mean keeps a constant input exactly constant
    for (std::size_t j = 0; j < p.size(); ++j) e.draws[j] += (p[j] - e.draws[j]) / static_cast<double>(k);
  }
  const PosteriorSummary s = summarize(e.draws);
  e.mean = s.mean;
  e.lower = s.lower;
  e.upper = s.upper;
  return e;
}

std::vector<double> trajectory_grid(double duration, double step) {
  if (!(step > 0.0)) throw InputError("grid step must be positive");
  if (duration < 0.0) throw InputError("grid duration must be nonnegative");
  const auto n = static_cast<std::size_t>(std::floor(duration / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) grid[k] = static_cast<double>(k) * step;
  return grid;
}

Trajectory route_trajectory(const PosteriorModel& model, const PlaySequence& play, EntityId receiver,
                            std::span<const double> grid, const DonorPool& pool,
                            const ImputationRequest& request, std::uint64_t seed) {
  Trajectory tr;
  tr.receiver = receiver;
  if (const Track* track = play.track(receiver)) tr.name = track->front().display_name;
  for (double t : grid) {
    HypotheticalPass h;
    try {
      h = make_hypothetical(play, receiver, t);
    } catch (const ExtractionError& e) {
      tr.notices.push_back("skipped t=" + csv::format_double(t) + ": " + e.what());
      continue;
    }
    tr.points.push_back({t, ehcp_estimate(model, h.observed, pool, request, seed)});
  }
  return tr;
}

nlohmann::json to_json(const EhcpEstimate& e, bool include_draws) {
  nlohmann::json j = {{"mean", e.mean}, {"lower", e.lower}, {"upper", e.upper},
                      {"imputations", e.m}, {"mode", to_string(e.mode)}, {"seed", e.seed}};
  if (include_draws) j["draws"] = e.draws;
  return j;
}

nlohmann::json play_report(const PosteriorModel& model, const PlaySequence& play, const DonorPool& pool,
                           const PlayReportConfig& config) {
  const auto& tl = play.timeline;
  const auto grid = trajectory_grid(tl.snap_to_arrival(), config.step);
  nlohmann::json report;
  report["game_id"] = play.meta.key.game_id;
  report["play_id"] = play.meta.key.play_id;
  report["description"] = play.meta.description;
  report["model"] = to_string(model.kind());
  report["seed"] = config.seed;
  report["imputations"] = config.imputation.m;
  report["mode"] = to_string(config.imputation.mode);
  report["step"] = config.step;
  report["snap_to_throw"] = tl.snap_to_throw();
  report["snap_to_arrival"] = tl.snap_to_arrival();
  nlohmann::json receivers = nlohmann::json::array();
  for (EntityId id : play.route_runners()) {
    const Trajectory tr = route_trajectory(model, play, id, grid, pool, config.imputation, config.seed);
    nlohmann::json r = {{"id", id.value},
                        {"name", tr.name},
                        {"targeted", play.targeted_receiver && *play.targeted_receiver == id}};
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : tr.points) {
      pts.push_back({{"t", p.t}, {"mean", p.estimate.mean}, {"lower", p.estimate.lower}, {"upper", p.estimate.upper}});
    }
    r["trajectory"] = std::move(pts);
    r["notices"] = tr.notices;
    receivers.push_back(std::move(r));
  }
  report["receivers"] = std::move(receivers);

  if (play.targeted_receiver) {
    const EntityId target = *play.targeted_receiver;
    const PassFeatureVector fv = extract_pass_features(play, target);
    const PosteriorSummary fitted = summarize(model.predict(fv.values));
    const HypotheticalPass at_throw = make_hypothetical(play, target, tl.snap_to_throw());
    const EhcpEstimate e = ehcp_estimate(model, at_throw.observed, pool, config.imputation, config.seed);
    report["actual_pass"] = {{"receiver", target.value},
                             {"caught", fv.y},
                             {"throw_time", tl.snap_to_throw()},
                             {"fitted", {{"mean", fitted.mean}, {"lower", fitted.lower}, {"upper", fitted.upper}}},
                             {"ehcp_at_throw", to_json(e)}};
  }
  return report;
}

}  // namespace ehcp
