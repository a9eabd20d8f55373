#include "ehcp/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "ehcp/csv.hpp"
#include "ehcp/diagnostics.hpp"
#include "ehcp/ehcp.hpp"

namespace ehcp {

using nlohmann::json;

namespace {

struct FieldErrors {
  json list = json::array();
  void add(const std::string& field, const std::string& message) {
    list.push_back({{"field", field}, {"message", message}});
  }
  bool empty() const { return list.empty(); }
};

ServiceResponse unprocessable(const FieldErrors& e) { return {422, {{"errors", e.list}}}; }
ServiceResponse error(int status, const std::string& message) { return {status, {{"error", message}}}; }

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string p;
  while (std::getline(ss, p, '/')) {
    if (!p.empty()) parts.push_back(p);
  }
  return parts;
}

std::optional<std::int64_t> to_int(const std::string& s) {
  auto v = csv::parse_int(s);
  if (!v) return std::nullopt;
  return *v;
}

json histogram(const std::vector<double>& draws, int bins = 20) {
  std::vector<double> edges;
  for (int k = 0; k <= bins; ++k) edges.push_back(static_cast<double>(k) / bins);
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double d : draws) {
    auto b = static_cast<int>(std::floor(d * bins));
    b = std::clamp(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  return {{"edges", edges}, {"counts", counts}};
}

std::uint64_t model_seed(const ModelFile& m) {
  return m.model.kind() == ModelKind::logistic ? m.options.logistic.seed : m.options.bart.seed;
}

}  // namespace

EhcpService::EhcpService(ModelFile model, DataBundle data, ServiceDefaults defaults)
    : model_(std::move(model)), data_(std::move(data)), defaults_(defaults),
      partition_(partition_schema(model_.schema)) {}

ServiceResponse EhcpService::handle(const std::string& method, const std::string& path,
                                    const std::map<std::string, std::string>& query,
                                    const std::string& body) const {
  const auto parts = split_path(path);
  try {
    if (method == "GET") {
      if (parts.size() == 1 && parts[0] == "plays") return list_plays();
      if ((parts.size() == 3 || (parts.size() == 4 && parts[3] == "trajectories")) && parts[0] == "plays") {
        const auto g = to_int(parts[1]);
        const auto p = to_int(parts[2]);
        const PlaySequence* play = (g && p) ? data_.find({*g, *p}) : nullptr;
        if (!play) return error(404, "unknown play " + parts[1] + "/" + parts[2]);
        return parts.size() == 3 ? get_play(*play) : trajectories(*play, query);
      }
      if (parts.size() == 1 && parts[0] == "model") return model_info();
      if (parts.size() == 2 && parts[0] == "model" && parts[1] == "importance") return importance();
      if (parts.size() == 2 && parts[0] == "model" && parts[1] == "pdp") return pdp(query);
    } else if (method == "POST" && parts.size() == 1 && (parts[0] == "whatif" || parts[0] == "predict")) {
      json j;
      try {
        j = json::parse(body);
      } catch (const json::parse_error& e) {
        return error(400, std::string("request body is not valid JSON: ") + e.what());
      }
      if (!j.is_object()) return error(400, "request body must be a JSON object");
      return parts[0] == "whatif" ? whatif(j) : predict(j);
    }
    return error(404, "no route for " + method + " " + path);
  } catch (const InputError& e) {
    return error(422, e.what());
  }
}

ServiceResponse EhcpService::list_plays() const {
  json plays = json::array();
  for (const auto& p : data_.plays) {
    json r = {{"game_id", p.meta.key.game_id}, {"play_id", p.meta.key.play_id}, {"description", p.meta.description}};
    r["target"] = p.targeted_receiver ? json(p.targeted_receiver->value) : json(nullptr);
    r["passer"] = p.passer ? json(p.passer->value) : json(nullptr);
    json rr = json::array();
    for (EntityId id : p.route_runners()) rr.push_back(id.value);
    r["receivers"] = rr;
    plays.push_back(std::move(r));
  }
  return {200, {{"plays", plays}, {"seed", model_seed(model_)}}};
}

ServiceResponse EhcpService::get_play(const PlaySequence& play) const {
  json tracks = json::array();
  for (const auto& [id, track] : play.tracks) {
    const auto& first = track.front();
    json frames = json::array();
    for (const auto& f : track) {
      frames.push_back({{"frame", f.frame_index}, {"t", (f.frame_index - play.timeline.snap_frame) / kFrameRate},
                        {"x", f.x}, {"y", f.y}, {"s", f.speed}, {"dir", f.direction},
                        {"event", f.event_tag}});
    }
    tracks.push_back({{"id", id.is_ball() ? json(nullptr) : json(id.value)},
                      {"ball", id.is_ball()},
                      {"name", first.display_name},
                      {"position", first.position},
                      {"side", play.is_offense(id) ? "offense" : (play.is_defense(id) ? "defense" : "ball")},
                      {"frames", frames}});
  }
  json receivers = json::array();
  for (EntityId id : play.route_runners()) {
    receivers.push_back({{"id", id.value},
                         {"name", play.track(id)->front().display_name},
                         {"targeted", play.targeted_receiver && *play.targeted_receiver == id}});
  }
  const auto& tl = play.timeline;
  json timeline = {{"snap_frame", tl.snap_frame},   {"throw_frame", tl.throw_frame},
                   {"arrival_frame", tl.arrival_frame}, {"snap_to_throw", tl.snap_to_throw()},
                   {"snap_to_arrival", tl.snap_to_arrival()}, {"outcome", tl.outcome_tag}};
  return {200,
          {{"game_id", play.meta.key.game_id},
           {"play_id", play.meta.key.play_id},
           {"description", play.meta.description},
           {"timeline", timeline},
           {"receivers", receivers},
           {"tracks", tracks},
           {"seed", model_seed(model_)}}};
}

ServiceResponse EhcpService::trajectories(const PlaySequence& play,
                                          const std::map<std::string, std::string>& query) const {
  PlayReportConfig cfg;
  cfg.step = defaults_.grid_step;
  cfg.imputation.m = defaults_.imputations;
  cfg.imputation.mode = defaults_.mode;
  cfg.seed = defaults_.seed;
  FieldErrors errs;
  if (auto it = query.find("step"); it != query.end()) {
    auto v = csv::parse_double(it->second);
    if (!v || !(*v > 0.0)) errs.add("step", "must be a positive number of seconds");
    else cfg.step = *v;
  }
  if (auto it = query.find("m"); it != query.end()) {
    auto v = csv::parse_int(it->second);
    if (!v || *v < 1) errs.add("m", "must be a positive integer");
    else cfg.imputation.m = static_cast<std::size_t>(*v);
  }
  if (auto it = query.find("mode"); it != query.end()) {
    try {
      cfg.imputation.mode = parse_imputation_mode(it->second);
    } catch (const InputError& e) {
      errs.add("mode", e.what());
    }
  }
  if (auto it = query.find("seed"); it != query.end()) {
    auto v = csv::parse_int(it->second);
    if (!v || *v < 0) errs.add("seed", "must be a nonnegative integer");
    else cfg.seed = static_cast<std::uint64_t>(*v);
  }
  if (!errs.empty()) return unprocessable(errs);
  json report = play_report(model_.model, play, data_.pool, cfg);
  report["model_seed"] = model_seed(model_);
  return {200, report};
}

namespace {

struct WhatIfRequest {
  PlayKey play;
  EntityId receiver;
  double t = 0.0;
  ImputationRequest imputation;
  std::uint64_t seed = 1;
};

}  // namespace

ServiceResponse EhcpService::whatif(const json& body) const {
  FieldErrors errs;
  WhatIfRequest req;
  req.imputation.m = defaults_.imputations;
  req.imputation.mode = defaults_.mode;
  req.seed = defaults_.seed;
  auto need_int = [&](const char* field) -> std::optional<std::int64_t> {
    if (!body.contains(field)) {
      errs.add(field, "required");
      return std::nullopt;
    }
    if (!body[field].is_number_integer()) {
      errs.add(field, "must be an integer");
      return std::nullopt;
    }
    return body[field].get<std::int64_t>();
  };
  const auto g = need_int("game_id");
  const auto p = need_int("play_id");
  const auto r = need_int("receiver");
  if (!body.contains("t")) errs.add("t", "required");
  else if (!body["t"].is_number()) errs.add("t", "must be a number");
  else req.t = body["t"].get<double>();
  if (body.contains("m")) {
    if (!body["m"].is_number_integer() || body["m"].get<std::int64_t>() < 1) errs.add("m", "must be a positive integer");
    else req.imputation.m = body["m"].get<std::size_t>();
  }
  if (body.contains("mode")) {
    try {
      req.imputation.mode = parse_imputation_mode(body["mode"].is_string() ? body["mode"].get<std::string>() : "");
    } catch (const InputError& e) {
      errs.add("mode", e.what());
    }
  }
  if (body.contains("seed")) {
    if (!body["seed"].is_number_unsigned()) errs.add("seed", "must be a nonnegative integer");
    else req.seed = body["seed"].get<std::uint64_t>();
  }
  if (body.contains("without_replacement")) {
    if (!body["without_replacement"].is_boolean()) errs.add("without_replacement", "must be a boolean");
    else req.imputation.without_replacement = body["without_replacement"].get<bool>();
  }
  if (body.contains("pinning")) {
    if (!body["pinning"].is_object()) {
      errs.add("pinning", "must be an object of covariate -> number");
    } else {
      for (const auto& [key, value] : body["pinning"].items()) {
        if (!partition_.is_missing(key)) errs.add("pinning." + key, "not an unobservable covariate");
        else if (!value.is_number()) errs.add("pinning." + key, "must be a number");
        else req.imputation.pinning[key] = value.get<double>();
      }
    }
  }
  if (!g || !p) return unprocessable(errs);
  const PlaySequence* play = data_.find({*g, *p});
  if (!play) return error(404, "unknown play " + std::to_string(*g) + "/" + std::to_string(*p));
  if (!errs.empty()) return unprocessable(errs);
  req.play = {*g, *p};
  req.receiver = EntityId{*r};
  if (!play->is_offense(req.receiver) || (play->passer && *play->passer == req.receiver)) {
    errs.add("receiver", "not an eligible offensive player on this play");
    return unprocessable(errs);
  }
  if (req.imputation.without_replacement && req.imputation.m > data_.pool.size()) {
    errs.add("m", "exceeds the donor pool size (" + std::to_string(data_.pool.size()) + ") without replacement");
    return unprocessable(errs);
  }
  HypotheticalPass h;
  try {
    h = make_hypothetical(*play, req.receiver, req.t);
  } catch (const ExtractionError& e) {
    errs.add("t", e.what());
    return unprocessable(errs);
  }
  const EhcpEstimate e = ehcp_estimate(model_.model, h.observed, data_.pool, req.imputation, req.seed);
  json out = to_json(e, true);
  out["histogram"] = histogram(e.draws);
  out["game_id"] = req.play.game_id;
  out["play_id"] = req.play.play_id;
  out["receiver"] = req.receiver.value;
  out["t"] = h.t;
  out["pinning"] = req.imputation.pinning;
  out["without_replacement"] = req.imputation.without_replacement;
  out["observed"] = h.observed;
  out["model_seed"] = model_seed(model_);
  return {200, out};
}

ServiceResponse EhcpService::predict(const json& body) const {
  FieldErrors errs;
  std::map<std::string, double> x;
  if (body.contains("game_id") || body.contains("play_id") || body.contains("receiver") || body.contains("t")) {
    for (const char* f : {"game_id", "play_id", "receiver"}) {
      if (!body.contains(f) || !body[f].is_number_integer()) errs.add(f, "integer required with a play selector");
    }
    if (!body.contains("t") || !body["t"].is_number()) errs.add("t", "number required with a play selector");
    if (!errs.empty()) return unprocessable(errs);
    const PlaySequence* play = data_.find({body["game_id"].get<std::int64_t>(), body["play_id"].get<std::int64_t>()});
    if (!play) return error(404, "unknown play");
    try {
      x = make_hypothetical(*play, EntityId{body["receiver"].get<std::int64_t>()}, body["t"].get<double>()).observed;
    } catch (const ExtractionError& e) {
      errs.add("t", e.what());
      return unprocessable(errs);
    }
  }
  if (body.contains("values")) {
    if (!body["values"].is_object()) {
      errs.add("values", "must be an object of covariate -> number");
    } else {
      for (const auto& [key, value] : body["values"].items()) {
        if (!model_.schema.index_of(key)) errs.add("values." + key, "unknown covariate");
        else if (!value.is_number()) errs.add("values." + key, "must be a number");
        else x[key] = value.get<double>();
      }
    }
  }
  if (!errs.empty()) return unprocessable(errs);
  for (const auto& name : model_.schema.names()) {
    if (!x.count(name)) errs.add("values." + name, "missing covariate");
  }
  if (!errs.empty()) return unprocessable(errs);
  const auto draws = model_.model.predict(x);
  const PosteriorSummary s = summarize(draws);
  return {200,
          {{"mean", s.mean}, {"lower", s.lower}, {"upper", s.upper}, {"draws", draws},
           {"histogram", histogram(draws)}, {"values", x}, {"seed", model_seed(model_)}}};
}

ServiceResponse EhcpService::model_info() const {
  json cfg = model_file_to_json(model_)["config"];
  return {200,
          {{"kind", to_string(model_.model.kind())},
           {"draws", model_.model.draw_count()},
           {"schema", model_.schema.names()},
           {"observable", partition_.observable},
           {"missing", partition_.missing},
           {"config", cfg},
           {"dataset_fingerprint", model_.fingerprint},
           {"defaults",
            {{"imputations", defaults_.imputations}, {"mode", to_string(defaults_.mode)},
             {"grid_step", defaults_.grid_step}, {"seed", defaults_.seed}}},
           {"seed", model_seed(model_)}}};
}

ServiceResponse EhcpService::importance() const {
  const auto* b = std::get_if<BartPosterior>(&model_.model.posterior);
  if (!b) return error(422, "splitting importance is only defined for BART models");
  json rows = json::array();
  for (const auto& v : splitting_importance(*b)) rows.push_back({{"name", v.name}, {"split_probability", v.split_probability}});
  return {200, {{"importance", rows}, {"seed", model_seed(model_)}}};
}

ServiceResponse EhcpService::pdp(const std::map<std::string, std::string>& query) const {
  FieldErrors errs;
  auto it = query.find("variable");
  if (it == query.end()) {
    errs.add("variable", "required");
    return unprocessable(errs);
  }
  const std::string variable = it->second;
  if (!model_.schema.index_of(variable)) {
    errs.add("variable", "unknown covariate '" + variable + "'");
    return unprocessable(errs);
  }
  int points = 20;
  if (auto pt = query.find("points"); pt != query.end()) {
    auto v = csv::parse_int(pt->second);
    if (!v || *v < 2 || *v > 1000) errs.add("points", "must be an integer in [2, 1000]");
    else points = static_cast<int>(*v);
  }
  const PassFeatureVector* base = &data_.features.front();
  if (query.count("game_id") || query.count("play_id")) {
    auto g = to_int(query.count("game_id") ? query.at("game_id") : "");
    auto p = to_int(query.count("play_id") ? query.at("play_id") : "");
    base = nullptr;
    if (g && p) {
      for (const auto& f : data_.features) {
        if (f.play == PlayKey{*g, *p}) base = &f;
      }
    }
    if (!base) errs.add("play_id", "no pass with features for that play");
  }
  if (!errs.empty()) return unprocessable(errs);
  const auto grid = default_pdp_grid(model_.schema, data_.features, variable, points);
  json pts = json::array();
  for (const auto& pt : partial_dependence(model_.model, base->values, variable, grid)) {
    pts.push_back({{"value", pt.value}, {"mean", pt.mean}, {"lower", pt.lower}, {"upper", pt.upper}});
  }
  return {200,
          {{"variable", variable},
           {"base", {{"game_id", base->play.game_id}, {"play_id", base->play.play_id}, {"receiver", base->receiver.value}}},
           {"points", pts},
           {"seed", model_seed(model_)}}};
}

struct HttpServer::Impl {
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(const EhcpService& service) : impl_(std::make_unique<Impl>()) {
  auto dispatch = [&service](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    const ServiceResponse r = service.handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  impl_->server.Get(".*", dispatch);
  impl_->server.Post(".*", dispatch);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ehcp
