#include "ehcp/features.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "ehcp/csv.hpp"

namespace ehcp {

CovariateSchema::CovariateSchema(std::vector<CovariateDescriptor> covariates)
    : covariates_(std::move(covariates)) {
  std::set<std::string> seen;
  for (const auto& c : covariates_) {
    if (!seen.insert(c.name).second) throw InputError("duplicate covariate name " + c.name);
    if (c.kind == CovariateKind::categorical && c.levels.size() < 2) {
      throw InputError("categorical covariate " + c.name + " needs at least two levels");
    }
  }
}

const CovariateSchema& CovariateSchema::standard() {
  static const CovariateSchema schema = [] {
    std::vector<CovariateDescriptor> out;
    auto phase_block = [&](const std::string& suffix, Phase phase, bool observable) {
      auto add = [&](const std::string& stem, int group) {
        out.push_back({stem + "_" + suffix, CovariateKind::continuous, phase, observable, {},
                       observable ? 0 : group});
      };
      add("rec_speed", 1);
      add("rec_dir", 1);
      for (const char* pair : {"rec_def", "rec_ball", "def_ball"}) {
        for (const char* axis : {"euc", "hor", "ver"}) add(std::string(pair) + "_" + axis, 2);
      }
      add("rec_cum_dist", 3);
    };
    phase_block("throw", Phase::throw_time, true);
    phase_block("arrival", Phase::arrival, false);
    for (const char* name : {cov::kDeltaSpeed, cov::kDeltaSeparation, cov::kDeltaDirection,
                             cov::kDeltaCumDist}) {
      out.push_back({name, CovariateKind::continuous, Phase::delta, false, {}, 5});
    }
    out.push_back({cov::kTimeSnapThrow, CovariateKind::continuous, Phase::timing, true, {}, 0});
    out.push_back({cov::kTimeAir, CovariateKind::continuous, Phase::timing, false, {}, 4});
    out.push_back({cov::kTimeSnapArrival, CovariateKind::continuous, Phase::timing, false, {}, 4});
    out.push_back({cov::kSecondsLeftHalf, CovariateKind::continuous, Phase::situational, true, {}, 0});
    out.push_back({cov::kDown, CovariateKind::categorical, Phase::situational, true, {1, 2, 3, 4}, 0});
    out.push_back({cov::kYardsToGo, CovariateKind::continuous, Phase::situational, true, {}, 0});
    out.push_back({cov::kOffenseLeading, CovariateKind::binary, Phase::situational, true, {}, 0});
    out.push_back({cov::kScoreMargin, CovariateKind::categorical, Phase::situational, true,
                   {0, 1, 2}, 0});
    return CovariateSchema(std::move(out));
  }();
  return schema;
}

std::optional<std::size_t> CovariateSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < covariates_.size(); ++i) {
    if (covariates_[i].name == name) return i;
  }
  return std::nullopt;
}

const CovariateDescriptor& CovariateSchema::at(const std::string& name) const {
  auto i = index_of(name);
  if (!i) throw InputError("unknown covariate " + name);
  return covariates_[*i];
}

std::vector<std::string> CovariateSchema::names() const {
  std::vector<std::string> out;
  for (const auto& c : covariates_) out.push_back(c.name);
  return out;
}

std::string to_string(MarginCategory c) {
  switch (c) {
    case MarginCategory::tied: return "0";
    case MarginCategory::one_score: return "1-8";
    case MarginCategory::multi_score: return "9+";
  }
  return "?";
}

double PassFeatureVector::at(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw InputError("missing covariate " + name);
  return it->second;
}

PairwiseDistance pairwise_distances(Point a, Point b) {
  const double h = std::fabs(a.x - b.x);
  const double v = std::fabs(a.y - b.y);
  return {std::hypot(h, v), h, v};
}

NearestDefender nearest_defender(const PlaySequence& play, EntityId receiver, int frame_index) {
  const TrackingFrame* rec = play.frame(receiver, frame_index);
  if (!rec) {
    throw ExtractionError("receiver " + to_string(receiver) + " untracked at frame " +
                          std::to_string(frame_index));
  }
  std::optional<NearestDefender> best;
  for (EntityId id : play.defense()) {
    const TrackingFrame* f = play.frame(id, frame_index);
    if (!f) continue;
    const double d = std::hypot(f->x - rec->x, f->y - rec->y);
    if (!best || d < best->distance || (d == best->distance && id < best->id)) best = {id, d};
  }
  if (!best) throw ExtractionError("no defenders tracked at frame " + std::to_string(frame_index));
  return *best;
}

double cumulative_distance(const Track& track, int up_to_frame) {
  double total = 0.0;
  for (const auto& f : track) {
    if (f.frame_index > up_to_frame) break;
    total += f.step_distance;
  }
  return total;
}

double game_cumulative_distance(const PlaySequence& play, EntityId id, int up_to_frame) {
  const Track* t = play.track(id);
  if (!t) throw ExtractionError("entity " + to_string(id) + " untracked");
  double prior = 0.0;
  if (auto it = play.prior_game_distance.find(id); it != play.prior_game_distance.end()) {
    prior = it->second;
  }
  return prior + cumulative_distance(*t, up_to_frame);
}

double seconds_left_in_half(int quarter, double clock_seconds) {
  // quarters are 15 minutes; overtime counts as its own period
  if (quarter == 1 || quarter == 3) return clock_seconds + 900.0;
  return clock_seconds;
}

std::map<std::string, double> situational_covariates(const PlayMeta& meta) {
  const bool home = meta.offense_is_home.value_or(true);
  const int offense = home ? meta.home_score_pre : meta.visitor_score_pre;
  const int defense = home ? meta.visitor_score_pre : meta.home_score_pre;
  const int margin = std::abs(offense - defense);
  MarginCategory cat = MarginCategory::tied;
  if (margin >= 9) cat = MarginCategory::multi_score;
  else if (margin >= 1) cat = MarginCategory::one_score;
  return {
      {cov::kSecondsLeftHalf, seconds_left_in_half(meta.quarter, meta.clock_seconds)},
      {cov::kDown, static_cast<double>(meta.down)},
      {cov::kYardsToGo, meta.yards_to_go},
      {cov::kOffenseLeading, offense > defense ? 1.0 : 0.0},
      {cov::kScoreMargin, static_cast<double>(cat)},
  };
}

double wrap_degrees(double delta) {
  double d = std::fmod(delta, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

namespace {

// The twelve per-phase covariates for `receiver` at `frame_index`.
void phase_block(const PlaySequence& play, EntityId receiver, int frame_index,
                 const std::string& suffix, std::map<std::string, double>& out) {
  const TrackingFrame* rec = play.frame(receiver, frame_index);
  if (!rec) {
    throw ExtractionError("receiver " + to_string(receiver) + " untracked at frame " +
                          std::to_string(frame_index));
  }
  const TrackingFrame* ball = play.frame(EntityId::ball(), frame_index);
  if (!ball) throw ExtractionError("ball untracked at frame " + std::to_string(frame_index));
  const NearestDefender nd = nearest_defender(play, receiver, frame_index);
  const TrackingFrame* def = play.frame(nd.id, frame_index);

  auto put = [&](const std::string& stem, PairwiseDistance d) {
    out[stem + "_euc_" + suffix] = d.euclidean;
    out[stem + "_hor_" + suffix] = d.horizontal;
    out[stem + "_ver_" + suffix] = d.vertical;
  };
  out["rec_speed_" + suffix] = rec->speed;
  out["rec_dir_" + suffix] = rec->direction;
  put("rec_def", pairwise_distances({rec->x, rec->y}, {def->x, def->y}));
  put("rec_ball", pairwise_distances({rec->x, rec->y}, {ball->x, ball->y}));
  put("def_ball", pairwise_distances({def->x, def->y}, {ball->x, ball->y}));
  out["rec_cum_dist_" + suffix] = game_cumulative_distance(play, receiver, frame_index);
}

}  // namespace

std::map<std::string, double> extract_throw_observables(const PlaySequence& play, EntityId receiver,
                                                        int frame_index) {
  std::map<std::string, double> out = situational_covariates(play.meta);
  phase_block(play, receiver, frame_index, "throw", out);
  out[cov::kTimeSnapThrow] = (frame_index - play.timeline.snap_frame) / kFrameRate;
  return out;
}

PassFeatureVector extract_pass_features(const PlaySequence& play, EntityId receiver) {
  const EventTimeline& tl = play.timeline;
  PassFeatureVector fv;
  fv.play = play.meta.key;
  fv.receiver = receiver;
  fv.y = (play.targeted_receiver && *play.targeted_receiver == receiver &&
          play.meta.pass_result == PassResult::caught)
             ? 1
             : 0;
  fv.values = extract_throw_observables(play, receiver, tl.throw_frame);
  phase_block(play, receiver, tl.arrival_frame, "arrival", fv.values);
  auto& v = fv.values;
  v[cov::kDeltaSpeed] = v[cov::kRecSpeedArrival] - v[cov::kRecSpeedThrow];
  v[cov::kDeltaSeparation] = v[cov::kSeparationArrival] - v[cov::kSeparationThrow];
  v[cov::kDeltaDirection] = wrap_degrees(v[cov::kRecDirArrival] - v[cov::kRecDirThrow]);
  v[cov::kDeltaCumDist] = v[cov::kCumDistArrival] - v[cov::kCumDistThrow];
  v[cov::kTimeAir] = tl.air_time();
  v[cov::kTimeSnapArrival] = tl.snap_to_arrival();
  return fv;
}

ExtractionResult extract_dataset(const std::vector<PlaySequence>& plays) {
  ExtractionResult out;
  for (const auto& p : plays) {
    if (!p.targeted_receiver) {
      out.excluded.push_back({p.meta.key, "no target"});
      continue;
    }
    try {
      out.rows.push_back(extract_pass_features(p, *p.targeted_receiver));
    } catch (const ExtractionError& e) {
      out.excluded.push_back({p.meta.key, e.what()});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<DesignColumn> expand_columns(const CovariateSchema& schema) {
  std::vector<DesignColumn> cols;
  for (const auto& c : schema.covariates()) {
    switch (c.kind) {
      case CovariateKind::continuous:
        cols.push_back({c.name, c.name, true, std::nullopt});
        break;
      case CovariateKind::binary:
        cols.push_back({c.name, c.name, false, std::nullopt});
        break;
      case CovariateKind::categorical:
        for (std::size_t l = 1; l < c.levels.size(); ++l) {
          std::ostringstream name;
          name << c.name << "_" << c.levels[l];
          cols.push_back({name.str(), c.name, false, c.levels[l]});
        }
        break;
    }
  }
  return cols;
}

double expanded_value(const DesignColumn& col, const std::map<std::string, double>& values) {
  auto it = values.find(col.source);
  if (it == values.end()) throw InputError("missing covariate " + col.source);
  if (col.level) return it->second == *col.level ? 1.0 : 0.0;
  return it->second;
}

DesignMatrix expand_design(const CovariateSchema& schema, const std::vector<PassFeatureVector>& rows) {
  DesignMatrix m;
  m.columns = expand_columns(schema);
  m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < m.columns.size(); ++j) {
      m.values(i, j) = expanded_value(m.columns[j], rows[i].values);
    }
  }
  return m;
}

std::vector<std::string> StandardizationParams::names() const {
  std::vector<std::string> out;
  for (const auto& c : columns) out.push_back(c.column.name);
  return out;
}

StandardizationParams standardize_fit(const DesignMatrix& raw) {
  StandardizationParams params;
  const auto n = raw.values.rows();
  if (n == 0) throw InputError("cannot standardize an empty design");
  for (std::size_t j = 0; j < raw.columns.size(); ++j) {
    const auto col = raw.values.col(static_cast<Eigen::Index>(j));
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (!(sd > 0.0)) {
      params.dropped.push_back(raw.columns[j].name);
      continue;
    }
    params.columns.push_back({raw.columns[j], mean, raw.columns[j].continuous ? sd : 1.0});
  }
  return params;
}

namespace {

double scale(const StandardizedColumn& c, double x) {
  return c.column.continuous ? (x - c.mean) / (2.0 * c.sd) : x - c.mean;
}

}  // namespace

Eigen::VectorXd standardize_apply(const StandardizationParams& params,
                                  const std::map<std::string, double>& values) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(params.columns.size()));
  for (std::size_t j = 0; j < params.columns.size(); ++j) {
    const auto& c = params.columns[j];
    z(j) = scale(c, expanded_value(c.column, values));
  }
  return z;
}

DesignMatrix standardize_apply(const StandardizationParams& params, const DesignMatrix& raw) {
  DesignMatrix out;
  out.values.resize(raw.values.rows(), static_cast<Eigen::Index>(params.columns.size()));
  for (std::size_t j = 0; j < params.columns.size(); ++j) {
    const auto& c = params.columns[j];
    std::optional<std::size_t> src;
    for (std::size_t k = 0; k < raw.columns.size(); ++k) {
      if (raw.columns[k].name == c.column.name) src = k;
    }
    if (!src) throw InputError("design lacks column " + c.column.name);
    for (Eigen::Index i = 0; i < raw.values.rows(); ++i) {
      out.values(i, j) = scale(c, raw.values(i, *src));
    }
    out.columns.push_back(c.column);
  }
  return out;
}

Eigen::VectorXd standardize_invert(const StandardizationParams& params, const Eigen::VectorXd& z) {
  Eigen::VectorXd x(z.size());
  for (std::size_t j = 0; j < params.columns.size(); ++j) {
    const auto& c = params.columns[j];
    x(j) = c.column.continuous ? z(j) * 2.0 * c.sd + c.mean : z(j) + c.mean;
  }
  return x;
}

void write_design_csv(std::ostream& out, const CovariateSchema& schema,
                      const std::vector<PassFeatureVector>& rows) {
  std::vector<std::string> header = {"gameId", "playId", "receiver", "y"};
  for (const auto& n : schema.names()) header.push_back(n);
  csv::write_row(out, header);
  for (const auto& r : rows) {
    std::vector<std::string> f = {std::to_string(r.play.game_id), std::to_string(r.play.play_id),
                                  std::to_string(r.receiver.value), std::to_string(r.y)};
    for (const auto& c : schema.covariates()) f.push_back(csv::format_double(r.at(c.name)));
    csv::write_row(out, f);
  }
}

std::vector<PassFeatureVector> read_design_csv(std::istream& in, const CovariateSchema& schema) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || header->fields.size() != schema.size() + 4) {
    throw InputError("design file header does not match the covariate schema");
  }
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (header->fields[j + 4] != schema.covariates()[j].name) {
      throw InputError("design column " + header->fields[j + 4] + " does not match schema name " +
                       schema.covariates()[j].name);
    }
  }
  std::vector<PassFeatureVector> rows;
  while (auto rec = reader.next()) {
    if (rec->fields.size() != header->fields.size()) {
      throw InputError("design line " + std::to_string(rec->line) + ": wrong field count");
    }
    PassFeatureVector fv;
    auto g = csv::parse_int(rec->fields[0]);
    auto p = csv::parse_int(rec->fields[1]);
    auto r = csv::parse_int(rec->fields[2]);
    auto y = csv::parse_int(rec->fields[3]);
    if (!g || !p || !r || !y) throw InputError("design line " + std::to_string(rec->line) + ": bad key");
    fv.play = {*g, *p};
    fv.receiver = EntityId{*r};
    fv.y = static_cast<int>(*y);
    for (std::size_t j = 0; j < schema.size(); ++j) {
      auto v = csv::parse_double(rec->fields[j + 4]);
      if (!v) {
        throw InputError("design line " + std::to_string(rec->line) + ": bad value for " +
                         schema.covariates()[j].name);
      }
      fv.values[schema.covariates()[j].name] = *v;
    }
    rows.push_back(std::move(fv));
  }
  return rows;
}

}  // namespace ehcp
