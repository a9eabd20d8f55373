#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "ehcp/features.hpp"
#include "ehcp/synthetic.hpp"

using namespace ehcp;

namespace {

TrackingFrame at(EntityId id, TeamSide side, int frame, double x, double y, double step = 0.0) {
  TrackingFrame f;
  f.entity = id;
  f.team = side;
  f.frame_index = frame;
  f.x = x;
  f.y = y;
  f.step_distance = step;
  return f;
}

PlaySequence two_defender_play(double d1, double d2, std::int64_t id1, std::int64_t id2) {
  PlaySequence p;
  p.meta.offense_is_home = true;
  p.tracks[EntityId{1}] = {at(EntityId{1}, TeamSide::home, 1, 50, 20)};
  p.tracks[EntityId{id1}] = {at(EntityId{id1}, TeamSide::away, 1, 50 + d1, 20)};
  p.tracks[EntityId{id2}] = {at(EntityId{id2}, TeamSide::away, 1, 50, 20 + d2)};
  return p;
}

}  // namespace

TEST(Schema, ThirtySixUniqueCovariatesWithObservabilityRules) {
  const auto& s = CovariateSchema::standard();
  EXPECT_EQ(s.size(), 36u);
  std::set<std::string> names;
  for (const auto& d : s.covariates()) {
    names.insert(d.name);
    const bool unobservable = d.phase == Phase::arrival || d.phase == Phase::delta ||
                              d.name == cov::kTimeAir || d.name == cov::kTimeSnapArrival;
    EXPECT_EQ(d.hypothetically_observable, !unobservable) << d.name;
    EXPECT_EQ(d.missing_group == 0, d.hypothetically_observable) << d.name;
  }
  EXPECT_EQ(names.size(), 36u);
}

TEST(PairwiseDistances, Examples) {
  auto d = pairwise_distances({0, 0}, {3, 4});
  EXPECT_EQ(d.euclidean, 5.0);
  EXPECT_EQ(d.horizontal, 3.0);
  EXPECT_EQ(d.vertical, 4.0);
  auto z = pairwise_distances({7, 7}, {7, 7});
  EXPECT_EQ(z.euclidean + z.horizontal + z.vertical, 0.0);
}

TEST(PairwiseDistances, MatchesIndependentRecomputation) {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> ux(0, 120), uy(0, 53.3);
  for (int i = 0; i < 1000; ++i) {
    const Point a{ux(g), uy(g)}, b{ux(g), uy(g)};
    const auto d = pairwise_distances(a, b);
    const double dx = a.x - b.x, dy = a.y - b.y;
    EXPECT_NEAR(d.euclidean, std::sqrt(dx * dx + dy * dy), 1e-12);
    EXPECT_NEAR(d.horizontal, std::abs(dx), 1e-12);
    EXPECT_NEAR(d.vertical, std::abs(dy), 1e-12);
  }
}

TEST(NearestDefender, UniqueMinimumTiesAndNoDefender) {
  auto p = two_defender_play(2, 7, 20, 21);
  EXPECT_EQ(nearest_defender(p, EntityId{1}, 1).id, EntityId{20});
  EXPECT_DOUBLE_EQ(nearest_defender(p, EntityId{1}, 1).distance, 2.0);
  auto tie = two_defender_play(3, 3, 31, 30);
  EXPECT_EQ(nearest_defender(tie, EntityId{1}, 1).id, EntityId{30});
  PlaySequence lonely;
  lonely.meta.offense_is_home = true;
  lonely.tracks[EntityId{1}] = {at(EntityId{1}, TeamSide::home, 1, 50, 20)};
  EXPECT_THROW(nearest_defender(lonely, EntityId{1}, 1), ExtractionError);
}

TEST(NearestDefender, MatchesGeneratorTruth) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = generate_synthetic_play(seed, SyntheticParams{});
    EXPECT_EQ(nearest_defender(s.play, s.truth.target, s.play.timeline.arrival_frame).id,
              s.truth.nearest_defender_at_arrival);
  }
}

TEST(CumulativeDistance, ArithmeticAndBoundary) {
  Track t;
  for (int f = 1; f <= 10; ++f) t.push_back(at(EntityId{1}, TeamSide::home, f, 10, 10, 0.5));
  EXPECT_DOUBLE_EQ(cumulative_distance(t, 10), 5.0);
  EXPECT_DOUBLE_EQ(cumulative_distance(t, 1), 0.5);
}

TEST(CumulativeDistance, MultiPlayGameMatchesBruteForce) {
  SyntheticGameOptions opt;
  opt.plays = 5;
  const auto game = generate_synthetic_game(3, opt);
  FramesByPlay frames;
  std::vector<PlayMeta> metas;
  for (const auto& sp : game) {
    metas.push_back(sp.play.meta);
    for (const auto& [id, tr] : sp.play.tracks) {
      for (const auto& f : tr) frames[sp.play.meta.key].push_back(f);
    }
  }
  const auto assembled = assemble_plays(frames, metas);
  ASSERT_EQ(assembled.plays.size(), 5u);
  const auto& last = assembled.plays.back();
  const EntityId target = *last.targeted_receiver;
  double brute = 0.0;
  for (const auto& sp : game) {
    const auto* tr = sp.play.track(target);
    if (!tr) continue;
    for (const auto& f : *tr) {
      if (sp.play.meta.key < last.meta.key || f.frame_index <= last.timeline.throw_frame) brute += f.step_distance;
    }
  }
  EXPECT_NEAR(game_cumulative_distance(last, target, last.timeline.throw_frame), brute, 1e-9);
}

TEST(Situational, MarginLeadingAndClock) {
  PlayMeta m;
  m.offense_is_home = true;
  auto tied = situational_covariates(m);
  EXPECT_EQ(tied[cov::kOffenseLeading], 0.0);
  EXPECT_EQ(tied[cov::kScoreMargin], static_cast<double>(MarginCategory::tied));
  m.home_score_pre = 21;
  m.visitor_score_pre = 7;
  auto up14 = situational_covariates(m);
  EXPECT_EQ(up14[cov::kOffenseLeading], 1.0);
  EXPECT_EQ(up14[cov::kScoreMargin], static_cast<double>(MarginCategory::multi_score));
  m.offense_is_home = false;
  auto down14 = situational_covariates(m);
  EXPECT_EQ(down14[cov::kOffenseLeading], 0.0);
  EXPECT_EQ(down14[cov::kScoreMargin], static_cast<double>(MarginCategory::multi_score));
  m.home_score_pre = 10;
  EXPECT_EQ(situational_covariates(m)[cov::kScoreMargin], static_cast<double>(MarginCategory::one_score));
  EXPECT_EQ(seconds_left_in_half(2, 180.0), 180.0);
  EXPECT_EQ(seconds_left_in_half(1, 180.0), 1080.0);
}

TEST(WrapDegrees, HalfOpenInterval) {
  EXPECT_EQ(wrap_degrees(350.0), -10.0);
  EXPECT_EQ(wrap_degrees(-350.0), 10.0);
  EXPECT_EQ(wrap_degrees(180.0), 180.0);
  EXPECT_EQ(wrap_degrees(-180.0), 180.0);
}

TEST(ExtractPassFeatures, MatchesGeneratorTruthAndInvariants) {
  const auto names = CovariateSchema::standard().names();
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SyntheticParams params;
    params.route_count = 2 + static_cast<int>(seed % 4);
    auto s = generate_synthetic_play(seed, params);
    const auto fv = extract_pass_features(s.play, s.truth.target);
    ASSERT_EQ(fv.values.size(), names.size());
    for (const auto& n : names) {
      ASSERT_TRUE(s.truth.covariates.count(n)) << n;
      EXPECT_NEAR(fv.at(n), s.truth.covariates.at(n), 1e-9) << n << " seed " << seed;
    }
    const auto& v = fv.values;
    EXPECT_NEAR(v.at(cov::kTimeSnapArrival), v.at(cov::kTimeSnapThrow) + v.at(cov::kTimeAir), 0.1 + 1e-9);
    for (const char* phase : {"throw", "arrival"}) {
      for (const char* pair : {"rec_def", "rec_ball", "def_ball"}) {
        const std::string base = std::string(pair) + "_";
        const double e = v.at(base + "euc_" + phase), h = v.at(base + "hor_" + phase), w = v.at(base + "ver_" + phase);
        EXPECT_NEAR(e * e, h * h + w * w, 1e-9);
      }
    }
    EXPECT_NEAR(v.at(cov::kDeltaSpeed), v.at(cov::kRecSpeedArrival) - v.at(cov::kRecSpeedThrow), 1e-9);
    EXPECT_NEAR(v.at(cov::kDeltaSeparation), v.at(cov::kSeparationArrival) - v.at(cov::kSeparationThrow), 1e-9);
    EXPECT_NEAR(v.at(cov::kDeltaCumDist), v.at(cov::kCumDistArrival) - v.at(cov::kCumDistThrow), 1e-9);
    EXPECT_NEAR(v.at(cov::kDeltaDirection), wrap_degrees(v.at(cov::kRecDirArrival) - v.at(cov::kRecDirThrow)), 1e-9);
  }
}

TEST(ExtractPassFeatures, BallOnReceiverAndShortAirTime) {
  SyntheticParams params;
  params.ball_landing_noise = false;
  auto s = generate_synthetic_play(5, params);
  auto fv = extract_pass_features(s.play, s.truth.target);
  EXPECT_NEAR(fv.at(cov::kRecBallArrival), 0.0, 1e-9);
  EXPECT_NEAR(fv.at("rec_ball_hor_arrival"), 0.0, 1e-9);

  params.air_time = 0.1;
  s = generate_synthetic_play(6, params);
  fv = extract_pass_features(s.play, s.truth.target);
  EXPECT_EQ(s.play.timeline.arrival_frame, s.play.timeline.throw_frame + 1);
  EXPECT_LT(std::abs(fv.at(cov::kDeltaCumDist)), 1.5);
  EXPECT_LT(std::abs(fv.at(cov::kDeltaSpeed)), 1.5);
}

TEST(ExtractPassFeatures, TranslationInvariance) {
  auto s = generate_synthetic_play(8, SyntheticParams{});
  const auto before = extract_pass_features(s.play, s.truth.target);
  PlaySequence shifted = s.play;
  for (auto& [id, tr] : shifted.tracks) {
    for (auto& f : tr) {
      f.x += 0.75;
      f.y -= 0.5;
    }
  }
  const auto after = extract_pass_features(shifted, s.truth.target);
  for (const auto& [name, value] : before.values) {
    if (name.find("_euc_") != std::string::npos || name.find("_hor_") != std::string::npos ||
        name.find("_ver_") != std::string::npos) {
      EXPECT_NEAR(after.at(name), value, 1e-9) << name;
    }
  }
}

TEST(ExtractPassFeatures, UntrackedReceiverIsAnError) {
  auto s = generate_synthetic_play(9, SyntheticParams{});
  EXPECT_THROW(extract_pass_features(s.play, EntityId{424242}), ExtractionError);
}

namespace {

DesignMatrix one_column(std::vector<double> v, bool continuous) {
  DesignMatrix m;
  m.columns = {{"c", "c", continuous, std::nullopt}};
  m.values = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  return m;
}

}  // namespace

TEST(Standardize, TwoPointContinuousColumnHasSdHalf) {
  const auto raw = one_column({0, 2}, true);
  const auto z = standardize_apply(standardize_fit(raw), raw);
  EXPECT_DOUBLE_EQ(z.values(0, 0), -0.5);
  EXPECT_DOUBLE_EQ(z.values(1, 0), 0.5);
}

TEST(Standardize, BinaryColumnIsCentered) {
  const auto raw = one_column({0, 0, 1, 1}, false);
  const auto z = standardize_apply(standardize_fit(raw), raw);
  EXPECT_EQ(z.values(0, 0), -0.5);
  EXPECT_EQ(z.values(3, 0), 0.5);
}

TEST(Standardize, MomentsInvertAndIdempotence) {
  std::vector<PassFeatureVector> rows;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto s = generate_synthetic_play(seed, SyntheticParams{});
    rows.push_back(extract_pass_features(s.play, s.truth.target));
  }
  const auto& schema = CovariateSchema::standard();
  const auto raw = expand_design(schema, rows);
  const auto params = standardize_fit(raw);
  const auto z = standardize_apply(params, raw);
  const auto n = static_cast<double>(z.values.rows());
  for (Eigen::Index j = 0; j < z.values.cols(); ++j) {
    const auto col = z.values.col(j);
    const double mean = col.mean();
    EXPECT_NEAR(mean, 0.0, 1e-9);
    if (params.columns[static_cast<std::size_t>(j)].column.continuous) {
      EXPECT_NEAR(std::sqrt((col.array() - mean).square().sum() / n), 0.5, 1e-9);
    }
  }
  for (Eigen::Index i = 0; i < 5; ++i) {
    const Eigen::VectorXd back = standardize_invert(params, z.values.row(i).transpose());
    std::size_t k = 0;
    for (std::size_t j = 0; j < raw.columns.size(); ++j) {
      if (std::count(params.dropped.begin(), params.dropped.end(), raw.columns[j].name)) continue;
      EXPECT_NEAR(back(static_cast<Eigen::Index>(k++)), raw.values(i, static_cast<Eigen::Index>(j)), 1e-12);
    }
  }
  const auto again = standardize_apply(standardize_fit(z), z);
  for (Eigen::Index j = 0; j < z.values.cols(); ++j) {
    EXPECT_NEAR((again.values.col(j) - z.values.col(j)).cwiseAbs().maxCoeff(), 0.0, 1e-9);
  }
}

TEST(Standardize, ConstantColumnIsDropped) {
  const auto raw = one_column({3, 3, 3}, true);
  const auto params = standardize_fit(raw);
  EXPECT_TRUE(params.columns.empty());
  ASSERT_EQ(params.dropped.size(), 1u);
  EXPECT_EQ(params.dropped[0], "c");
}

TEST(Design, CategoricalExpansionAndMissingField) {
  const auto cols = expand_columns(CovariateSchema::standard());
  int down_cols = 0;
  for (const auto& c : cols) down_cols += c.source == cov::kDown;
  EXPECT_EQ(down_cols, 3);
  DesignColumn d2{"down_2", cov::kDown, false, 2.0};
  EXPECT_EQ(expanded_value(d2, {{cov::kDown, 2.0}}), 1.0);
  EXPECT_EQ(expanded_value(d2, {{cov::kDown, 3.0}}), 0.0);
  try {
    expanded_value(d2, {});
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("down"), std::string::npos);
  }
}

TEST(Design, CsvRoundTripWithSchemaHeader) {
  std::vector<PassFeatureVector> rows;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto s = generate_synthetic_play(seed, SyntheticParams{});
    rows.push_back(extract_pass_features(s.play, s.truth.target));
  }
  std::ostringstream out;
  write_design_csv(out, CovariateSchema::standard(), rows);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')).find("gameId,playId,receiver,y,rec_speed_throw"), 0u);
  std::istringstream in(text);
  const auto back = read_design_csv(in, CovariateSchema::standard());
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].values, rows[i].values);
    EXPECT_EQ(back[i].y, rows[i].y);
    EXPECT_EQ(back[i].play, rows[i].play);
  }
}
