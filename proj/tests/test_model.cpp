#include <gtest/gtest.h>

#include <cmath>

#include "ehcp/diagnostics.hpp"
#include "fixtures.hpp"

using namespace ehcp;
using namespace ehcp::testing;

TEST(Model, KindNames) {
  EXPECT_EQ(parse_model_kind("bart"), ModelKind::bart);
  EXPECT_EQ(to_string(ModelKind::logistic), "logistic");
  EXPECT_THROW(parse_model_kind("forest"), InputError);
}

TEST(Pdp, FlatForInterceptOnlyAndUnusedVariable) {
  Eigen::MatrixXd draws(3, 3);
  draws << 0.2, 0.0, 0.0, -0.4, 0.0, 0.0, 1.0, 0.0, 0.0;
  const auto model = hand_logistic({cov::kSeparationThrow, cov::kRecSpeedThrow}, draws);
  const std::map<std::string, double> base{{cov::kSeparationThrow, 2.0}, {cov::kRecSpeedThrow, 5.0}};
  const std::vector<double> grid{0, 1, 5, 10};
  for (const char* var : {cov::kSeparationThrow, cov::kRecSpeedThrow}) {
    const auto pdp = partial_dependence(model, base, var, grid);
    ASSERT_EQ(pdp.size(), grid.size());
    for (const auto& pt : pdp) {
      EXPECT_EQ(pt.mean, pdp.front().mean);
      EXPECT_EQ(pt.lower, pdp.front().lower);
    }
  }
}

TEST(Pdp, MatchesIndependentAverage) {
  Eigen::MatrixXd draws(2, 2);
  draws << 0.0, 0.5, 1.0, 0.25;
  const auto model = hand_logistic({cov::kSeparationThrow}, draws);
  const std::vector<double> grid{0, 2, 4};
  const auto pdp = partial_dependence(model, {{cov::kSeparationThrow, 0.0}}, cov::kSeparationThrow, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double a = sigmoid(0.5 * grid[i]), b = sigmoid(1.0 + 0.25 * grid[i]);
    EXPECT_NEAR(pdp[i].mean, (a + b) / 2, 1e-15);
    EXPECT_NEAR(pdp[i].lower, std::min(a, b) + 0.025 * std::abs(a - b), 1e-15);
  }
}

TEST(Pdp, Errors) {
  const auto model = hand_logistic({cov::kSeparationThrow}, Eigen::MatrixXd::Zero(1, 2));
  EXPECT_THROW(partial_dependence(model, {}, cov::kSeparationThrow, std::vector<double>{}), InputError);
  EXPECT_THROW(partial_dependence(model, {}, "nope", std::vector<double>{1.0}), InputError);
}

TEST(Pdp, DefaultGrids) {
  const auto rows = synthetic_rows(10);
  const auto& schema = CovariateSchema::standard();
  EXPECT_EQ(default_pdp_grid(schema, rows, cov::kDown), schema.at(cov::kDown).levels);
  EXPECT_EQ(default_pdp_grid(schema, rows, cov::kOffenseLeading), (std::vector<double>{0, 1}));
  const auto g = default_pdp_grid(schema, rows, cov::kSeparationThrow, 5);
  ASSERT_EQ(g.size(), 5u);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& r : rows) {
    lo = std::min(lo, r.at(cov::kSeparationThrow));
    hi = std::max(hi, r.at(cov::kSeparationThrow));
  }
  EXPECT_DOUBLE_EQ(g.front(), lo);
  EXPECT_DOUBLE_EQ(g.back(), hi);
}

TEST(Model, TrainBothKindsOnSyntheticRows) {
  const auto rows = synthetic_rows(60);
  TrainOptions opt;
  opt.kind = ModelKind::logistic;
  opt.logistic.chains = 2;
  opt.logistic.warmup = 50;
  opt.logistic.samples = 50;
  const auto lm = train_model(CovariateSchema::standard(), rows, opt);
  EXPECT_EQ(lm.kind(), ModelKind::logistic);
  EXPECT_EQ(lm.draw_count(), 100u);
  opt.kind = ModelKind::bart;
  opt.bart.num_trees = 10;
  opt.bart.draws = 30;
  opt.bart.burn_in = 30;
  const auto bm = train_model(CovariateSchema::standard(), rows, opt);
  EXPECT_EQ(bm.draw_count(), 30u);
  const auto p = posterior_mean_predictions(bm, rows);
  ASSERT_EQ(p.size(), rows.size());
  for (double v : p) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_EQ(bm.predict(rows[0].values), bm.predict_standardized(standardize_apply(bm.standardization(), rows[0].values)));
}
