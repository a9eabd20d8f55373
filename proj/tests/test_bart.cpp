#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "ehcp/bart.hpp"

using namespace ehcp;

namespace {

DesignMatrix design(const Eigen::MatrixXd& values, bool continuous) {
  DesignMatrix m;
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    m.columns.push_back({"x" + std::to_string(j), "x" + std::to_string(j), continuous, std::nullopt});
  }
  m.values = values;
  return m;
}

/// Marginal likelihood of a leaf holding `k` successes out of `n` under mu ~ N(0, tau^2).
double leaf_marginal(int k, int n, double tau) {
  if (n == 0) return 1.0;
  const int steps = 20000;
  const double lo = -10.0, hi = 10.0, h = (hi - lo) / steps;
  double total = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double mu = lo + h * i;
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double log_f = k * -std::log1p(std::exp(-mu)) + (n - k) * -std::log1p(std::exp(mu)) -
                         0.5 * mu * mu / (tau * tau) - std::log(tau * std::sqrt(2 * M_PI));
    total += w * std::exp(log_f);
  }
  return total * h / 3.0;
}

double brute_eval(const DecisionTree& t, int node, const std::vector<double>& x) {
  const auto& nd = t.nodes[static_cast<std::size_t>(node)];
  if (nd.is_leaf()) return nd.value;
  return brute_eval(t, x[static_cast<std::size_t>(nd.var)] < nd.cut ? nd.left : nd.right, x);
}

BartConfig small_config() {
  BartConfig c;
  c.num_trees = 20;
  c.draws = 200;
  c.burn_in = 200;
  return c;
}

}  // namespace

TEST(DecisionTree, EvaluateFollowsStrictLessThan) {
  DecisionTree t;
  t.nodes = {{0, 0.0, 0, 1, 2}, {-1, 0, 1.0, -1, -1}, {1, 2.0, 0, 3, 4}, {-1, 0, 2.0, -1, -1}, {-1, 0, 3.0, -1, -1}};
  const std::vector<double> a{-1, 9}, b{0, 1}, c{0, 2};
  EXPECT_EQ(t.evaluate(a), 1.0);
  EXPECT_EQ(t.evaluate(b), 2.0);
  EXPECT_EQ(t.evaluate(c), 3.0);
  EXPECT_EQ(t.depth(), 2);
  EXPECT_EQ(t.leaf_count(), 3u);
}

TEST(Cutpoints, MidpointsAndThinning) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 0, 2, 0, 3, 1, 3, 1;
  const auto grid = cutpoint_grid(x, 100);
  EXPECT_EQ(grid[0], (std::vector<double>{1.5, 2.5}));
  EXPECT_EQ(grid[1], (std::vector<double>{0.5}));
  Eigen::MatrixXd many(500, 1);
  for (int i = 0; i < 500; ++i) many(i, 0) = i;
  const auto thin = cutpoint_grid(many, 10)[0];
  EXPECT_LE(thin.size(), 10u);
  EXPECT_GE(thin.size(), 8u);
  EXPECT_TRUE(std::is_sorted(thin.begin(), thin.end()));
}

// Posterior over the three trees reachable with two binary covariates and max depth 1.
TEST(BartSampler, TwoVariableStumpPosteriorMatchesEnumeration) {
  const int n = 40;
  Eigen::MatrixXd x(n, 2);
  std::vector<int> y(n);
  std::mt19937_64 g(2);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = (i % 2) - 0.5;
    x(i, 1) = ((i / 2) % 2) - 0.5;
    y[i] = std::uniform_real_distribution<double>()(g) < (x(i, 0) > 0 ? 0.75 : 0.4);
  }
  BartConfig cfg;
  cfg.num_trees = 1;
  cfg.max_depth = 1;
  cfg.depth_alpha = 0.5;
  cfg.prior_f_sd = 1.5;
  cfg.sparse = false;
  cfg.draws = 40000;
  cfg.burn_in = 1000;
  const auto post = fit_bart(design(x, false), y, cfg);

  const double tau = cfg.leaf_sd();
  auto split_lik = [&](int var) {
    int k0 = 0, n0 = 0, k1 = 0, n1 = 0;
    for (int i = 0; i < n; ++i) (x(i, var) < 0 ? (n0++, k0 += y[i]) : (n1++, k1 += y[i]));
    return leaf_marginal(k0, n0, tau) * leaf_marginal(k1, n1, tau);
  };
  const int k = std::accumulate(y.begin(), y.end(), 0);
  std::vector<double> w{(1 - cfg.depth_alpha) * leaf_marginal(k, n, tau), cfg.depth_alpha / 2 * split_lik(0),
                        cfg.depth_alpha / 2 * split_lik(1)};
  const double total = w[0] + w[1] + w[2];
  std::vector<double> freq(3, 0.0);
  for (const auto& d : post.draws) {
    const auto& root = d.trees[0].nodes[0];
    freq[root.is_leaf() ? 0 : 1 + root.var] += 1.0 / static_cast<double>(post.draws.size());
  }
  double tv = 0.0;
  for (int s = 0; s < 3; ++s) tv += 0.5 * std::abs(freq[s] - w[s] / total);
  EXPECT_LT(tv, 0.03) << freq[0] << " " << freq[1] << " " << freq[2];
  EXPECT_GT(w[1] / total, 0.2);
}

// Five trees reachable with one binary covariate and max depth 2; nested splits
// leave an empty leaf, so grow/prune bookkeeping is exercised.
TEST(BartSampler, DepthTwoPosteriorMatchesEnumeration) {
  const int n = 30;
  Eigen::MatrixXd x(n, 1);
  std::vector<int> y(n);
  int k_lo = 0, n_lo = 0, k_hi = 0, n_hi = 0;
  for (int i = 0; i < n; ++i) {
    x(i, 0) = (i % 2) - 0.5;
    y[i] = (i % 2) ? (i % 10 != 1) : (i % 6 == 0);
    (x(i, 0) < 0 ? (n_lo++, k_lo += y[i]) : (n_hi++, k_hi += y[i]));
  }
  BartConfig cfg;
  cfg.num_trees = 1;
  cfg.max_depth = 2;
  cfg.depth_alpha = 0.6;
  cfg.depth_beta = 1.0;
  cfg.prior_f_sd = 1.0;
  cfg.sparse = false;
  cfg.draws = 40000;
  cfg.burn_in = 1000;
  const auto post = fit_bart(design(x, false), y, cfg);

  const double tau = cfg.leaf_sd();
  const double q = cfg.depth_alpha / 2.0;  // split probability at depth 1
  const double split = leaf_marginal(k_lo, n_lo, tau) * leaf_marginal(k_hi, n_hi, tau);
  // states: leaf, stump, stump+left, stump+right, stump+both
  std::vector<double> w{(1 - cfg.depth_alpha) * leaf_marginal(k_lo + k_hi, n, tau),
                        cfg.depth_alpha * (1 - q) * (1 - q) * split, cfg.depth_alpha * q * (1 - q) * split,
                        cfg.depth_alpha * q * (1 - q) * split, cfg.depth_alpha * q * q * split};
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> freq(5, 0.0);
  for (const auto& d : post.draws) {
    const auto& t = d.trees[0];
    const auto& root = t.nodes[0];
    int s = 0;
    if (!root.is_leaf()) {
      const bool l = !t.nodes[static_cast<std::size_t>(root.left)].is_leaf();
      const bool r = !t.nodes[static_cast<std::size_t>(root.right)].is_leaf();
      s = l && r ? 4 : l ? 2 : r ? 3 : 1;
    }
    freq[s] += 1.0 / static_cast<double>(post.draws.size());
  }
  double tv = 0.0;
  for (int s = 0; s < 5; ++s) tv += 0.5 * std::abs(freq[s] - w[s] / total);
  EXPECT_LT(tv, 0.03);
  EXPECT_GT(w[4] / total, 0.02);
}

TEST(BartFit, LearnsStepFunction) {
  const int n = 300;
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXd x(n, 2);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = u(g);
    x(i, 1) = u(g);
    y[i] = x(i, 0) > 0.3;
  }
  auto cfg = small_config();
  cfg.num_trees = 50;
  const auto post = fit_bart(design(x, true), y, cfg);
  int wrong = 0;
  for (int i = 0; i < n; ++i) {
    const auto p = predict_bart_standardized(post, x.row(i).transpose());
    const double mean = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
    wrong += (mean >= 0.5) != (y[i] == 1);
  }
  EXPECT_LT(wrong, n / 20);
  EXPECT_GT(post.grow_acceptance, 0.0);
  EXPECT_GT(post.change_acceptance, 0.0);
}

TEST(BartFit, DrawsAreConsistentAndDeterministic) {
  const int n = 120;
  std::mt19937_64 g(6);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(n, 4);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j) x(i, j) = nd(g);
    y[i] = x(i, 0) + 0.5 * nd(g) > 0;
  }
  auto cfg = small_config();
  cfg.draws = 50;
  cfg.burn_in = 50;
  cfg.chains = 2;
  const auto a = fit_bart(design(x, true), y, cfg);
  const auto b = fit_bart(design(x, true), y, cfg);
  ASSERT_EQ(a.draws.size(), 100u);
  EXPECT_TRUE(a.draws == b.draws);
  cfg.seed = 9;
  EXPECT_FALSE(fit_bart(design(x, true), y, cfg).draws == a.draws);

  const auto grid = cutpoint_grid(x, cfg.num_cutpoints);
  for (const auto& d : a.draws) {
    EXPECT_NEAR(std::accumulate(d.split_probs.begin(), d.split_probs.end(), 0.0), 1.0, 1e-12);
    for (const auto& t : d.trees) {
      for (const auto& nd2 : t.nodes) {
        if (nd2.is_leaf()) continue;
        const auto& c = grid[static_cast<std::size_t>(nd2.var)];
        EXPECT_TRUE(std::binary_search(c.begin(), c.end(), nd2.cut));
      }
    }
  }
  for (int i = 0; i < 5; ++i) {
    std::vector<double> xi(4);
    for (int j = 0; j < 4; ++j) xi[j] = x(i, j);
    for (const auto& d : a.draws) {
      double sum = 0.0;
      for (const auto& t : d.trees) sum += brute_eval(t, 0, xi);
      EXPECT_NEAR(d.evaluate(xi), sum, 1e-12);
    }
  }
}

TEST(BartFit, UniformSplitProbabilitiesWithoutSparsity) {
  Eigen::MatrixXd x(20, 5);
  std::mt19937_64 g(1);
  std::normal_distribution<double> nd;
  std::vector<int> y(20);
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 5; ++j) x(i, j) = nd(g);
    y[i] = i % 2;
  }
  auto cfg = small_config();
  cfg.sparse = false;
  cfg.draws = 20;
  cfg.burn_in = 5;
  const auto post = fit_bart(design(x, true), y, cfg);
  for (const auto& imp : splitting_importance(post)) EXPECT_NEAR(imp.split_probability, 0.2, 1e-12);
}

TEST(BartFit, NoiseVariablesGetLowSplitShare) {
  const int n = 300, p = 10;
  std::mt19937_64 g(8);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(n, p);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = nd(g);
    y[i] = 2.0 * x(i, 0) + 0.3 * nd(g) > 0;
  }
  auto cfg = small_config();
  const auto imp = splitting_importance(fit_bart(design(x, true), y, cfg));
  EXPECT_EQ(imp.front().name, "x0");
  for (const auto& v : imp) {
    if (v.name != "x0") EXPECT_LT(v.split_probability, 0.2) << v.name;
  }
}

TEST(BartPredict, EmptyTreesGiveOneHalf) {
  BartPosterior post;
  post.names = {"a"};
  TreeEnsembleDraw d;
  d.trees.assign(10, DecisionTree{});
  d.split_probs = {1.0};
  post.draws.assign(3, d);
  Eigen::VectorXd z(1);
  z << 0.7;
  for (double v : predict_bart_standardized(post, z)) EXPECT_EQ(v, 0.5);
  Eigen::VectorXd wide(2);
  EXPECT_THROW(predict_bart_standardized(post, wide), InputError);
}

TEST(BartFit, Refusals) {
  const auto cfg = small_config();
  Eigen::MatrixXd x(4, 1);
  x << -1, 0, 1, 2;
  EXPECT_THROW(fit_bart(design(Eigen::MatrixXd(4, 0), true), std::vector<int>{0, 1, 0, 1}, cfg), InputError);
  EXPECT_THROW(fit_bart(design(x, true), std::vector<int>{0, 1, 0}, cfg), InputError);
  EXPECT_THROW(fit_bart(design(x, true), std::vector<int>{1, 1, 1, 1}, cfg), InputError);
  EXPECT_THROW(fit_bart(design(x, true), std::vector<int>{0, 1, 2, 1}, cfg), InputError);
  Eigen::MatrixXd flat = Eigen::MatrixXd::Ones(4, 1);
  EXPECT_THROW(fit_bart(design(flat, true), std::vector<int>{0, 1, 0, 1}, cfg), InputError);
  auto bad = cfg;
  bad.p_grow = 0.9;
  EXPECT_THROW(fit_bart(design(x, true), std::vector<int>{0, 1, 0, 1}, bad), InputError);
}
