#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "ehcp/random.hpp"

using namespace ehcp;

namespace {

double pg_mean(double c) { return c == 0.0 ? 0.25 : std::tanh(c / 2) / (2 * c); }
double pg_var(double c) {
  if (c == 0.0) return 1.0 / 24.0;
  const double sech = 1.0 / std::cosh(c / 2);
  return (std::sinh(c) - c) * sech * sech / (4 * c * c * c);
}

}  // namespace

class PolyaGammaMoments : public ::testing::TestWithParam<double> {};

TEST_P(PolyaGammaMoments, MeanAndVarianceMatchClosedForm) {
  const double c = GetParam();
  Rng rng(derive_seed(7, static_cast<std::uint64_t>(c * 100)));
  const int n = 200000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double w = rng.polya_gamma(c);
    ASSERT_GT(w, 0.0);
    s += w;
    ss += w * w;
  }
  const double mean = s / n;
  const double var = ss / n - mean * mean;
  const double se = std::sqrt(pg_var(c) / n);
  EXPECT_NEAR(mean, pg_mean(c), 4 * se);
  EXPECT_NEAR(var, pg_var(c), 0.03 * pg_var(c));
}

INSTANTIATE_TEST_SUITE_P(Tilts, PolyaGammaMoments, ::testing::Values(0.0, 0.5, 1.0, 4.0, -4.0, 12.0));

TEST(Rng, GammaMeanForSmallAndLargeShape) {
  Rng rng(3);
  for (double shape : {0.02, 0.7, 3.0}) {
    double s = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) s += std::exp(rng.log_gamma(shape));
    EXPECT_NEAR(s / n, shape, 5 * std::sqrt(shape / n)) << shape;
  }
}

TEST(Rng, DirichletIsOnTheSimplexWithCorrectMeans) {
  Rng rng(11);
  const std::vector<double> shape = {0.05, 0.05, 2.0, 7.9};
  const double total = std::accumulate(shape.begin(), shape.end(), 0.0);
  std::vector<double> sum(shape.size(), 0.0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const auto lp = log_dirichlet(shape, rng);
    double z = 0;
    for (std::size_t j = 0; j < lp.size(); ++j) {
      z += std::exp(lp[j]);
      sum[j] += std::exp(lp[j]);
    }
    ASSERT_NEAR(z, 1.0, 1e-12);
  }
  for (std::size_t j = 0; j < shape.size(); ++j) EXPECT_NEAR(sum[j] / n, shape[j] / total, 0.01);
}

TEST(Rng, SeedsAreReproducibleAndStreamsDiffer) {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.polya_gamma(1.3), b.polya_gamma(1.3));
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 1000; ++s) seeds.insert(derive_seed(1, s));
  EXPECT_EQ(seeds.size(), 1000u);
}

TEST(Rng, FromCumulativeFollowsWeights) {
  Rng rng(2);
  const std::vector<double> cum = {1.0, 1.0, 4.0};  // weights 1, 0, 3
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 40000; ++i) ++counts[rng.from_cumulative(cum)];
  EXPECT_EQ(counts[1], 0);
  EXPECT_NEAR(counts[0] / 40000.0, 0.25, 0.01);
}
