#pragma once

#include <string>
#include <vector>

#include "ehcp/model.hpp"
#include "ehcp/synthetic.hpp"

namespace ehcp::testing {

/// Targeted-pass feature rows from independent synthetic plays.
inline std::vector<PassFeatureVector> synthetic_rows(int n, std::uint64_t seed0 = 0) {
  std::vector<PassFeatureVector> rows;
  for (int i = 0; i < n; ++i) {
    SyntheticParams p;
    p.key = {1, i + 1};
    p.route_count = 2 + i % 4;
    p.throw_time = 1.5 + 0.1 * (i % 15);
    p.air_time = 0.5 + 0.1 * (i % 12);
    auto s = generate_synthetic_play(seed0 + static_cast<std::uint64_t>(i), p);
    rows.push_back(extract_pass_features(s.play, s.truth.target));
  }
  return rows;
}

/// Logistic posterior over raw covariates `names` with identity standardization
/// (mean 0, sd 0.5 makes z equal to x). `draws` rows are (intercept, slopes...).
inline PosteriorModel hand_logistic(const std::vector<std::string>& names, const Eigen::MatrixXd& draws) {
  LogisticPosterior post;
  post.names.push_back("(intercept)");
  for (const auto& n : names) {
    post.names.push_back(n);
    post.standardization.columns.push_back({{n, n, true, std::nullopt}, 0.0, 0.5});
  }
  post.draws = draws;
  return PosteriorModel{post};
}

inline double sigmoid(double f) { return 1.0 / (1.0 + std::exp(-f)); }

}  // namespace ehcp::testing
