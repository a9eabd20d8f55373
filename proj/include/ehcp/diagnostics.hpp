#pragma once

#include <span>
#include <vector>

namespace ehcp {

/// Linear-interpolation sample quantile (type 7).
double quantile(std::vector<double> values, double q);

/// Posterior mean with the central 95% interval.
struct PosteriorSummary {
  double mean = 0.0;
  double lower = 0.0;  // 2.5%
  double upper = 0.0;  // 97.5%
};

PosteriorSummary summarize(std::span<const double> draws);

/// Running mean; exact for constant input.
double stable_mean(std::span<const double> values);
double population_variance(std::span<const double> values);

/// Split potential scale reduction over equal-length chains.
double split_rhat(const std::vector<std::vector<double>>& chains);
/// Multi-chain effective sample size (Geyer initial positive sequence).
double effective_sample_size(const std::vector<std::vector<double>>& chains);

}  // namespace ehcp
