#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ehcp/features.hpp"

namespace ehcp {

struct LogisticConfig {
  int chains = 4;
  int warmup = 1000;
  int samples = 1000;  // kept draws per chain
  std::uint64_t seed = 1;
};

struct CoefficientDiagnostics {
  std::string name;
  double rhat = 1.0;
  double ess = 0.0;
};

/// Draws of (intercept, coefficients) under independent N(0, 1) priors.
struct LogisticPosterior {
  std::vector<std::string> names;  // "(intercept)" then design columns
  Eigen::MatrixXd draws;           // S x (columns + 1), chains stacked
  StandardizationParams standardization;
  LogisticConfig config;
  std::vector<CoefficientDiagnostics> diagnostics;
  std::vector<std::string> warnings;

  std::size_t draw_count() const { return static_cast<std::size_t>(draws.rows()); }
};

/// Pólya-Gamma data-augmented Gibbs sampler; leaves the exact posterior invariant.
/// Refuses input whose continuous columns are not scaled to sd 0.5 (+-0.05).
LogisticPosterior fit_logistic(const DesignMatrix& standardized, std::span<const int> y,
                               const LogisticConfig& config,
                               StandardizationParams standardization = {});

/// Probabilities per draw for an already standardized row.
std::vector<double> predict_logistic_standardized(const LogisticPosterior& post,
                                                  const Eigen::VectorXd& z);
std::vector<double> predict_logistic(const LogisticPosterior& post,
                                     const std::map<std::string, double>& raw);

}  // namespace ehcp
