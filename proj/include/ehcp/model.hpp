#pragma once

#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ehcp/bart.hpp"
#include "ehcp/logistic.hpp"

namespace ehcp {

enum class ModelKind { logistic, bart };
std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

/// A fitted posterior of either kind; predictions are per-draw probabilities.
struct PosteriorModel {
  std::variant<LogisticPosterior, BartPosterior> posterior;

  ModelKind kind() const;
  const StandardizationParams& standardization() const;
  std::size_t draw_count() const;
  std::vector<double> predict(const std::map<std::string, double>& raw) const;
  std::vector<double> predict_standardized(const Eigen::VectorXd& z) const;
};

struct TrainOptions {
  ModelKind kind = ModelKind::bart;
  LogisticConfig logistic;
  BartConfig bart;
};

/// Expand, standardize, fit.
PosteriorModel train_model(const CovariateSchema& schema, const std::vector<PassFeatureVector>& rows,
                           const TrainOptions& options);

/// Posterior-mean probability per row.
std::vector<double> posterior_mean_predictions(const PosteriorModel& model,
                                               const std::vector<PassFeatureVector>& rows);

struct PdpPoint {
  double value = 0.0;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Vary one schema covariate over `grid`, everything else fixed at `base`.
std::vector<PdpPoint> partial_dependence(const PosteriorModel& model,
                                         const std::map<std::string, double>& base,
                                         const std::string& variable, std::span<const double> grid);

/// Levels for categorical/binary covariates, else `points` evenly spaced values
/// over the observed range.
std::vector<double> default_pdp_grid(const CovariateSchema& schema,
                                     const std::vector<PassFeatureVector>& rows,
                                     const std::string& variable, int points = 20);

}  // namespace ehcp
