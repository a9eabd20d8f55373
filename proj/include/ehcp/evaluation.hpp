#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ehcp/ehcp.hpp"
#include "ehcp/model.hpp"

namespace ehcp {

struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Random train/test partitions of 0..n-1; train size is round(n * train_frac).
std::vector<TrainTestSplit> split_dataset(std::size_t n, int n_splits = 10, double train_frac = 0.75,
                                          std::uint64_t seed = 1);

struct Metrics {
  double mse = 0.0;
  double logloss = 0.0;
  double misclass = 0.0;
  std::size_t clamped = 0;  // predictions pulled into [1e-12, 1 - 1e-12]
};

Metrics compute_metrics(std::span<const int> y, std::span<const double> p_hat);

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;  // across splits, n - 1 denominator
};

struct ModelValidation {
  ModelKind kind = ModelKind::logistic;
  std::vector<Metrics> splits;  // successful splits only
  std::vector<std::string> failures;
  MetricSummary mse, logloss, misclass;
};

struct ValidationConfig {
  int n_splits = 10;
  double train_frac = 0.75;
  std::uint64_t seed = 1;
  std::vector<ModelKind> kinds = {ModelKind::logistic, ModelKind::bart};
  TrainOptions options;  // per-kind sampler settings; seeds are derived per split
};

struct ValidationResult {
  std::vector<ModelValidation> models;
  ValidationConfig config;
};

ValidationResult validation_experiment(const CovariateSchema& schema,
                                       const std::vector<PassFeatureVector>& rows,
                                       const ValidationConfig& config);
std::string format_validation_table(const ValidationResult& result);
void write_validation_csv(std::ostream& out, const ValidationResult& result);

// ---------------------------------------------------------------------------
// Player reports

struct ReceiverEhcp {
  EntityId receiver;
  double mean = 0.0;
};

/// EHCP of every route runner at the actual throw time, plus the fitted
/// probability of the pass that was thrown.
struct PassAnalysis {
  PlayKey play;
  EntityId passer;
  std::string passer_name;
  EntityId target;
  std::string target_name;
  std::vector<ReceiverEhcp> receivers;
  double target_ehcp = 0.0;
  double fitted = 0.0;
};

std::vector<PassAnalysis> analyze_passes(const PosteriorModel& model, const std::vector<PlaySequence>& plays,
                                         const DonorPool& pool, const ImputationRequest& request,
                                         std::uint64_t seed);

struct QbTargetRow {
  EntityId passer;
  std::string name;
  std::size_t passes = 0;
  double pct_highest = 0.0;
  double pct_lowest = 0.0;
};

/// Ties in posterior mean count as argmax (or argmin) for every tied receiver.
/// Passes with fewer than two receivers are skipped.
std::vector<QbTargetRow> qb_target_analysis(std::span<const PassAnalysis> passes,
                                            std::size_t min_passes = 100);

struct ReceiverDiffRow {
  EntityId receiver;
  std::string name;
  std::size_t targets = 0;
  double mean_ehcp = 0.0;
  double mean_fitted = 0.0;
  double difference = 0.0;  // fitted - EHCP
};

std::vector<ReceiverDiffRow> receiver_differential(std::span<const PassAnalysis> passes,
                                                   std::size_t min_targets = 40);

std::string format_qb_table(const std::vector<QbTargetRow>& rows);
std::string format_receiver_table(const std::vector<ReceiverDiffRow>& rows);
void write_qb_csv(std::ostream& out, const std::vector<QbTargetRow>& rows);
void write_receiver_csv(std::ostream& out, const std::vector<ReceiverDiffRow>& rows);

}  // namespace ehcp
