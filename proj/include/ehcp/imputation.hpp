#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ehcp/features.hpp"

namespace ehcp {

struct MissingPartition {
  std::vector<std::string> observable;
  std::vector<std::string> missing;
  /// Unobservable covariates keyed by sampling group (1-5).
  std::map<int, std::vector<std::string>> groups;

  bool is_missing(const std::string& name) const;
};

MissingPartition partition_schema(const CovariateSchema& schema);

enum class ImputationMode { joint, per_group };
std::string to_string(ImputationMode mode);
ImputationMode parse_imputation_mode(const std::string& text);

/// Fixed values for unobservable covariates.
using Pinning = std::map<std::string, double>;

struct DonorRow {
  PlayKey play;
  EntityId receiver;
  std::map<std::string, double> values;  // the missing block only
};

struct DonorPool {
  MissingPartition partition;
  std::vector<DonorRow> rows;

  std::size_t size() const { return rows.size(); }
};

/// One row per pass, completions and incompletions alike.
DonorPool build_donor_pool(const CovariateSchema& schema, const std::vector<PassFeatureVector>& passes);

struct ImputationRequest {
  std::size_t m = 100;
  ImputationMode mode = ImputationMode::joint;
  Pinning pinning;
  /// Draw donors without replacement (requires m <= pool size).
  bool without_replacement = false;
};

/// Throws InputError naming the first pinning key outside the missing set.
void validate_pinning(const MissingPartition& partition, const Pinning& pinning);

/// M missing-block draws. When `observed` is given, snap-to-arrival time and
/// arrival cumulative distance are recomputed from the hypothetical throw.
std::vector<std::map<std::string, double>> sample_missing(
    const DonorPool& pool, const ImputationRequest& request, std::uint64_t seed,
    const std::map<std::string, double>* observed = nullptr);

void write_donor_pool_csv(std::ostream& out, const DonorPool& pool);
DonorPool read_donor_pool_csv(std::istream& in, const CovariateSchema& schema);

}  // namespace ehcp
