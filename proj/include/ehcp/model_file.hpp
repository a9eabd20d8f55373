#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ehcp/model.hpp"

namespace ehcp {

inline constexpr int kModelFileVersion = 1;

struct ModelFile {
  CovariateSchema schema;
  PosteriorModel model;
  TrainOptions options;
  std::string fingerprint;  // SHA-256 of the training design
};

/// Hex SHA-256 of the design file text for `rows`.
std::string dataset_fingerprint(const CovariateSchema& schema, const std::vector<PassFeatureVector>& rows);

nlohmann::json model_file_to_json(const ModelFile& file);
ModelFile model_file_from_json(const nlohmann::json& j);

void save_model_file(const std::string& path, const ModelFile& file);
/// Refuses files of another format version.
ModelFile load_model_file(const std::string& path);

}  // namespace ehcp
