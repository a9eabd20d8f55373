#pragma once

#include <string>
#include <vector>

#include "ehcp/features.hpp"
#include "ehcp/imputation.hpp"
#include "ehcp/tracking.hpp"

namespace ehcp {

/// Everything `ingest` produces, reloadable from its output directory.
struct DataBundle {
  ColumnMapping mapping;  // normalized column layout, original event vocabulary
  FramesByPlay frames;
  std::vector<PlayMeta> metas;
  std::vector<PlaySequence> plays;
  std::vector<Rejection> rejections;
  std::vector<Exclusion> excluded;
  std::vector<PassFeatureVector> features;
  DonorPool pool;

  const PlaySequence* find(const PlayKey& key) const;
};

/// Assemble plays and extract features; fails when no pass survives.
DataBundle build_bundle(FramesByPlay frames, std::vector<PlayMeta> metas, const ColumnMapping& mapping,
                        std::vector<Rejection> rejections = {});

DataBundle ingest_files(const std::string& tracking_path, const std::string& plays_path,
                        const ColumnMapping& mapping);

/// Writes tracking.csv, plays.csv, mapping.txt, rejections.csv, exclusions.csv,
/// features.csv and donor_pool.csv. Files appear only once fully written.
void write_bundle(const DataBundle& bundle, const std::string& dir);
DataBundle load_bundle(const std::string& dir);

/// Write `content` to `path` via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace ehcp
