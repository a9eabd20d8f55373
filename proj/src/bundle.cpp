#include "ehcp/bundle.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ehcp/csv.hpp"

namespace ehcp {

namespace fs = std::filesystem;

const PlaySequence* DataBundle::find(const PlayKey& key) const {
  for (const auto& p : plays) {
    if (p.meta.key == key) return &p;
  }
  return nullptr;
}

DataBundle build_bundle(FramesByPlay frames, std::vector<PlayMeta> metas, const ColumnMapping& mapping,
                        std::vector<Rejection> rejections) {
  DataBundle b;
  b.mapping = ColumnMapping::big_data_bowl();
  b.mapping.snap_events = mapping.snap_events;
  b.mapping.throw_events = mapping.throw_events;
  b.mapping.arrival_events = mapping.arrival_events;
  AssemblyResult assembled = assemble_plays(frames, metas, b.mapping);
  ExtractionResult extracted = extract_dataset(assembled.plays);
  b.frames = std::move(frames);
  b.metas = std::move(metas);
  b.plays = std::move(assembled.plays);
  b.excluded = std::move(assembled.excluded);
  b.excluded.insert(b.excluded.end(), extracted.excluded.begin(), extracted.excluded.end());
  b.rejections = std::move(rejections);
  b.features = std::move(extracted.rows);
  if (b.features.empty()) throw InputError("no usable pass plays in the input (see exclusions)");
  b.pool = build_donor_pool(CovariateSchema::standard(), b.features);
  return b;
}

DataBundle ingest_files(const std::string& tracking_path, const std::string& plays_path,
                        const ColumnMapping& mapping) {
  auto tracking = parse_tracking_csv(tracking_path, mapping);
  auto plays = parse_plays_csv(plays_path, mapping);
  std::vector<Rejection> rejections = std::move(tracking.rejections);
  rejections.insert(rejections.end(), plays.rejections.begin(), plays.rejections.end());
  return build_bundle(std::move(tracking.rows), std::move(plays.rows), mapping, std::move(rejections));
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InputError("cannot write " + tmp);
    out << content;
    if (!out.flush()) throw InputError("write failed for " + tmp);
  }
  fs::rename(tmp, path);
}

void write_bundle(const DataBundle& b, const std::string& dir) {
  fs::create_directories(dir);
  std::vector<std::pair<std::string, std::string>> files;
  auto render = [&](const std::string& name, auto&& fn) {
    std::ostringstream out;
    fn(out);
    files.emplace_back((fs::path(dir) / name).string(), out.str());
  };
  render("tracking.csv", [&](std::ostream& o) { write_tracking_csv(o, b.frames); });
  render("plays.csv", [&](std::ostream& o) { write_plays_csv(o, b.metas); });
  render("mapping.txt", [&](std::ostream& o) { b.mapping.write(o); });
  render("rejections.csv", [&](std::ostream& o) { write_rejections(o, b.rejections); });
  render("exclusions.csv", [&](std::ostream& o) { write_exclusions(o, b.excluded); });
  render("features.csv", [&](std::ostream& o) { write_design_csv(o, CovariateSchema::standard(), b.features); });
  render("donor_pool.csv", [&](std::ostream& o) { write_donor_pool_csv(o, b.pool); });
  // render everything first so a failure leaves no partial bundle behind
  for (const auto& [path, content] : files) write_file_atomic(path, content);
}

DataBundle load_bundle(const std::string& dir) {
  const fs::path root(dir);
  for (const char* name : {"tracking.csv", "plays.csv", "mapping.txt"}) {
    if (!fs::exists(root / name)) {
      throw InputError("data bundle " + dir + " has no " + name + " (run `ehcp ingest` first)");
    }
  }
  const ColumnMapping mapping = ColumnMapping::load((root / "mapping.txt").string());
  auto tracking = parse_tracking_csv((root / "tracking.csv").string(), mapping);
  auto plays = parse_plays_csv((root / "plays.csv").string(), mapping);
  std::vector<Rejection> rejections;
  if (fs::exists(root / "rejections.csv")) {
    std::ifstream in(root / "rejections.csv");
    csv::Reader reader(in);
    reader.next();
    while (auto rec = reader.next()) {
      if (rec->fields.size() != 3) continue;
      rejections.push_back({rec->fields[0], static_cast<std::size_t>(csv::parse_int(rec->fields[1]).value_or(0)),
                            rec->fields[2]});
    }
  }
  rejections.insert(rejections.end(), tracking.rejections.begin(), tracking.rejections.end());
  rejections.insert(rejections.end(), plays.rejections.begin(), plays.rejections.end());
  return build_bundle(std::move(tracking.rows), std::move(plays.rows), mapping, std::move(rejections));
}

}  // namespace ehcp
