#include "ehcp/imputation.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "ehcp/csv.hpp"
#include "ehcp/random.hpp"

namespace ehcp {

bool MissingPartition::is_missing(const std::string& name) const {
  return std::find(missing.begin(), missing.end(), name) != missing.end();
}

MissingPartition partition_schema(const CovariateSchema& schema) {
  MissingPartition p;
  for (const auto& d : schema.covariates()) {
    if (d.hypothetically_observable) {
      p.observable.push_back(d.name);
    } else {
      p.missing.push_back(d.name);
      p.groups[d.missing_group].push_back(d.name);
    }
  }
  return p;
}

std::string to_string(ImputationMode mode) {
  return mode == ImputationMode::joint ? "joint" : "per-group";
}

ImputationMode parse_imputation_mode(const std::string& text) {
  if (text == "joint") return ImputationMode::joint;
  if (text == "per-group") return ImputationMode::per_group;
  throw InputError("unknown imputation mode '" + text + "' (expected joint or per-group)");
}

DonorPool build_donor_pool(const CovariateSchema& schema, const std::vector<PassFeatureVector>& passes) {
  if (passes.empty()) throw InputError("cannot build a donor pool from an empty dataset");
  DonorPool pool;
  pool.partition = partition_schema(schema);
  pool.rows.reserve(passes.size());
  for (const auto& pass : passes) {
    DonorRow row{pass.play, pass.receiver, {}};
    for (const auto& name : pool.partition.missing) row.values[name] = pass.at(name);
    pool.rows.push_back(std::move(row));
  }
  return pool;
}

void validate_pinning(const MissingPartition& partition, const Pinning& pinning) {
  for (const auto& [name, value] : pinning) {
    if (!partition.is_missing(name)) {
      throw InputError("pinning key '" + name + "' is not an unobservable covariate");
    }
  }
}

namespace {

// Donor indices for `m` draws: uniform with replacement, or a prefix of a shuffle.
std::vector<std::size_t> donor_indices(std::size_t pool_size, std::size_t m, bool without_replacement,
                                       Rng& rng) {
  std::vector<std::size_t> idx;
  if (without_replacement) {
    idx.resize(pool_size);
    std::iota(idx.begin(), idx.end(), 0);
    // Fisher-Yates on our own generator so results do not depend on the stdlib
    for (std::size_t i = pool_size; i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
    idx.resize(m);
  } else {
    idx.reserve(m);
    for (std::size_t k = 0; k < m; ++k) idx.push_back(rng.index(pool_size));
  }
  return idx;
}

}  // namespace

std::vector<std::map<std::string, double>> sample_missing(const DonorPool& pool,
                                                          const ImputationRequest& request,
                                                          std::uint64_t seed,
                                                          const std::map<std::string, double>* observed) {
  if (request.m < 1) throw InputError("number of imputations must be at least 1");
  if (pool.rows.empty()) throw InputError("donor pool is empty");
  if (request.without_replacement && request.m > pool.size()) {
    throw InputError("cannot draw " + std::to_string(request.m) + " imputations without replacement from " +
                     std::to_string(pool.size()) + " donors");
  }
  validate_pinning(pool.partition, request.pinning);

  Rng rng(seed);
  std::vector<std::map<std::string, double>> draws(request.m);
  if (request.mode == ImputationMode::joint) {
    const auto idx = donor_indices(pool.size(), request.m, request.without_replacement, rng);
    for (std::size_t k = 0; k < request.m; ++k) draws[k] = pool.rows[idx[k]].values;
  } else {
    for (const auto& [group, names] : pool.partition.groups) {
      const auto idx = donor_indices(pool.size(), request.m, request.without_replacement, rng);
      for (std::size_t k = 0; k < request.m; ++k) {
        const auto& donor = pool.rows[idx[k]].values;
        for (const auto& name : names) draws[k][name] = donor.at(name);
      }
    }
  }

  const auto& pin = request.pinning;
  for (auto& d : draws) {
    for (const auto& [name, value] : pin) d[name] = value;
    if (!observed) continue;
    auto obs = [&](const char* name) -> const double* {
      auto it = observed->find(name);
      return it == observed->end() ? nullptr : &it->second;
    };
    if (!pin.count(cov::kTimeSnapArrival) && d.count(cov::kTimeSnapArrival) && d.count(cov::kTimeAir)) {
      if (const double* t = obs(cov::kTimeSnapThrow)) d[cov::kTimeSnapArrival] = *t + d[cov::kTimeAir];
    }
    if (!pin.count(cov::kCumDistArrival) && d.count(cov::kCumDistArrival) && d.count(cov::kDeltaCumDist)) {
      if (const double* c = obs(cov::kCumDistThrow)) d[cov::kCumDistArrival] = *c + d[cov::kDeltaCumDist];
    }
  }
  return draws;
}

void write_donor_pool_csv(std::ostream& out, const DonorPool& pool) {
  std::vector<std::string> header = {"gameId", "playId", "receiver"};
  header.insert(header.end(), pool.partition.missing.begin(), pool.partition.missing.end());
  csv::write_row(out, header);
  for (const auto& row : pool.rows) {
    std::vector<std::string> cells = {std::to_string(row.play.game_id), std::to_string(row.play.play_id),
                                      std::to_string(row.receiver.value)};
    for (const auto& name : pool.partition.missing) cells.push_back(csv::format_double(row.values.at(name)));
    csv::write_row(out, cells);
  }
}

DonorPool read_donor_pool_csv(std::istream& in, const CovariateSchema& schema) {
  DonorPool pool;
  pool.partition = partition_schema(schema);
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw InputError("donor pool file is empty");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header->fields.size(); ++i) col[header->fields[i]] = i;
  for (const char* key : {"gameId", "playId", "receiver"}) {
    if (!col.count(key)) throw InputError(std::string("donor pool is missing column ") + key);
  }
  for (const auto& name : pool.partition.missing) {
    if (!col.count(name)) throw InputError("donor pool is missing column " + name);
  }
  while (auto rec = reader.next()) {
    const auto where = "donor pool line " + std::to_string(rec->line);
    if (rec->fields.size() != header->fields.size()) throw InputError(where + ": wrong field count");
    auto g = csv::parse_int(rec->fields[col["gameId"]]);
    auto p = csv::parse_int(rec->fields[col["playId"]]);
    auto r = csv::parse_int(rec->fields[col["receiver"]]);
    if (!g || !p || !r) throw InputError(where + ": bad key");
    DonorRow row{{*g, *p}, EntityId{*r}, {}};
    for (const auto& name : pool.partition.missing) {
      auto v = csv::parse_double(rec->fields[col[name]]);
      if (!v) throw InputError(where + ": bad value for " + name);
      row.values[name] = *v;
    }
    pool.rows.push_back(std::move(row));
  }
  if (pool.rows.empty()) throw InputError("donor pool has no rows");
  return pool;
}

}  // namespace ehcp
