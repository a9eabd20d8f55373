#include "ehcp/model_file.hpp"

#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "ehcp/bundle.hpp"

namespace ehcp {

using nlohmann::json;

std::string dataset_fingerprint(const CovariateSchema& schema, const std::vector<PassFeatureVector>& rows) {
  std::ostringstream text;
  write_design_csv(text, schema, rows);
  const std::string s = text.str();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(s.data(), s.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

namespace {

const char* kind_name(CovariateKind k) {
  switch (k) {
    case CovariateKind::continuous: return "continuous";
    case CovariateKind::binary: return "binary";
    case CovariateKind::categorical: return "categorical";
  }
  return "";
}

CovariateKind kind_from(const std::string& s) {
  if (s == "continuous") return CovariateKind::continuous;
  if (s == "binary") return CovariateKind::binary;
  if (s == "categorical") return CovariateKind::categorical;
  throw InputError("model file: unknown covariate kind " + s);
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::throw_time: return "throw";
    case Phase::arrival: return "arrival";
    case Phase::delta: return "delta";
    case Phase::timing: return "timing";
    case Phase::situational: return "situational";
  }
  return "";
}

Phase phase_from(const std::string& s) {
  for (Phase p : {Phase::throw_time, Phase::arrival, Phase::delta, Phase::timing, Phase::situational}) {
    if (s == phase_name(p)) return p;
  }
  throw InputError("model file: unknown phase " + s);
}

json schema_json(const CovariateSchema& schema) {
  json a = json::array();
  for (const auto& d : schema.covariates()) {
    a.push_back({{"name", d.name},
                 {"kind", kind_name(d.kind)},
                 {"phase", phase_name(d.phase)},
                 {"observable", d.hypothetically_observable},
                 {"levels", d.levels},
                 {"missing_group", d.missing_group}});
  }
  return a;
}

CovariateSchema schema_from(const json& a) {
  std::vector<CovariateDescriptor> ds;
  for (const auto& e : a) {
    CovariateDescriptor d;
    d.name = e.at("name").get<std::string>();
    d.kind = kind_from(e.at("kind").get<std::string>());
    d.phase = phase_from(e.at("phase").get<std::string>());
    d.hypothetically_observable = e.at("observable").get<bool>();
    d.levels = e.at("levels").get<std::vector<double>>();
    d.missing_group = e.at("missing_group").get<int>();
    ds.push_back(std::move(d));
  }
  return CovariateSchema(std::move(ds));
}

json column_json(const DesignColumn& c) {
  json j = {{"name", c.name}, {"source", c.source}, {"continuous", c.continuous}};
  j["level"] = c.level ? json(*c.level) : json(nullptr);
  return j;
}

DesignColumn column_from(const json& j) {
  DesignColumn c;
  c.name = j.at("name").get<std::string>();
  c.source = j.at("source").get<std::string>();
  c.continuous = j.at("continuous").get<bool>();
  if (!j.at("level").is_null()) c.level = j.at("level").get<double>();
  return c;
}

json standardization_json(const StandardizationParams& p) {
  json cols = json::array();
  for (const auto& c : p.columns) cols.push_back({{"column", column_json(c.column)}, {"mean", c.mean}, {"sd", c.sd}});
  return {{"columns", cols}, {"dropped", p.dropped}};
}

StandardizationParams standardization_from(const json& j) {
  StandardizationParams p;
  for (const auto& c : j.at("columns")) {
    p.columns.push_back({column_from(c.at("column")), c.at("mean").get<double>(), c.at("sd").get<double>()});
  }
  p.dropped = j.at("dropped").get<std::vector<std::string>>();
  return p;
}

json logistic_config_json(const LogisticConfig& c) {
  return {{"chains", c.chains}, {"warmup", c.warmup}, {"samples", c.samples}, {"seed", c.seed}};
}

LogisticConfig logistic_config_from(const json& j) {
  LogisticConfig c;
  c.chains = j.at("chains").get<int>();
  c.warmup = j.at("warmup").get<int>();
  c.samples = j.at("samples").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json bart_config_json(const BartConfig& c) {
  return {{"num_trees", c.num_trees},       {"draws", c.draws},
          {"burn_in", c.burn_in},           {"thin", c.thin},
          {"chains", c.chains},             {"depth_alpha", c.depth_alpha},
          {"depth_beta", c.depth_beta},     {"max_depth", c.max_depth},
          {"prior_f_sd", c.prior_f_sd},     {"sparse", c.sparse},
          {"dirichlet_alpha", c.dirichlet_alpha}, {"dirichlet_hyperprior", c.dirichlet_hyperprior},
          {"p_grow", c.p_grow},             {"p_prune", c.p_prune},
          {"p_change", c.p_change},         {"num_cutpoints", c.num_cutpoints},
          {"seed", c.seed}};
}

BartConfig bart_config_from(const json& j) {
  BartConfig c;
  c.num_trees = j.at("num_trees").get<int>();
  c.draws = j.at("draws").get<int>();
  c.burn_in = j.at("burn_in").get<int>();
  c.thin = j.at("thin").get<int>();
  c.chains = j.at("chains").get<int>();
  c.depth_alpha = j.at("depth_alpha").get<double>();
  c.depth_beta = j.at("depth_beta").get<double>();
  c.max_depth = j.at("max_depth").get<int>();
  c.prior_f_sd = j.at("prior_f_sd").get<double>();
  c.sparse = j.at("sparse").get<bool>();
  c.dirichlet_alpha = j.at("dirichlet_alpha").get<double>();
  c.dirichlet_hyperprior = j.at("dirichlet_hyperprior").get<bool>();
  c.p_grow = j.at("p_grow").get<double>();
  c.p_prune = j.at("p_prune").get<double>();
  c.p_change = j.at("p_change").get<double>();
  c.num_cutpoints = j.at("num_cutpoints").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json tree_json(const DecisionTree& t) {
  json var = json::array(), cut = json::array(), value = json::array(), left = json::array(), right = json::array();
  for (const auto& n : t.nodes) {
    var.push_back(n.var);
    cut.push_back(n.cut);
    value.push_back(n.value);
    left.push_back(n.left);
    right.push_back(n.right);
  }
  return {{"var", var}, {"cut", cut}, {"value", value}, {"left", left}, {"right", right}};
}

DecisionTree tree_from(const json& j) {
  const auto var = j.at("var").get<std::vector<int>>();
  const auto cut = j.at("cut").get<std::vector<double>>();
  const auto value = j.at("value").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const std::size_t n = var.size();
  if (cut.size() != n || value.size() != n || left.size() != n || right.size() != n || n == 0) {
    throw InputError("model file: malformed tree");
  }
  DecisionTree t;
  t.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.nodes[i] = {var[i], cut[i], value[i], left[i], right[i]};
    if (var[i] >= 0 && (left[i] <= 0 || right[i] <= 0 || static_cast<std::size_t>(left[i]) >= n ||
                        static_cast<std::size_t>(right[i]) >= n)) {
      throw InputError("model file: tree child index out of range");
    }
  }
  return t;
}

json posterior_json(const PosteriorModel& m) {
  if (const auto* l = std::get_if<LogisticPosterior>(&m.posterior)) {
    json draws = json::array();
    for (Eigen::Index s = 0; s < l->draws.rows(); ++s) {
      std::vector<double> row(static_cast<std::size_t>(l->draws.cols()));
      for (Eigen::Index c = 0; c < l->draws.cols(); ++c) row[static_cast<std::size_t>(c)] = l->draws(s, c);
      draws.push_back(row);
    }
    json diag = json::array();
    for (const auto& d : l->diagnostics) diag.push_back({{"name", d.name}, {"rhat", d.rhat}, {"ess", d.ess}});
    return {{"names", l->names}, {"draws", draws}, {"diagnostics", diag}, {"warnings", l->warnings}};
  }
  const auto& b = std::get<BartPosterior>(m.posterior);
  json draws = json::array();
  for (const auto& d : b.draws) {
    json trees = json::array();
    for (const auto& t : d.trees) trees.push_back(tree_json(t));
    draws.push_back({{"trees", trees}, {"split_probs", d.split_probs}, {"dirichlet_alpha", d.dirichlet_alpha}});
  }
  return {{"names", b.names},
          {"draws", draws},
          {"acceptance",
           {{"grow", b.grow_acceptance}, {"prune", b.prune_acceptance}, {"change", b.change_acceptance}}}};
}

}  // namespace

json model_file_to_json(const ModelFile& f) {
  json j;
  j["format"] = "ehcp-model";
  j["version"] = kModelFileVersion;
  j["kind"] = to_string(f.model.kind());
  j["schema"] = schema_json(f.schema);
  j["standardization"] = standardization_json(f.model.standardization());
  j["config"] = {{"logistic", logistic_config_json(f.options.logistic)}, {"bart", bart_config_json(f.options.bart)}};
  j["seed"] = f.model.kind() == ModelKind::logistic ? f.options.logistic.seed : f.options.bart.seed;
  j["dataset_fingerprint"] = f.fingerprint;
  j["posterior"] = posterior_json(f.model);
  return j;
}

ModelFile model_file_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "ehcp-model") throw InputError("not an ehcp model file");
  const int version = j.at("version").get<int>();
  if (version != kModelFileVersion) {
    throw InputError("model file version " + std::to_string(version) + " is not supported (expected " +
                     std::to_string(kModelFileVersion) + "); retrain with this build");
  }
  ModelFile f;
  f.schema = schema_from(j.at("schema"));
  f.options.kind = parse_model_kind(j.at("kind").get<std::string>());
  f.options.logistic = logistic_config_from(j.at("config").at("logistic"));
  f.options.bart = bart_config_from(j.at("config").at("bart"));
  f.fingerprint = j.at("dataset_fingerprint").get<std::string>();
  StandardizationParams std_params = standardization_from(j.at("standardization"));
  const json& post = j.at("posterior");
  if (f.options.kind == ModelKind::logistic) {
    LogisticPosterior l;
    l.names = post.at("names").get<std::vector<std::string>>();
    const auto& draws = post.at("draws");
    l.draws.resize(static_cast<Eigen::Index>(draws.size()), static_cast<Eigen::Index>(l.names.size()));
    for (std::size_t s = 0; s < draws.size(); ++s) {
      const auto row = draws[s].get<std::vector<double>>();
      if (row.size() != l.names.size()) throw InputError("model file: logistic draw width mismatch");
      for (std::size_t c = 0; c < row.size(); ++c) l.draws(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(c)) = row[c];
    }
    for (const auto& d : post.at("diagnostics")) {
      l.diagnostics.push_back({d.at("name").get<std::string>(), d.at("rhat").get<double>(), d.at("ess").get<double>()});
    }
    l.warnings = post.at("warnings").get<std::vector<std::string>>();
    l.config = f.options.logistic;
    l.standardization = std::move(std_params);
    if (l.names.size() != l.standardization.columns.size() + 1) throw InputError("model file: column count mismatch");
    f.model.posterior = std::move(l);
  } else {
    BartPosterior b;
    b.names = post.at("names").get<std::vector<std::string>>();
    for (const auto& d : post.at("draws")) {
      TreeEnsembleDraw draw;
      for (const auto& t : d.at("trees")) draw.trees.push_back(tree_from(t));
      draw.split_probs = d.at("split_probs").get<std::vector<double>>();
      draw.dirichlet_alpha = d.at("dirichlet_alpha").get<double>();
      for (const auto& t : draw.trees) {
        for (const auto& n : t.nodes) {
          if (n.var >= static_cast<int>(b.names.size())) throw InputError("model file: split variable out of range");
        }
      }
      b.draws.push_back(std::move(draw));
    }
    b.grow_acceptance = post.at("acceptance").at("grow").get<double>();
    b.prune_acceptance = post.at("acceptance").at("prune").get<double>();
    b.change_acceptance = post.at("acceptance").at("change").get<double>();
    b.config = f.options.bart;
    b.standardization = std::move(std_params);
    if (b.names.size() != b.standardization.columns.size()) throw InputError("model file: column count mismatch");
    f.model.posterior = std::move(b);
  }
  return f;
}

void save_model_file(const std::string& path, const ModelFile& file) {
  write_file_atomic(path, model_file_to_json(file).dump() + "\n");
}

ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("model file " + path + " is not valid JSON: " + e.what());
  }
  try {
    return model_file_from_json(j);
  } catch (const json::exception& e) {
    throw InputError("model file " + path + " is malformed: " + e.what());
  }
}

}  // namespace ehcp
