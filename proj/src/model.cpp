#include "ehcp/model.hpp"

#include <algorithm>

#include "ehcp/diagnostics.hpp"

namespace ehcp {

std::string to_string(ModelKind kind) { return kind == ModelKind::logistic ? "logistic" : "bart"; }

ModelKind parse_model_kind(const std::string& text) {
  if (text == "logistic") return ModelKind::logistic;
  if (text == "bart") return ModelKind::bart;
  throw InputError("unknown model kind '" + text + "' (expected logistic or bart)");
}

ModelKind PosteriorModel::kind() const {
  return std::holds_alternative<LogisticPosterior>(posterior) ? ModelKind::logistic : ModelKind::bart;
}

const StandardizationParams& PosteriorModel::standardization() const {
  return std::visit([](const auto& p) -> const StandardizationParams& { return p.standardization; },
                    posterior);
}

std::size_t PosteriorModel::draw_count() const {
  return std::visit([](const auto& p) { return p.draw_count(); }, posterior);
}

std::vector<double> PosteriorModel::predict_standardized(const Eigen::VectorXd& z) const {
  if (const auto* l = std::get_if<LogisticPosterior>(&posterior)) return predict_logistic_standardized(*l, z);
  return predict_bart_standardized(std::get<BartPosterior>(posterior), z);
}

std::vector<double> PosteriorModel::predict(const std::map<std::string, double>& raw) const {
  return predict_standardized(standardize_apply(standardization(), raw));
}

PosteriorModel train_model(const CovariateSchema& schema, const std::vector<PassFeatureVector>& rows,
                           const TrainOptions& options) {
  if (rows.empty()) throw InputError("no training rows");
  const DesignMatrix raw = expand_design(schema, rows);
  StandardizationParams params = standardize_fit(raw);
  const DesignMatrix z = standardize_apply(params, raw);
  std::vector<int> y;
  y.reserve(rows.size());
  for (const auto& r : rows) y.push_back(r.y);
  if (options.kind == ModelKind::logistic) {
    return PosteriorModel{fit_logistic(z, y, options.logistic, std::move(params))};
  }
  return PosteriorModel{fit_bart(z, y, options.bart, std::move(params))};
}

std::vector<double> posterior_mean_predictions(const PosteriorModel& model,
                                               const std::vector<PassFeatureVector>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(stable_mean(model.predict(r.values)));
  return out;
}

std::vector<PdpPoint> partial_dependence(const PosteriorModel& model,
                                         const std::map<std::string, double>& base,
                                         const std::string& variable, std::span<const double> grid) {
  if (grid.empty()) throw InputError("partial dependence needs a nonempty grid");
  bool known = false;
  for (const auto& c : model.standardization().columns) known = known || c.column.source == variable;
  for (const auto& d : model.standardization().dropped) known = known || d == variable || d.rfind(variable + "_", 0) == 0;
  if (!known) throw InputError("unknown covariate '" + variable + "'");
  std::vector<PdpPoint> out;
  auto x = base;
  for (double v : grid) {
    x[variable] = v;
    const auto draws = model.predict(x);
    const PosteriorSummary s = summarize(draws);
    out.push_back({v, s.mean, s.lower, s.upper});
  }
  return out;
}

std::vector<double> default_pdp_grid(const CovariateSchema& schema,
                                     const std::vector<PassFeatureVector>& rows,
                                     const std::string& variable, int points) {
  const CovariateDescriptor& d = schema.at(variable);
  if (d.kind == CovariateKind::categorical) return d.levels;
  if (d.kind == CovariateKind::binary) return {0.0, 1.0};
  if (rows.empty()) throw InputError("no rows to derive a grid from");
  double lo = rows.front().at(variable), hi = lo;
  for (const auto& r : rows) {
    lo = std::min(lo, r.at(variable));
    hi = std::max(hi, r.at(variable));
  }
  if (points < 2 || hi == lo) return {lo};
  std::vector<double> grid;
  for (int k = 0; k < points; ++k) grid.push_back(lo + (hi - lo) * k / (points - 1));
  return grid;
}

}  // namespace ehcp
