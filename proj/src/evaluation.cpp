#include "ehcp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>

#include "ehcp/csv.hpp"
#include "ehcp/diagnostics.hpp"
#include "ehcp/random.hpp"

namespace ehcp {

std::vector<TrainTestSplit> split_dataset(std::size_t n, int n_splits, double train_frac, std::uint64_t seed) {
  if (n == 0) throw InputError("cannot split an empty dataset");
  if (n_splits < 1 || !(train_frac > 0.0 && train_frac < 1.0)) {
    throw InputError("need n_splits >= 1 and 0 < train_frac < 1");
  }
  const auto n_train = static_cast<std::size_t>(std::lround(static_cast<double>(n) * train_frac));
  std::vector<TrainTestSplit> out;
  for (int s = 0; s < n_splits; ++s) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
    TrainTestSplit split;
    split.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    out.push_back(std::move(split));
  }
  return out;
}

Metrics compute_metrics(std::span<const int> y, std::span<const double> p_hat) {
  if (y.size() != p_hat.size()) throw InputError("outcome and prediction lengths differ");
  if (y.empty()) throw InputError("no predictions to score");
  constexpr double kEps = 1e-12;
  Metrics m;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double p = p_hat[i];
    if (p < kEps || p > 1.0 - kEps) {
      p = std::clamp(p, kEps, 1.0 - kEps);
      ++m.clamped;
    }
    const double yi = y[i];
    m.mse += (yi - p_hat[i]) * (yi - p_hat[i]);
    m.logloss += -(yi * std::log(p) + (1.0 - yi) * std::log(1.0 - p));
    m.misclass += (y[i] == (p_hat[i] >= 0.5 ? 1 : 0)) ? 0.0 : 1.0;
  }
  const auto n = static_cast<double>(y.size());
  m.mse /= n;
  m.logloss /= n;
  m.misclass /= n;
  return m;
}

namespace {

MetricSummary summarize_metric(const std::vector<Metrics>& splits, double Metrics::*field) {
  MetricSummary s;
  if (splits.empty()) return s;
  std::vector<double> v;
  for (const auto& m : splits) v.push_back(m.*field);
  s.mean = stable_mean(v);
  if (v.size() > 1) {
    s.sd = std::sqrt(population_variance(v) * static_cast<double>(v.size()) / static_cast<double>(v.size() - 1));
  }
  return s;
}

std::string fmt(const char* format, double a, double b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

}  // namespace

ValidationResult validation_experiment(const CovariateSchema& schema,
                                       const std::vector<PassFeatureVector>& rows,
                                       const ValidationConfig& config) {
  const auto splits = split_dataset(rows.size(), config.n_splits, config.train_frac, config.seed);
  ValidationResult result;
  result.config = config;
  for (ModelKind kind : config.kinds) {
    ModelValidation mv;
    mv.kind = kind;
    for (std::size_t s = 0; s < splits.size(); ++s) {
      std::vector<PassFeatureVector> train, test;
      for (auto i : splits[s].train) train.push_back(rows[i]);
      for (auto i : splits[s].test) test.push_back(rows[i]);
      TrainOptions opt = config.options;
      opt.kind = kind;
      const auto fit_seed = derive_seed(config.seed, 1000 + s);
      opt.logistic.seed = fit_seed;
      opt.bart.seed = fit_seed;
      try {
        const PosteriorModel model = train_model(schema, train, opt);
        const auto p = posterior_mean_predictions(model, test);
        std::vector<int> y;
        for (const auto& r : test) y.push_back(r.y);
        mv.splits.push_back(compute_metrics(y, p));
      } catch (const std::exception& e) {
        mv.failures.push_back("split " + std::to_string(s + 1) + ": " + e.what());
      }
    }
    mv.mse = summarize_metric(mv.splits, &Metrics::mse);
    mv.logloss = summarize_metric(mv.splits, &Metrics::logloss);
    mv.misclass = summarize_metric(mv.splits, &Metrics::misclass);
    result.models.push_back(std::move(mv));
  }
  return result;
}

std::string format_validation_table(const ValidationResult& result) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %-18s %-18s %-18s %s\n", "model", "mse", "logloss", "misclass",
                "splits");
  out += line;
  for (const auto& m : result.models) {
    std::snprintf(line, sizeof line, "%-10s %-18s %-18s %-18s %zu/%d\n", to_string(m.kind).c_str(),
                  fmt("%.3f (%.3f)", m.mse.mean, m.mse.sd).c_str(),
                  fmt("%.3f (%.3f)", m.logloss.mean, m.logloss.sd).c_str(),
                  fmt("%.3f (%.3f)", m.misclass.mean, m.misclass.sd).c_str(), m.splits.size(),
                  result.config.n_splits);
    out += line;
    for (const auto& f : m.failures) out += "  failed " + f + "\n";
  }
  return out;
}

void write_validation_csv(std::ostream& out, const ValidationResult& result) {
  csv::write_row(out, {"model", "split", "mse", "logloss", "misclass"});
  for (const auto& m : result.models) {
    for (std::size_t s = 0; s < m.splits.size(); ++s) {
      csv::write_row(out, {to_string(m.kind), std::to_string(s + 1), csv::format_double(m.splits[s].mse),
                           csv::format_double(m.splits[s].logloss), csv::format_double(m.splits[s].misclass)});
    }
  }
}

std::vector<PassAnalysis> analyze_passes(const PosteriorModel& model, const std::vector<PlaySequence>& plays,
                                         const DonorPool& pool, const ImputationRequest& request,
                                         std::uint64_t seed) {
  std::vector<PassAnalysis> out;
  for (const auto& play : plays) {
    if (!play.targeted_receiver || !play.passer) continue;
    PassAnalysis a;
    a.play = play.meta.key;
    a.passer = *play.passer;
    a.target = *play.targeted_receiver;
    if (const Track* t = play.track(a.passer)) a.passer_name = t->front().display_name;
    if (const Track* t = play.track(a.target)) a.target_name = t->front().display_name;
    const double t_throw = play.timeline.snap_to_throw();
    bool target_seen = false;
    try {
      auto runners = play.route_runners();
      if (std::find(runners.begin(), runners.end(), a.target) == runners.end()) runners.push_back(a.target);
      for (EntityId id : runners) {
        const HypotheticalPass h = make_hypothetical(play, id, t_throw);
        const EhcpEstimate e = ehcp_estimate(model, h.observed, pool, request, seed);
        a.receivers.push_back({id, e.mean});
        if (id == a.target) {
          a.target_ehcp = e.mean;
          target_seen = true;
        }
      }
      a.fitted = stable_mean(model.predict(extract_pass_features(play, a.target).values));
    } catch (const ExtractionError&) {
      continue;
    }
    if (target_seen) out.push_back(std::move(a));
  }
  return out;
}

std::vector<QbTargetRow> qb_target_analysis(std::span<const PassAnalysis> passes, std::size_t min_passes) {
  struct Tally {
    std::string name;
    std::size_t n = 0, hi = 0, lo = 0;
  };
  std::map<EntityId, Tally> by_qb;
  for (const auto& p : passes) {
    if (p.receivers.size() < 2) continue;
    double best = -INFINITY, worst = INFINITY, target = NAN;
    for (const auto& r : p.receivers) {
      best = std::max(best, r.mean);
      worst = std::min(worst, r.mean);
      if (r.receiver == p.target) target = r.mean;
    }
    if (std::isnan(target)) continue;
    Tally& t = by_qb[p.passer];
    if (t.name.empty()) t.name = p.passer_name;
    ++t.n;
    if (target == best) ++t.hi;
    if (target == worst) ++t.lo;
  }
  std::vector<QbTargetRow> rows;
  for (const auto& [id, t] : by_qb) {
    if (t.n < min_passes) continue;
    rows.push_back({id, t.name, t.n, 100.0 * static_cast<double>(t.hi) / static_cast<double>(t.n),
                    100.0 * static_cast<double>(t.lo) / static_cast<double>(t.n)});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.pct_highest > b.pct_highest; });
  return rows;
}

std::vector<ReceiverDiffRow> receiver_differential(std::span<const PassAnalysis> passes,
                                                   std::size_t min_targets) {
  struct Acc {
    std::string name;
    std::vector<double> ehcp, fitted;
  };
  std::map<EntityId, Acc> by_rec;
  for (const auto& p : passes) {
    Acc& a = by_rec[p.target];
    if (a.name.empty()) a.name = p.target_name;
    a.ehcp.push_back(p.target_ehcp);
    a.fitted.push_back(p.fitted);
  }
  std::vector<ReceiverDiffRow> rows;
  for (const auto& [id, a] : by_rec) {
    if (a.ehcp.size() < min_targets) continue;
    ReceiverDiffRow r{id, a.name, a.ehcp.size(), stable_mean(a.ehcp), stable_mean(a.fitted), 0.0};
    r.difference = r.mean_fitted - r.mean_ehcp;
    rows.push_back(r);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.difference > b.difference; });
  return rows;
}

std::string format_qb_table(const std::vector<QbTargetRow>& rows) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %8s %10s %10s\n", "passer", "passes", "highest%", "lowest%");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-24s %8zu %10.1f %10.1f\n", r.name.c_str(), r.passes, r.pct_highest,
                  r.pct_lowest);
    out += line;
  }
  return out;
}

std::string format_receiver_table(const std::vector<ReceiverDiffRow>& rows) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %8s %8s %8s %8s\n", "receiver", "targets", "ehcp%", "fitted%", "diff%");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-24s %8zu %8.1f %8.1f %8.1f\n", r.name.c_str(), r.targets,
                  100.0 * r.mean_ehcp, 100.0 * r.mean_fitted, 100.0 * r.difference);
    out += line;
  }
  return out;
}

void write_qb_csv(std::ostream& out, const std::vector<QbTargetRow>& rows) {
  csv::write_row(out, {"passer", "name", "passes", "pct_highest", "pct_lowest"});
  for (const auto& r : rows) {
    csv::write_row(out, {std::to_string(r.passer.value), r.name, std::to_string(r.passes),
                         csv::format_double(r.pct_highest), csv::format_double(r.pct_lowest)});
  }
}

void write_receiver_csv(std::ostream& out, const std::vector<ReceiverDiffRow>& rows) {
  csv::write_row(out, {"receiver", "name", "targets", "mean_ehcp", "mean_fitted", "difference"});
  for (const auto& r : rows) {
    csv::write_row(out, {std::to_string(r.receiver.value), r.name, std::to_string(r.targets),
                         csv::format_double(r.mean_ehcp), csv::format_double(r.mean_fitted),
                         csv::format_double(r.difference)});
  }
}

}  // namespace ehcp
