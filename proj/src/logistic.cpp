#include "ehcp/logistic.hpp"

#include <cmath>
#include <future>
#include <sstream>

#include "ehcp/diagnostics.hpp"
#include "ehcp/random.hpp"

namespace ehcp {

namespace {

Eigen::MatrixXd run_chain(const Eigen::MatrixXd& x, const Eigen::VectorXd& kappa,
                          const LogisticConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  const auto n = x.rows();
  const auto p = x.cols();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd omega(n);
  Eigen::MatrixXd kept(config.samples, p);
  const Eigen::VectorXd xt_kappa = x.transpose() * kappa;
  Eigen::VectorXd eps(p);

  for (int it = 0; it < config.warmup + config.samples; ++it) {
    const Eigen::VectorXd psi = x * theta;
    for (Eigen::Index i = 0; i < n; ++i) omega(i) = rng.polya_gamma(psi(i));
    // precision = X' diag(omega) X + I (unit-normal prior on every coefficient)
    Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(p, p);
    if (n > 0) precision.noalias() += x.transpose() * omega.asDiagonal() * x;
    Eigen::LLT<Eigen::MatrixXd> llt(precision);
    const Eigen::VectorXd mean = llt.solve(xt_kappa);
    for (Eigen::Index j = 0; j < p; ++j) eps(j) = rng.normal();
    // L L' = precision  =>  L'^{-1} eps ~ N(0, precision^{-1})
    theta = mean + llt.matrixU().solve(eps);
    if (it >= config.warmup) kept.row(it - config.warmup) = theta.transpose();
  }
  return kept;
}

}  // namespace

LogisticPosterior fit_logistic(const DesignMatrix& standardized, std::span<const int> y,
                               const LogisticConfig& config, StandardizationParams standardization) {
  const auto n = standardized.values.rows();
  const auto q = standardized.values.cols();
  if (static_cast<std::size_t>(n) != y.size()) throw InputError("X and y row counts differ");
  if (config.chains < 1 || config.samples < 1 || config.warmup < 0) {
    throw InputError("logistic config needs chains >= 1, samples >= 1, warmup >= 0");
  }
  for (int v : y) {
    if (v != 0 && v != 1) throw InputError("outcomes must be 0/1");
  }
  if (n > 0) {
    for (Eigen::Index j = 0; j < q; ++j) {
      if (!standardized.columns[static_cast<std::size_t>(j)].continuous) continue;
      const auto col = standardized.values.col(j);
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(n));
      if (std::fabs(sd - 0.5) > 0.05) {
        std::ostringstream msg;
        msg << "refusing unstandardized input: column " << standardized.columns[static_cast<std::size_t>(j)].name
            << " has sd " << sd << " (expected 0.5)";
        throw InputError(msg.str());
      }
    }
  }

  Eigen::MatrixXd x(n, q + 1);
  x.col(0).setOnes();
  x.rightCols(q) = standardized.values;
  Eigen::VectorXd kappa(n);
  for (Eigen::Index i = 0; i < n; ++i) kappa(i) = y[static_cast<std::size_t>(i)] - 0.5;

  std::vector<std::future<Eigen::MatrixXd>> futures;
  for (int c = 0; c < config.chains; ++c) {
    futures.push_back(std::async(std::launch::async, run_chain, std::cref(x), std::cref(kappa),
                                 std::cref(config), derive_seed(config.seed, static_cast<std::uint64_t>(c))));
  }
  std::vector<Eigen::MatrixXd> chains;
  for (auto& f : futures) chains.push_back(f.get());

  LogisticPosterior post;
  post.config = config;
  post.standardization = std::move(standardization);
  post.names.push_back("(intercept)");
  for (const auto& c : standardized.columns) post.names.push_back(c.name);
  post.draws.resize(static_cast<Eigen::Index>(config.chains) * config.samples, q + 1);
  for (int c = 0; c < config.chains; ++c) {
    post.draws.middleRows(static_cast<Eigen::Index>(c) * config.samples, config.samples) = chains[static_cast<std::size_t>(c)];
  }
  for (Eigen::Index j = 0; j <= q; ++j) {
    std::vector<std::vector<double>> per_chain;
    for (const auto& ch : chains) {
      per_chain.emplace_back(ch.col(j).data(), ch.col(j).data() + ch.rows());
    }
    CoefficientDiagnostics d{post.names[static_cast<std::size_t>(j)], split_rhat(per_chain),
                             effective_sample_size(per_chain)};
    if (d.rhat > 1.05) {
      std::ostringstream msg;
      msg << "R-hat " << d.rhat << " > 1.05 for " << d.name;
      post.warnings.push_back(msg.str());
    }
    post.diagnostics.push_back(d);
  }
  return post;
}

std::vector<double> predict_logistic_standardized(const LogisticPosterior& post,
                                                  const Eigen::VectorXd& z) {
  if (z.size() + 1 != post.draws.cols()) throw InputError("row width does not match the posterior");
  std::vector<double> out(post.draw_count());
  for (Eigen::Index s = 0; s < post.draws.rows(); ++s) {
    const double f = post.draws(s, 0) + post.draws.row(s).tail(z.size()).dot(z);
    out[static_cast<std::size_t>(s)] = 1.0 / (1.0 + std::exp(-f));
  }
  return out;
}

std::vector<double> predict_logistic(const LogisticPosterior& post,
                                     const std::map<std::string, double>& raw) {
  return predict_logistic_standardized(post, standardize_apply(post.standardization, raw));
}

}  // namespace ehcp
