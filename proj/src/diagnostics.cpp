#include "ehcp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ehcp {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double stable_mean(std::span<const double> values) {
  double m = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    ++k;
    m += (v - m) / static_cast<double>(k);
  }
  return m;
}

double population_variance(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double m = stable_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size());
}

PosteriorSummary summarize(std::span<const double> draws) {
  std::vector<double> v(draws.begin(), draws.end());
  PosteriorSummary s;
  s.mean = stable_mean(draws);
  s.lower = quantile(v, 0.025);
  s.upper = quantile(v, 0.975);
  return s;
}

namespace {

std::vector<std::vector<double>> split_chains(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    if (half < 2) {
      out.push_back(c);
      continue;
    }
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
  const auto split = split_chains(chains);
  const std::size_t m = split.size();
  if (m < 2) return 1.0;
  std::size_t n = split.front().size();
  for (const auto& c : split) n = std::min(n, c.size());
  if (n < 2) return 1.0;
  std::vector<double> means;
  double w = 0.0;
  for (const auto& c : split) {
    std::vector<double> head(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(n));
    means.push_back(mean_of(head));
    w += sample_variance(head);
  }
  w /= static_cast<double>(m);
  const double b = static_cast<double>(n) * sample_variance(means);
  if (w <= 0.0) return 1.0;
  const double var_plus = (static_cast<double>(n) - 1.0) / static_cast<double>(n) * w + b / static_cast<double>(n);
  return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m == 0) return 0.0;
  std::size_t n = chains.front().size();
  for (const auto& c : chains) n = std::min(n, c.size());
  if (n < 4) return static_cast<double>(m * n);

  std::vector<double> means(m), vars(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> head(chains[j].begin(), chains[j].begin() + static_cast<std::ptrdiff_t>(n));
    means[j] = mean_of(head);
    vars[j] = sample_variance(head);
  }
  const double w = mean_of(vars);
  const double b_over_n = m > 1 ? sample_variance(means) : 0.0;
  const double var_plus = (static_cast<double>(n) - 1.0) / static_cast<double>(n) * w + b_over_n;
  if (var_plus <= 0.0) return static_cast<double>(m * n);

  auto autocov = [&](std::size_t lag) {
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t + lag < n; ++t) {
        s += (chains[j][t] - means[j]) * (chains[j][t + lag] - means[j]);
      }
      total += s / static_cast<double>(n);
    }
    return total / static_cast<double>(m);
  };
  auto rho = [&](std::size_t lag) { return 1.0 - (w - autocov(lag)) / var_plus; };

  // Geyer: sum pairs while positive, enforcing monotone decrease
  double tau = -1.0;
  double prev_pair = INFINITY;
  for (std::size_t t = 0; t + 1 < n; t += 2) {
    double pair = rho(t) + rho(t + 1);
    if (pair < 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(m * n)));
  return static_cast<double>(m * n) / tau;
}

}  // namespace ehcp
