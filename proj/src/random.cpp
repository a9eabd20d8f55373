#include "ehcp/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ehcp {

namespace {

constexpr double kPi = std::numbers::pi;
// Truncation point of the alternating-series sampler for J*(1, z).
constexpr double kTrunc = 0.64;

double log_normal_cdf(double x) {
  return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
}

// n-th term of the alternating series for the J*(1, 0) density.
double series_term(int n, double x) {
  const double k = (n + 0.5) * kPi;
  if (x > kTrunc) return k * std::exp(-0.5 * k * k * x);
  if (x > 0.0) {
    const double expnt = -1.5 * (std::log(0.5 * kPi) + std::log(x)) + std::log(k) -
                         2.0 * (n + 0.5) * (n + 0.5) / x;
    return std::exp(expnt);
  }
  return 0.0;
}

// Probability of taking the exponential branch of the proposal mixture.
double mass_exponential(double z) {
  const double t = kTrunc;
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double b = std::sqrt(1.0 / t) * (t * z - 1.0);
  const double a = -std::sqrt(1.0 / t) * (t * z + 1.0);
  const double x0 = std::log(fz) + fz * t;
  const double xb = x0 - z + log_normal_cdf(b);
  const double xa = x0 + z + log_normal_cdf(a);
  const double q_over_p = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + q_over_p);
}

// Inverse Gaussian truncated to (0, kTrunc].
double truncated_inverse_gaussian(double z, Rng& rng) {
  z = std::fabs(z);
  const double t = kTrunc;
  double x = t + 1.0;
  if (1.0 / t > z) {
    double alpha = 0.0;
    while (rng.uniform() > alpha) {
      double e1 = rng.exponential();
      double e2 = rng.exponential();
      while (e1 * e1 > 2.0 * e2 / t) {
        e1 = rng.exponential();
        e2 = rng.exponential();
      }
      x = 1.0 + e1 * t;
      x = t / (x * x);
      alpha = std::exp(-0.5 * z * z * x);
    }
  } else {
    const double mu = 1.0 / z;
    while (x > t) {
      double y = rng.normal();
      y *= y;
      const double half_mu = 0.5 * mu;
      const double mu_y = mu * y;
      x = mu + half_mu * mu_y - half_mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
      if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    }
  }
  return x;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  // 53-bit mantissa, never exactly 0 or 1
  for (;;) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double Rng::normal() { return normal_(engine_); }

double Rng::exponential() { return -std::log(uniform()); }

double Rng::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

double Rng::log_gamma(double shape) {
  if (shape >= 1.0) return std::log(gamma(shape));
  // G(a) = G(a + 1) * U^(1/a)
  return std::log(gamma(shape + 1.0)) + std::log(uniform()) / shape;
}

double Rng::polya_gamma(double z) {
  // Devroye-style exact sampler: PG(1, z) = J*(1, z / 2) / 4.
  z = std::fabs(z) * 0.5;
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  for (;;) {
    double x = 0.0;
    if (uniform() < mass_exponential(z)) {
      x = kTrunc + exponential() / fz;
    } else {
      x = truncated_inverse_gaussian(z, *this);
    }
    double s = series_term(0, x);
    const double y = uniform() * s;
    for (int n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= series_term(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += series_term(n, x);
        if (y > s) break;
      }
    }
  }
}

std::size_t Rng::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

std::size_t Rng::from_cumulative(std::span<const double> cumulative) {
  const double u = uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

std::vector<double> log_dirichlet(std::span<const double> shape, Rng& rng) {
  std::vector<double> out(shape.size());
  double max_value = -INFINITY;
  for (std::size_t j = 0; j < shape.size(); ++j) {
    out[j] = rng.log_gamma(shape[j]);
    max_value = std::max(max_value, out[j]);
  }
  double sum = 0.0;
  for (double v : out) sum += std::exp(v - max_value);
  const double log_norm = max_value + std::log(sum);
  for (double& v : out) v -= log_norm;
  return out;
}

}  // namespace ehcp
