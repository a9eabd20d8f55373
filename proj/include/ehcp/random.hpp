#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ehcp {

/// SplitMix64 step; used to derive independent stream seeds from one seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded random source shared by every sampler in the library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();           // (0, 1)
  double normal();            // N(0, 1)
  double exponential();       // rate 1
  double gamma(double shape); // scale 1
  /// log of a Gamma(shape, 1) draw; stable for shape << 1.
  double log_gamma(double shape);
  /// Draw from PG(1, z).
  double polya_gamma(double z);
  /// Uniform index in [0, n).
  std::size_t index(std::size_t n);
  /// Index drawn proportionally to a cumulative weight table.
  std::size_t from_cumulative(std::span<const double> cumulative);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Draw a point on the simplex from Dirichlet(shape); returns log-probabilities.
std::vector<double> log_dirichlet(std::span<const double> shape, Rng& rng);

}  // namespace ehcp
