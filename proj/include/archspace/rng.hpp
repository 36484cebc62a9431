#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace archspace {

/**
 * Seeded 64-bit Mersenne Twister with named sub-streams.
 *
 * Sub-seeding: `derive(name)` returns a fresh generator seeded with
 * splitmix64(seed ^ fnv1a64(name)); `derive(index)` uses
 * splitmix64(seed + golden * (index + 1)). A derived stream depends only on
 * the parent seed, never on how many values the parent has produced.
 *
 * Single owner: a Rng must not be shared across threads.
 */
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on the open interval (0, 1); never returns 0.
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  double gamma(double shape);
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  Rng derive(std::string_view stream) const;
  Rng derive(std::uint64_t index) const;

  std::mt19937_64& engine() { return engine_; }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace archspace
