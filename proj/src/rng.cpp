#include "archspace/rng.hpp"

#include <stdexcept>

namespace archspace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return normal_(engine_); }

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::index: empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

Rng Rng::derive(std::string_view stream) const {
  return Rng(splitmix64(seed_ ^ fnv1a64(stream)));
}

Rng Rng::derive(std::uint64_t index) const {
  return Rng(splitmix64(seed_ + 0x9E3779B97F4A7C15ULL * (index + 1)));
}

}  // namespace archspace
