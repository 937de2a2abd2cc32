#pragma once

#include <cstdint>
#include <random>

namespace rb {

// Deterministic pseudo-random stream. A run owns one root stream seeded
// from config; parallel workers and per-group chains derive independent
// streams from (seed, stream_id) so results do not depend on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix(seed)) {}

  // Independent stream derived from (seed, stream_id).
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
    return Rng(mix(seed) ^ mix(stream_id * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull));
  }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }

  // Standard normal draw. Distribution objects are created per call so a
  // stream's output is a pure function of its draw count.
  double normal() {
    return std::normal_distribution<double>(0.0, 1.0)(gen_);
  }

  double gamma(double shape, double scale) {
    return std::gamma_distribution<double>(shape, scale)(gen_);
  }

  long long poisson(double mean) {
    return std::poisson_distribution<long long>(mean)(gen_);
  }

  std::uint64_t integer(std::uint64_t n) {  // uniform on [0, n)
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
  }

  std::mt19937_64& raw() { return gen_; }

 private:
  // splitmix64 finalizer; decorrelates nearby seeds before feeding mt19937_64.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 gen_;
};

}  // namespace rb
