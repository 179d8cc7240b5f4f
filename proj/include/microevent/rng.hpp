#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace microevent {

// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Per-stage seed derivation. A master seed fans out to
// splitmix64(splitmix64(master ^ fnv1a(stage)) + counter), so every stage and
// every replicate inside a stage gets an independent, reproducible stream.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, std::uint64_t counter = 0);

std::uint64_t fnv1a64(std::string_view text);

// Random source whose output is identical on every conforming platform:
// mt19937_64 is fully specified by the standard, and all conversions to
// floating point and bounded integers are done here instead of through the
// implementation-defined <random> distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n); n must be positive.
  std::size_t uniform_index(std::size_t n);

  double normal();
  double gamma(double shape);
  std::vector<double> dirichlet(double concentration, std::size_t dim);
  std::vector<double> dirichlet(std::span<const double> concentration);

  template <class T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[uniform_index(i)]);
    }
  }

  // Index drawn proportionally to non-negative weights.
  std::size_t categorical(std::span<const double> weights);

  // k distinct indices from [0, n) in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace microevent
