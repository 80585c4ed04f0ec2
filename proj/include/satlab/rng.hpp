#ifndef SATLAB_RNG_HPP
#define SATLAB_RNG_HPP

#include <cstdint>
#include <random>

namespace satlab {

/// Seedable generator with build-independent output: std::mt19937_64 for
/// the bit stream, hand-rolled mappings to integers and doubles (the
/// standard distributions are implementation-defined).
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return UINT64_MAX; }
  result_type operator()() { return engine_(); }

  /// Uniform integer in [0, bound), bound > 0. Lemire's multiply-shift with
  /// rejection.
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 product = (unsigned __int128)engine_() * bound;
    auto low = std::uint64_t(product);
    if (low < bound) {
      std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        product = (unsigned __int128)engine_() * bound;
        low = std::uint64_t(product);
      }
    }
    return std::uint64_t(product >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

private:
  std::mt19937_64 engine_;
};

/// Seed for task `index` derived from a base seed (splitmix64 finalizer), so
/// sibling tasks get unrelated streams.
constexpr std::uint64_t deriveSeed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace satlab

#endif // SATLAB_RNG_HPP
