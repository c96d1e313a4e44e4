#pragma once
// Self-contained deterministic RNG. std:: distributions are
// implementation-defined, so every stochastic component (generator, splits,
// weight init, dropout, t-SNE) draws from this one instead.

#include <cstdint>

namespace agrignn {

/// splitmix64 stream with uniform/normal helpers. Same seed, same platform,
/// same sequence - the determinism anchor for the whole pipeline.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  /// Standard normal via Box-Muller; the spare draw is cached.
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Derived stream: decorrelates sub-purposes (e.g. dropout per epoch)
  /// without consuming draws from the parent.
  Rng fork(std::uint64_t stream) const {
    Rng r(state_ ^ (0xA0761D6478BD642FULL * (stream + 1)));
    r.next_u64();
    return r;
  }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(T* data, int n) {
    for (int i = n - 1; i > 0; --i) {
      int j = uniform_int(i + 1);
      T tmp = data[i];
      data[i] = data[j];
      data[j] = tmp;
    }
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace agrignn
