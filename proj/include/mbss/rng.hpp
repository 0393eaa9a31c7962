#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace mbss {

// Seedable random source with reproducible output on every platform.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are implementation-defined, so the
// uniform, integer and normal draws below are computed here directly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  /// Standard normal draw (Marsaglia polar method).
  double normal();

  /// Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mbss
