#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace anchorprobe {

/// 64-bit FNV-1a over the bytes of `text`.
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// SplitMix64 output mix.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based generator: draw i of a stream is splitmix64(key + (i+1)·γ),
/// with γ = 0x9E3779B97F4A7C15. A draw depends only on (key, i), so streams
/// keyed per work item give identical results under any execution order.
///
/// Every distribution below is defined in terms of raw 64-bit draws with
/// integer or IEEE-exact arithmetic, so results are identical on every
/// platform (unlike the std:: distributions, which are implementation-defined).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  /// Stream keyed by (seed, label), e.g. (42, "london_0007").
  static CounterRng keyed(std::uint64_t seed, std::string_view label) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t at(std::uint64_t index) const noexcept;
  std::uint64_t next() noexcept { return at(counter_++); }

  /// Uniform integer in [0, bound) by Lemire's multiply-and-reject. bound > 0.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept;

  /// Standard normal via Box-Muller (one draw pair per call, second discarded).
  double normal() noexcept;

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace anchorprobe
