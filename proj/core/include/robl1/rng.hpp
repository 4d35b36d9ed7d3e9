#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace robl1 {

/// 64-bit finalizer of SplitMix64 (Stafford variant 13).
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Order-sensitive hash of a list of 64-bit words.
std::uint64_t hash_combine(std::initializer_list<std::uint64_t> words) noexcept;

/// FNV-1a of a label, used to name substreams.
std::uint64_t hash_label(std::string_view label) noexcept;

/// Counter-based generator: the i-th draw is mix64(key + (i+1) * golden).
///
/// Independent substreams are obtained by deriving the key from (seed, purpose), so
/// changing how many values one purpose consumes never shifts another purpose.
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}
  CounterRng(std::uint64_t seed, std::string_view purpose) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal via Box-Muller; consumes two raw draws per value.
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }
  /// Uniform integer in [0, bound) by rejection (unbiased).
  std::uint64_t below(std::uint64_t bound) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace robl1
