#pragma once

#include <cstdint>
#include <span>

namespace topicaux::num {

/// Counter-based random stream. Draw i is a pure function of (key, i), so the
/// whole state is two integers and sequences are identical on every platform.
/// Distributions are implemented here rather than with <random> because the
/// standard distributions are not specified bit-exactly.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  /// Restores a stream from a saved (key, counter) pair.
  static RngStream from_state(std::uint64_t key, std::uint64_t counter);

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal() noexcept;
  /// Uniform integer in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer; exposed for deriving keys.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace topicaux::num
