#include "topicaux/num/rng.hpp"

#include <cmath>
#include <numbers>

namespace topicaux::num {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : key_(mix64(mix64(seed) ^ (stream_id * 0xD1B54A32D192ED03ull))) {}

RngStream RngStream::from_state(std::uint64_t key, std::uint64_t counter) {
  RngStream s;
  s.key_ = key;
  s.counter_ = counter;
  return s;
}

std::uint64_t RngStream::next_u64() noexcept {
  // Two rounds keep adjacent counters decorrelated.
  return mix64(mix64(key_ + counter_++ * 0x9E3779B97F4A7C15ull) ^ key_);
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() noexcept {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::below(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift with rejection; unbiased.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
  }
}

}  // namespace topicaux::num
