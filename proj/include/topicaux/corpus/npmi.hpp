#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "topicaux/corpus/cooccurrence.hpp"

namespace topicaux::corpus {

/// Dense symmetric V x V matrix of NPMI scores stored as 32-bit reals.
class NpmiMatrix {
 public:
  NpmiMatrix() = default;
  explicit NpmiMatrix(std::size_t vocab_size, float fill = 0.0f)
      : vocab_size_(vocab_size), values_(vocab_size * vocab_size, fill) {}

  std::size_t vocab_size() const noexcept { return vocab_size_; }
  float operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * vocab_size_ + j]; }
  float& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * vocab_size_ + j]; }
  std::span<const float> row(std::size_t i) const noexcept { return {values_.data() + i * vocab_size_, vocab_size_}; }
  std::span<const float> values() const noexcept { return values_; }
  std::span<float> values() noexcept { return values_; }

  friend bool operator==(const NpmiMatrix&, const NpmiMatrix&) = default;

 private:
  std::size_t vocab_size_ = 0;
  std::vector<float> values_;
};

/// NPMI of one pair from window counts, with the conventions
///   joint == 0, both marginals > 0    -> -1
///   either marginal == 0              ->  0
///   P(i,j) == P(i) == P(j)            ->  1  (covers i == j and P == 1)
/// and the result clamped to [-1, 1].
double npmi_value(const CoocCounts& counts, WordId i, WordId j);

/// Requires counts.window_count > 0.
NpmiMatrix npmi_matrix(const CoocCounts& counts);

/// Cache layout (little-endian):
///   bytes 0..7   magic "TXNPMI\0\1"
///   bytes 8..11  u32 format version (1)
///   bytes 12..19 u64 V
///   then V*V f32, row-major.
void save_npmi(const std::filesystem::path& path, const NpmiMatrix& m);
/// Throws FormatError on bad magic/version, truncation, trailing bytes, or
/// when `expected_vocab_size` is given and differs from the stored V.
NpmiMatrix load_npmi(const std::filesystem::path& path, std::optional<std::size_t> expected_vocab_size = std::nullopt);

}  // namespace topicaux::corpus
