#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "topicaux/corpus/corpus.hpp"

namespace topicaux::corpus {

/// Boolean sliding-window statistics: how many windows contain a word, and
/// how many contain both words of an unordered pair.
struct CoocCounts {
  std::size_t vocab_size = 0;
  std::size_t window = 0;
  std::uint64_t window_count = 0;
  std::vector<std::uint64_t> word_windows;
  /// Keyed by pair_key(i, j) with i < j; absent keys mean zero.
  std::unordered_map<std::uint64_t, std::uint64_t> pair_windows;

  std::uint64_t pair_key(WordId i, WordId j) const noexcept {
    if (i > j) std::swap(i, j);
    return static_cast<std::uint64_t>(i) * vocab_size + j;
  }
  /// Windows containing both i and j; for i == j this is word_windows[i].
  std::uint64_t pair(WordId i, WordId j) const;

  /// Adds another shard's counts; shards must share vocab_size and window.
  void merge(const CoocCounts& other);

  friend bool operator==(const CoocCounts&, const CoocCounts&) = default;
};

/// Every contiguous span of `window` tokens of a document is one window; a
/// document shorter than `window` is a single window and an empty one
/// contributes none. With threads > 1 documents are split into contiguous
/// shards whose counts are merged; the result equals serial counting.
CoocCounts count_cooccurrences(std::span<const TokenSequence> docs, std::size_t vocab_size,
                               std::size_t window = 10, unsigned threads = 1);

}  // namespace topicaux::corpus
