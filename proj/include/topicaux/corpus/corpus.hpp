#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "topicaux/corpus/vocabulary.hpp"

namespace topicaux::corpus {

struct BowEntry {
  WordId word;
  std::uint32_t count;

  friend bool operator==(const BowEntry&, const BowEntry&) = default;
};

/// Sparse document-term counts. Entries of each document are sorted by word id
/// and every count is >= 1.
struct BowCorpus {
  std::size_t vocab_size = 0;
  std::vector<std::vector<BowEntry>> docs;
  std::uint64_t total_tokens = 0;

  std::size_t num_docs() const noexcept { return docs.size(); }
};

using TokenSequence = std::vector<WordId>;

/// Result of reading a one-document-per-line corpus.
struct LoadedCorpus {
  Vocabulary vocab;
  BowCorpus bow;
  /// In-vocabulary token ids of each kept document, in original order.
  std::vector<TokenSequence> sequences;
  /// 1-based line numbers of documents dropped for having no in-vocabulary token.
  std::vector<std::size_t> dropped_lines;
  /// Number of lines read, kept or not.
  std::size_t source_lines = 0;
};

struct CorpusOptions {
  std::size_t min_df = 1;
  std::size_t max_vocab = std::numeric_limits<std::size_t>::max();
};

/// Builds the vocabulary from the corpus itself: tokens with document
/// frequency >= min_df, the max_vocab most frequent by total count, ties by
/// lexicographic order. Ids follow that ranking.
LoadedCorpus load_corpus(const std::filesystem::path& path, const CorpusOptions& options = {});

/// Reads the corpus against a fixed vocabulary; unknown tokens are removed.
LoadedCorpus load_corpus(const std::filesystem::path& path, const Vocabulary& vocab);

BowCorpus make_bow(std::span<const TokenSequence> sequences, std::size_t vocab_size);

}  // namespace topicaux::corpus
