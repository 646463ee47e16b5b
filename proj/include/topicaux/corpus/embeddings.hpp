#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "topicaux/num/matrix.hpp"

namespace topicaux::corpus {

/// Pretrained word vectors ("token v1 ... vd" per line).
struct WordVectors {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;

  const std::vector<double>* find(std::string_view token) const {
    const auto it = vectors.find(std::string(token));
    return it == vectors.end() ? nullptr : &it->second;
  }
};

/// Per-document embeddings ("v1 ... vd" per line), one row per document.
struct DocEmbeddings {
  std::size_t dim = 0;
  num::Matrix rows;

  std::size_t num_docs() const noexcept { return rows.rows(); }
};

/// Errors: inconsistent dimension, non-numeric value, duplicate token, empty file.
WordVectors load_word_vectors(const std::filesystem::path& path);

/// Errors: inconsistent dimension, non-numeric value, empty file, and a row
/// count different from `expected_rows` when given.
DocEmbeddings load_doc_embeddings(const std::filesystem::path& path,
                                  std::optional<std::size_t> expected_rows = std::nullopt);

/// Aligns embeddings read for every source line with the kept documents.
/// Accepts either one row per kept document or one row per source line (in
/// which case the rows of `dropped_lines`, 1-based, are removed).
DocEmbeddings align_doc_embeddings(DocEmbeddings emb, std::size_t kept_docs, std::size_t source_lines,
                                   std::span<const std::size_t> dropped_lines);

}  // namespace topicaux::corpus
