#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topicaux/corpus/cooccurrence.hpp"
#include "topicaux/corpus/embeddings.hpp"
#include "topicaux/corpus/npmi.hpp"
#include "topicaux/corpus/vocabulary.hpp"

namespace topicaux::eval {

/// Ranked word ids per topic, best first.
using TopicLists = std::vector<std::vector<corpus::WordId>>;

struct CoherenceScore {
  double mean = 0.0;               // over topics
  std::vector<double> per_topic;   // mean over the topic's distinct word pairs
};

/// Pairwise NPMI over all unordered pairs of each list. The counts overload
/// evaluates in double precision; the matrix overload averages the stored
/// (float) entries. Throws DimensionError for ids outside the vocabulary and
/// ConfigError for lists shorter than 2.
CoherenceScore topic_npmi(const TopicLists& topics, const corpus::CoocCounts& counts);
CoherenceScore topic_npmi(const TopicLists& topics, const corpus::NpmiMatrix& npmi);

struct EmbeddingScore {
  std::optional<double> mean;                    // nullopt when no topic had a scorable pair
  std::vector<std::optional<double>> per_topic;  // nullopt: topic excluded
  std::size_t skipped_pairs = 0;                 // pairs with a missing vector
  std::vector<std::string> warnings;
};

/// Mean pairwise cosine similarity of word vectors; pairs with a missing
/// vector are skipped and counted.
EmbeddingScore topic_we(const std::vector<std::vector<std::string>>& topics, const corpus::WordVectors& vectors);

/// Mean over topics of mean over its words of 1 / (number of lists containing the word).
double topic_uniqueness(const TopicLists& topics);

/// Truncated rank-biased overlap at depth d = list length (both lists must
/// have it), normalized so identical lists score 1:
///   sum_{i=1..d} p^{i-1} |S[:i] & T[:i]| / i  /  sum_{i=1..d} p^{i-1}
double rbo(std::span<const corpus::WordId> s, std::span<const corpus::WordId> t, double p);

/// 1 - mean RBO over all unordered topic pairs; needs at least two topics.
double inverted_rbo(const TopicLists& topics, double p);

}  // namespace topicaux::eval
