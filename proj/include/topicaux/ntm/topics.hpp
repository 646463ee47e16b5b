#pragma once

#include <vector>

#include "topicaux/corpus/vocabulary.hpp"
#include "topicaux/num/matrix.hpp"

namespace topicaux::ntm {

struct TopicWord {
  corpus::WordId word;
  double prob;
};

/// Per topic, the top-n words by descending beta (ties by ascending id) with
/// their row-softmax probabilities.
using TopicSet = std::vector<std::vector<TopicWord>>;

TopicSet extract_topics(const num::Matrix& beta, std::size_t n);

/// Word ids only, e.g. for the evaluation metrics.
std::vector<std::vector<corpus::WordId>> topic_word_ids(const TopicSet& topics);

}  // namespace topicaux::ntm
