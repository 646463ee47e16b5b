#include "topicaux/ntm/topics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "topicaux/common/error.hpp"

namespace topicaux::ntm {

TopicSet extract_topics(const num::Matrix& beta, std::size_t n) {
  const std::size_t V = beta.cols();
  if (n < 1 || n > V) throw ConfigError("top-n must lie in [1, V]");
  TopicSet topics(beta.rows());
  std::vector<std::size_t> order(V);
  std::vector<double> prob(V);
  for (std::size_t k = 0; k < beta.rows(); ++k) {
    const auto row = beta.row(k);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (std::size_t i = 0; i < V; ++i) z += (prob[i] = std::exp(row[i] - m));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                      [&](std::size_t a, std::size_t b) { return row[a] != row[b] ? row[a] > row[b] : a < b; });
    topics[k].reserve(n);
    for (std::size_t r = 0; r < n; ++r)
      topics[k].push_back({static_cast<corpus::WordId>(order[r]), prob[order[r]] / z});
  }
  return topics;
}

std::vector<std::vector<corpus::WordId>> topic_word_ids(const TopicSet& topics) {
  std::vector<std::vector<corpus::WordId>> ids(topics.size());
  for (std::size_t k = 0; k < topics.size(); ++k)
    for (const auto& tw : topics[k]) ids[k].push_back(tw.word);
  return ids;
}

}  // namespace topicaux::ntm
