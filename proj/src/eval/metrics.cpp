#include "topicaux/eval/metrics.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "topicaux/common/error.hpp"

namespace topicaux::eval {

namespace {

void check_lists(const TopicLists& topics, std::size_t vocab_size) {
  if (topics.empty()) throw ConfigError("no topics to evaluate");
  for (const auto& list : topics) {
    if (list.size() < 2) throw ConfigError("every topic needs at least two words");
    for (const auto w : list)
      if (w >= vocab_size)
        throw DimensionError("topic word id " + std::to_string(w) + " is outside the vocabulary (V=" +
                             std::to_string(vocab_size) + ")");
  }
}

template <typename PairScore>
CoherenceScore pairwise_mean(const TopicLists& topics, PairScore&& score) {
  CoherenceScore out;
  for (const auto& list : topics) {
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < list.size(); ++a)
      for (std::size_t b = a + 1; b < list.size(); ++b, ++pairs) total += score(list[a], list[b]);
    out.per_topic.push_back(total / static_cast<double>(pairs));
  }
  double sum = 0.0;
  for (const double v : out.per_topic) sum += v;
  out.mean = sum / static_cast<double>(out.per_topic.size());
  return out;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

CoherenceScore topic_npmi(const TopicLists& topics, const corpus::CoocCounts& counts) {
  check_lists(topics, counts.vocab_size);
  return pairwise_mean(topics, [&](corpus::WordId i, corpus::WordId j) { return corpus::npmi_value(counts, i, j); });
}

CoherenceScore topic_npmi(const TopicLists& topics, const corpus::NpmiMatrix& npmi) {
  check_lists(topics, npmi.vocab_size());
  return pairwise_mean(topics,
                       [&](corpus::WordId i, corpus::WordId j) { return static_cast<double>(npmi(i, j)); });
}

EmbeddingScore topic_we(const std::vector<std::vector<std::string>>& topics, const corpus::WordVectors& vectors) {
  EmbeddingScore out;
  double sum = 0.0;
  std::size_t scored = 0;
  for (std::size_t k = 0; k < topics.size(); ++k) {
    const auto& list = topics[k];
    std::vector<const std::vector<double>*> vecs;
    for (const auto& w : list) vecs.push_back(vectors.find(w));
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < list.size(); ++a)
      for (std::size_t b = a + 1; b < list.size(); ++b) {
        if (vecs[a] == nullptr || vecs[b] == nullptr) {
          ++out.skipped_pairs;
          continue;
        }
        total += cosine(*vecs[a], *vecs[b]);
        ++pairs;
      }
    if (pairs == 0) {
      out.per_topic.emplace_back();
      out.warnings.push_back("topic " + std::to_string(k) + " has no word pair with vectors; excluded from WE");
      continue;
    }
    const double v = total / static_cast<double>(pairs);
    out.per_topic.emplace_back(v);
    sum += v;
    ++scored;
  }
  if (scored > 0) out.mean = sum / static_cast<double>(scored);
  return out;
}

double topic_uniqueness(const TopicLists& topics) {
  if (topics.empty()) throw ConfigError("no topics to evaluate");
  std::unordered_map<corpus::WordId, std::size_t> cnt;
  for (const auto& list : topics) {
    // a word repeated inside one list still counts that list once
    const std::unordered_set<corpus::WordId> distinct(list.begin(), list.end());
    for (const auto w : distinct) ++cnt[w];
  }
  double tu = 0.0;
  for (const auto& list : topics) {
    if (list.empty()) throw ConfigError("empty topic list");
    double s = 0.0;
    for (const auto w : list) s += 1.0 / static_cast<double>(cnt[w]);
    tu += s / static_cast<double>(list.size());
  }
  return tu / static_cast<double>(topics.size());
}

double rbo(std::span<const corpus::WordId> s, std::span<const corpus::WordId> t, double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("RBO persistence p must lie in (0, 1)");
  if (s.size() != t.size() || s.empty()) throw DimensionError("RBO needs two non-empty lists of equal length");
  std::unordered_set<corpus::WordId> seen_s, seen_t;
  std::size_t overlap = 0;
  double num = 0.0, norm = 0.0, weight = 1.0;
  for (std::size_t d = 0; d < s.size(); ++d) {
    // add s[d] and t[d] to the prefixes and update |S:d & T:d|
    if (s[d] == t[d]) {
      if (!seen_s.contains(s[d]) && !seen_t.contains(s[d])) ++overlap;
    } else {
      if (!seen_s.contains(s[d]) && seen_t.contains(s[d])) ++overlap;
      if (!seen_t.contains(t[d]) && seen_s.contains(t[d])) ++overlap;
    }
    seen_s.insert(s[d]);
    seen_t.insert(t[d]);
    num += weight * static_cast<double>(overlap) / static_cast<double>(d + 1);
    norm += weight;
    weight *= p;
  }
  return num / norm;
}

double inverted_rbo(const TopicLists& topics, double p) {
  if (topics.size() < 2) throw ConfigError("I-RBO needs at least two topics");
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < topics.size(); ++a)
    for (std::size_t b = a + 1; b < topics.size(); ++b, ++pairs) total += rbo(topics[a], topics[b], p);
  return 1.0 - total / static_cast<double>(pairs);
}

}  // namespace topicaux::eval
