#include "topicaux/eval/report.hpp"

#include "topicaux/common/error.hpp"
#include "topicaux/common/json_writer.hpp"
#include "topicaux/eval/metrics.hpp"
#include "topicaux/ntm/topics.hpp"

namespace topicaux::eval {

EvalReport evaluate_all(const ntm::Checkpoint& ckpt, const corpus::NpmiMatrix& npmi,
                        const corpus::WordVectors* vectors, const EvalOptions& options) {
  const std::size_t V = ckpt.config.vocab_size;
  if (npmi.vocab_size() != V)
    throw DimensionError("vocabulary mismatch: NPMI matrix has V=" + std::to_string(npmi.vocab_size()) +
                         ", checkpoint has V=" + std::to_string(V));
  if (!ckpt.vocabulary.empty() && ckpt.vocabulary.size() != V)
    throw DimensionError("vocabulary mismatch inside the checkpoint");
  if (options.top_words < 2 || options.top_words > V) throw ConfigError("top_words must lie in [2, V]");

  const ntm::TopicSet topics = ntm::extract_topics(ckpt.params.beta.value, options.top_words);
  const TopicLists ids = ntm::topic_word_ids(topics);

  EvalReport r;
  r.num_topics = topics.size();
  r.options = options;
  for (const auto& list : ids) {
    std::vector<std::string> words;
    for (const auto w : list) words.push_back(ckpt.vocabulary.empty() ? std::to_string(w) : ckpt.vocabulary[w]);
    r.top_words.push_back(std::move(words));
  }

  const CoherenceScore c = topic_npmi(ids, npmi);
  r.npmi = c.mean;
  r.per_topic_npmi = c.per_topic;
  r.tu = topic_uniqueness(ids);
  r.irbo = inverted_rbo(ids, options.rbo_p);

  if (vectors == nullptr) {
    r.we_note = "no word vectors given";
  } else {
    if (ckpt.vocabulary.empty()) throw ConfigError("WE needs a checkpoint that stores its vocabulary");
    EmbeddingScore we = topic_we(r.top_words, *vectors);
    r.we = we.mean;
    r.we_skipped_pairs = we.skipped_pairs;
    for (const auto& w : we.warnings) r.we_note += (r.we_note.empty() ? "" : "; ") + w;
  }
  return r;
}

std::string to_json(const EvalReport& r) {
  json::Writer per_topic(2);
  for (const double v : r.per_topic_npmi) per_topic.item(json::fixed(v));
  json::Writer words(2);
  for (const auto& list : r.top_words) {
    json::Writer w;
    for (const auto& s : list) w.item(json::quote(s));
    words.item(w.inline_array());
  }
  json::Writer config(2);
  config.field("K", std::to_string(r.num_topics))
      .field("top_words", std::to_string(r.options.top_words))
      .field("rbo_p", json::fixed(r.options.rbo_p));

  json::Writer doc;
  doc.field("npmi", json::fixed(r.npmi))
      .field("we", json::fixed(r.we))
      .field("tu", json::fixed(r.tu))
      .field("irbo", json::fixed(r.irbo))
      .field("per_topic_npmi", per_topic.inline_array())
      .field("top_words", words.array())
      .field("config", config.object())
      .field("we_skipped_pairs", std::to_string(r.we_skipped_pairs));
  if (!r.we_note.empty()) doc.field("we_note", json::quote(r.we_note));
  return doc.object() + "\n";
}

EvalReport mean_report(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw ConfigError("no reports to average");
  EvalReport m;
  m.num_topics = reports.front().num_topics;
  m.options = reports.front().options;
  double we_sum = 0.0;
  std::size_t we_n = 0;
  for (const auto& r : reports) {
    if (r.num_topics != m.num_topics) throw ConfigError("cannot average reports with different K");
    m.npmi += r.npmi;
    m.tu += r.tu;
    m.irbo += r.irbo;
    m.we_skipped_pairs += r.we_skipped_pairs;
    if (r.we) {
      we_sum += *r.we;
      ++we_n;
    }
  }
  const double n = static_cast<double>(reports.size());
  m.npmi /= n;
  m.tu /= n;
  m.irbo /= n;
  if (we_n > 0) m.we = we_sum / static_cast<double>(we_n);
  else m.we_note = "no word vectors given";
  return m;
}

}  // namespace topicaux::eval
