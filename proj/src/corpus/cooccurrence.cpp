#include "topicaux/corpus/cooccurrence.hpp"

#include <algorithm>
#include <thread>

#include "topicaux/common/error.hpp"

namespace topicaux::corpus {

std::uint64_t CoocCounts::pair(WordId i, WordId j) const {
  if (i >= vocab_size || j >= vocab_size) throw DimensionError("CoocCounts::pair: word id out of range");
  if (i == j) return word_windows[i];
  const auto it = pair_windows.find(pair_key(i, j));
  return it == pair_windows.end() ? 0 : it->second;
}

void CoocCounts::merge(const CoocCounts& other) {
  if (other.vocab_size != vocab_size || other.window != window)
    throw DimensionError("CoocCounts::merge: incompatible shards");
  window_count += other.window_count;
  for (std::size_t i = 0; i < vocab_size; ++i) word_windows[i] += other.word_windows[i];
  for (const auto& [key, n] : other.pair_windows) pair_windows[key] += n;
}

namespace {

// Counts the windows of one document. `present` holds the current window's
// multiplicities; `distinct` its distinct ids.
void count_document(const TokenSequence& doc, CoocCounts& out, std::vector<std::uint32_t>& present) {
  if (doc.empty()) return;
  const std::size_t w = std::min(out.window, doc.size());
  const std::size_t n_windows = doc.size() - w + 1;
  std::vector<WordId> distinct;
  distinct.reserve(w);

  for (std::size_t i = 0; i < w; ++i) ++present[doc[i]];
  for (std::size_t start = 0; start < n_windows; ++start) {
    if (start > 0) {
      --present[doc[start - 1]];
      ++present[doc[start + w - 1]];
    }
    distinct.clear();
    for (std::size_t i = start; i < start + w; ++i) {
      const WordId id = doc[i];
      if (present[id] != 0 && std::find(distinct.begin(), distinct.end(), id) == distinct.end())
        distinct.push_back(id);
    }
    std::sort(distinct.begin(), distinct.end());
    ++out.window_count;
    for (std::size_t a = 0; a < distinct.size(); ++a) {
      ++out.word_windows[distinct[a]];
      for (std::size_t b = a + 1; b < distinct.size(); ++b) ++out.pair_windows[out.pair_key(distinct[a], distinct[b])];
    }
  }
  for (std::size_t i = n_windows - 1; i < n_windows - 1 + w; ++i) --present[doc[i]];
}

CoocCounts count_range(std::span<const TokenSequence> docs, std::size_t vocab_size, std::size_t window) {
  CoocCounts out;
  out.vocab_size = vocab_size;
  out.window = window;
  out.word_windows.assign(vocab_size, 0);
  std::vector<std::uint32_t> present(vocab_size, 0);
  for (const auto& doc : docs) count_document(doc, out, present);
  return out;
}

}  // namespace

CoocCounts count_cooccurrences(std::span<const TokenSequence> docs, std::size_t vocab_size, std::size_t window,
                               unsigned threads) {
  if (window < 1) throw ConfigError("co-occurrence window must be >= 1");
  for (const auto& doc : docs)
    for (WordId id : doc)
      if (id >= vocab_size) throw DimensionError("count_cooccurrences: word id out of vocabulary range");
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(docs.size(), 1))));
  if (threads == 1) return count_range(docs, vocab_size, window);

  std::vector<CoocCounts> shards(threads);
  std::vector<std::thread> workers;
  const std::size_t per = (docs.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(docs.size(), t * per);
    const std::size_t end = std::min(docs.size(), begin + per);
    workers.emplace_back([&, t, begin, end] { shards[t] = count_range(docs.subspan(begin, end - begin), vocab_size, window); });
  }
  for (auto& w : workers) w.join();
  CoocCounts total = std::move(shards[0]);
  for (unsigned t = 1; t < threads; ++t) total.merge(shards[t]);
  return total;
}

}  // namespace topicaux::corpus
