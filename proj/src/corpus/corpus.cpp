#include "topicaux/corpus/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <string>
#include <unordered_map>

#include "topicaux/common/error.hpp"
#include "topicaux/common/text.hpp"

namespace topicaux::corpus {

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  std::vector<std::string> lines;
  std::string line;
  bool any_token = false;
  while (std::getline(in, line)) {
    any_token = any_token || !text::trim(line).empty();
    lines.push_back(std::move(line));
  }
  if (!any_token) throw FormatError("corpus file " + path.string() + " is empty");
  return lines;
}

LoadedCorpus encode(const std::vector<std::string>& lines, Vocabulary vocab) {
  if (vocab.size() < 2)
    throw FormatError("vocabulary has " + std::to_string(vocab.size()) + " token(s) after filtering; need at least 2");
  LoadedCorpus out;
  out.source_lines = lines.size();
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    TokenSequence seq;
    for (const auto tok : text::split_ws(lines[ln]))
      if (const auto id = vocab.find(tok)) seq.push_back(*id);
    if (seq.empty()) {
      out.dropped_lines.push_back(ln + 1);
      continue;
    }
    out.sequences.push_back(std::move(seq));
  }
  if (out.sequences.empty()) throw FormatError("no document contains an in-vocabulary token");
  out.bow = make_bow(out.sequences, vocab.size());
  out.vocab = std::move(vocab);
  return out;
}

}  // namespace

BowCorpus make_bow(std::span<const TokenSequence> sequences, std::size_t vocab_size) {
  BowCorpus bow;
  bow.vocab_size = vocab_size;
  bow.docs.reserve(sequences.size());
  for (const auto& seq : sequences) {
    TokenSequence sorted = seq;
    std::sort(sorted.begin(), sorted.end());
    std::vector<BowEntry> doc;
    for (std::size_t i = 0; i < sorted.size();) {
      if (sorted[i] >= vocab_size) throw DimensionError("word id out of vocabulary range");
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      doc.push_back({sorted[i], static_cast<std::uint32_t>(j - i)});
      bow.total_tokens += j - i;
      i = j;
    }
    bow.docs.push_back(std::move(doc));
  }
  return bow;
}

LoadedCorpus load_corpus(const std::filesystem::path& path, const CorpusOptions& options) {
  if (options.min_df < 1) throw ConfigError("min_df must be >= 1");
  const auto lines = read_lines(path);

  struct Stats {
    std::uint64_t tf = 0;
    std::uint64_t df = 0;
    std::size_t last_doc = static_cast<std::size_t>(-1);
  };
  std::unordered_map<std::string, Stats> stats;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    for (const auto tok : text::split_ws(lines[ln])) {
      auto& s = stats[std::string(tok)];
      ++s.tf;
      if (s.last_doc != ln) {
        ++s.df;
        s.last_doc = ln;
      }
    }
  }

  std::vector<std::pair<std::string, std::uint64_t>> ranked;
  for (auto& [tok, s] : stats)
    if (s.df >= options.min_df) ranked.emplace_back(tok, s.tf);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > options.max_vocab) ranked.resize(options.max_vocab);

  std::vector<std::string> words;
  words.reserve(ranked.size());
  for (auto& r : ranked) words.push_back(std::move(r.first));
  return encode(lines, Vocabulary(std::move(words)));
}

LoadedCorpus load_corpus(const std::filesystem::path& path, const Vocabulary& vocab) {
  return encode(read_lines(path), vocab);
}

}  // namespace topicaux::corpus
