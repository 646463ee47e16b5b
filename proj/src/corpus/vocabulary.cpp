#include "topicaux/corpus/vocabulary.hpp"

#include <fstream>

#include "topicaux/common/error.hpp"
#include "topicaux/common/text.hpp"

namespace topicaux::corpus {

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<WordId>(i)).second)
      throw FormatError("duplicate vocabulary token '" + words_[i] + "'");
  }
}

std::optional<WordId> Vocabulary::find(std::string_view token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto token = text::trim(line);
    if (token.empty()) continue;
    words.emplace_back(token);
  }
  if (words.empty()) throw FormatError("vocabulary file " + path.string() + " is empty");
  Vocabulary vocab(std::move(words));
  if (vocab.size() < 2) throw FormatError("vocabulary needs at least 2 tokens: " + path.string());
  return vocab;
}

void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write vocabulary file " + path.string());
  for (const auto& w : vocab.words()) out << w << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace topicaux::corpus
