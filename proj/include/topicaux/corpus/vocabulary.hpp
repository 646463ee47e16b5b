#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace topicaux::corpus {

using WordId = std::uint32_t;

/// Bijection between tokens and dense ids [0, V).
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Ids follow the order of `words`. Throws FormatError on duplicates.
  explicit Vocabulary(std::vector<std::string> words);

  std::size_t size() const noexcept { return words_.size(); }
  const std::string& word(WordId id) const { return words_.at(id); }
  std::optional<WordId> find(std::string_view token) const;
  const std::vector<std::string>& words() const noexcept { return words_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId, Hash, std::equal_to<>> index_;
};

/// One token per line; ids by line order. Blank lines are ignored.
/// Errors: missing/empty file, duplicate token, fewer than 2 tokens.
Vocabulary load_vocabulary(const std::filesystem::path& path);
void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);

}  // namespace topicaux::corpus
