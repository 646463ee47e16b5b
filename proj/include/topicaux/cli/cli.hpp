#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "topicaux/auxloss/config.hpp"
#include "topicaux/ntm/config.hpp"

namespace topicaux::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2 };

/// Everything a command can be configured with, from flags or a key=value
/// config file (flags win).
struct RunConfig {
  ntm::ModelConfig model;
  std::string input_mode = "bow";
  std::string aux = "none";  // none, wc or wd
  auxloss::AuxConfig aux_config;

  std::string corpus;
  std::string vocab;
  std::string npmi;
  std::string doc_embeddings;
  std::string word_vectors;
  std::string out;
  std::string resume;
  std::string seeds;
  std::vector<std::string> checkpoints;

  std::size_t window = 10;
  std::size_t min_df = 1;
  std::size_t max_vocab = 0;  // 0: unlimited
  unsigned threads = 1;
  std::size_t top_words = 10;
  double rbo_p = 0.9;
  bool quiet = false;
};

/// Flat `key = value` lines; '#' starts a comment. Keys are returned with
/// '_' replaced by '-'. Throws ConfigError on malformed or repeated keys.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// "3", "0..9" (inclusive) or "1,4,7".
std::vector<std::uint64_t> parse_seed_list(std::string_view spec);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Returns an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace topicaux::cli
