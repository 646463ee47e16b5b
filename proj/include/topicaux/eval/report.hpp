#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "topicaux/corpus/embeddings.hpp"
#include "topicaux/corpus/npmi.hpp"
#include "topicaux/ntm/checkpoint.hpp"

namespace topicaux::eval {

struct EvalOptions {
  std::size_t top_words = 10;
  double rbo_p = 0.9;
};

struct EvalReport {
  std::size_t num_topics = 0;
  EvalOptions options;
  double npmi = 0.0;
  std::vector<double> per_topic_npmi;
  std::optional<double> we;
  std::string we_note;  // why WE is null, or warnings
  std::size_t we_skipped_pairs = 0;
  double tu = 0.0;
  double irbo = 0.0;
  std::vector<std::vector<std::string>> top_words;
};

/// Extracts the top words of every topic and computes NPMI, WE (when
/// vectors are given), TU and I-RBO. The NPMI matrix must have the model's V.
EvalReport evaluate_all(const ntm::Checkpoint& ckpt, const corpus::NpmiMatrix& npmi,
                        const corpus::WordVectors* vectors, const EvalOptions& options = {});

/// JSON document with fields npmi, we, tu, irbo, per_topic_npmi, top_words,
/// config, we_skipped_pairs (and we_note when set). Reals use 4 decimals.
std::string to_json(const EvalReport& report);

/// Field-wise mean of reports from runs that differ only in the seed.
/// per_topic_npmi and top_words are dropped (topics do not align across
/// seeds); WE is averaged over the reports that have it.
EvalReport mean_report(const std::vector<EvalReport>& reports);

}  // namespace topicaux::eval
