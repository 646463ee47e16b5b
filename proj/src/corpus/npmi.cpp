#include "topicaux/corpus/npmi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

#include "topicaux/common/binary_io.hpp"
#include "topicaux/common/error.hpp"

namespace topicaux::corpus {

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'X', 'N', 'P', 'M', 'I', '\0', '\1'};
constexpr std::uint32_t kVersion = 1;

double from_counts(std::uint64_t joint, std::uint64_t ni, std::uint64_t nj, std::uint64_t total) {
  if (ni == 0 || nj == 0) return 0.0;
  if (joint == 0) return -1.0;
  if (joint == ni && joint == nj) return 1.0;
  const double n = static_cast<double>(total);
  const double p_ij = static_cast<double>(joint) / n;
  const double p_i = static_cast<double>(ni) / n;
  const double p_j = static_cast<double>(nj) / n;
  const double v = std::log(p_ij / (p_i * p_j)) / -std::log(p_ij);
  return std::clamp(v, -1.0, 1.0);
}

}  // namespace

double npmi_value(const CoocCounts& counts, WordId i, WordId j) {
  return from_counts(counts.pair(i, j), counts.word_windows.at(i), counts.word_windows.at(j), counts.window_count);
}

NpmiMatrix npmi_matrix(const CoocCounts& counts) {
  if (counts.window_count == 0) throw FormatError("npmi_matrix: no windows counted");
  const std::size_t V = counts.vocab_size;
  NpmiMatrix m(V);
  const auto& ww = counts.word_windows;
  for (std::size_t i = 0; i < V; ++i)
    for (std::size_t j = 0; j < V; ++j)
      m(i, j) = static_cast<float>(from_counts(i == j ? ww[i] : 0, ww[i], ww[j], counts.window_count));
  for (const auto& [key, joint] : counts.pair_windows) {
    const std::size_t i = key / V, j = key % V;
    const auto v = static_cast<float>(from_counts(joint, ww[i], ww[j], counts.window_count));
    m(i, j) = v;
    m(j, i) = v;
  }
  return m;
}

void save_npmi(const std::filesystem::path& path, const NpmiMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write NPMI cache " + path.string());
  out.write(kMagic.data(), kMagic.size());
  binio::write_u32(out, kVersion);
  binio::write_u64(out, m.vocab_size());
  binio::write_f32_array(out, m.values());
  if (!out) throw IoError("failed writing NPMI cache " + path.string());
}

NpmiMatrix load_npmi(const std::filesystem::path& path, std::optional<std::size_t> expected_vocab_size) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open NPMI cache " + path.string());
  std::array<char, 8> magic{};
  binio::read_exact(in, magic.data(), magic.size(), "NPMI cache header");
  if (magic != kMagic) throw FormatError("not an NPMI cache: " + path.string());
  const auto version = binio::read_u32(in, "NPMI cache header");
  if (version != kVersion) throw FormatError("unsupported NPMI cache version " + std::to_string(version));
  const auto V = binio::read_u64(in, "NPMI cache header");
  if (expected_vocab_size && *expected_vocab_size != V)
    throw FormatError("NPMI cache declares V=" + std::to_string(V) + " but vocabulary has " +
                      std::to_string(*expected_vocab_size) + " tokens");
  if (V > (1ull << 20)) throw FormatError("NPMI cache declares implausible V=" + std::to_string(V));
  NpmiMatrix m(static_cast<std::size_t>(V));
  binio::read_f32_array(in, m.values(), "NPMI cache body");
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after NPMI cache body");
  return m;
}

}  // namespace topicaux::corpus
