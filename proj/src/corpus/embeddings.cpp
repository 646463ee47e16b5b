#include "topicaux/corpus/embeddings.hpp"

#include <fstream>

#include "topicaux/common/error.hpp"
#include "topicaux/common/text.hpp"

namespace topicaux::corpus {

namespace {

std::vector<double> parse_values(std::span<const std::string_view> fields, const std::filesystem::path& path,
                                 std::size_t line_no) {
  std::vector<double> v;
  v.reserve(fields.size());
  for (const auto f : fields) {
    const auto d = text::parse_double(f);
    if (!d) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": not a number '" + std::string(f) + "'");
    v.push_back(*d);
  }
  return v;
}

void check_dim(std::size_t& dim, std::size_t got, const std::filesystem::path& path, std::size_t line_no) {
  if (got == 0) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": no values");
  if (dim == 0) dim = got;
  if (got != dim)
    throw FormatError(path.string() + ":" + std::to_string(line_no) + ": dimension " + std::to_string(got) +
                      " differs from " + std::to_string(dim));
}

}  // namespace

WordVectors load_word_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word vectors " + path.string());
  WordVectors out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = text::split_ws(line);
    if (fields.empty()) continue;
    auto values = parse_values(std::span(fields).subspan(1), path, line_no);
    check_dim(out.dim, values.size(), path, line_no);
    if (!out.vectors.emplace(std::string(fields[0]), std::move(values)).second)
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": duplicate token '" + std::string(fields[0]) + "'");
  }
  if (out.vectors.empty()) throw FormatError("word vector file " + path.string() + " is empty");
  return out;
}

DocEmbeddings load_doc_embeddings(const std::filesystem::path& path, std::optional<std::size_t> expected_rows) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open document embeddings " + path.string());
  std::size_t dim = 0;
  std::vector<double> flat;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = text::split_ws(line);
    if (fields.empty()) continue;
    const auto values = parse_values(fields, path, line_no);
    check_dim(dim, values.size(), path, line_no);
    flat.insert(flat.end(), values.begin(), values.end());
    ++rows;
  }
  if (rows == 0) throw FormatError("document embedding file " + path.string() + " is empty");
  if (expected_rows && *expected_rows != rows)
    throw FormatError("document embeddings have " + std::to_string(rows) + " rows but the corpus has " +
                      std::to_string(*expected_rows) + " documents");
  return DocEmbeddings{dim, num::Matrix(rows, dim, std::move(flat))};
}

DocEmbeddings align_doc_embeddings(DocEmbeddings emb, std::size_t kept_docs, std::size_t source_lines,
                                   std::span<const std::size_t> dropped_lines) {
  if (emb.num_docs() == kept_docs) return emb;
  if (emb.num_docs() != source_lines)
    throw FormatError("document embeddings have " + std::to_string(emb.num_docs()) + " rows; expected " +
                      std::to_string(kept_docs) + " (kept documents) or " + std::to_string(source_lines) +
                      " (source lines)");
  num::Matrix kept(kept_docs, emb.dim);
  std::size_t out = 0, drop = 0;
  for (std::size_t r = 0; r < source_lines; ++r) {
    if (drop < dropped_lines.size() && dropped_lines[drop] == r + 1) {
      ++drop;
      continue;
    }
    std::copy(emb.rows.row(r).begin(), emb.rows.row(r).end(), kept.row(out).begin());
    ++out;
  }
  return DocEmbeddings{emb.dim, std::move(kept)};
}

}  // namespace topicaux::corpus
