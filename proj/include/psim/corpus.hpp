#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace psim {

/// Lowercases and splits on Unicode whitespace and punctuation.
/// Input is UTF-8; invalid byte sequences are treated as separators.
std::vector<std::string> tokenize(std::string_view text);

struct Document {
  std::string source;
  std::vector<std::string> tokens;
};

/// Tokenized documents, each tagged with the label of the source it came from
/// (a domain name, a party identifier, ...).
struct TrainingCorpus {
  std::vector<Document> documents;

  std::size_t token_count() const;
  /// Distinct source labels in lexicographic order.
  std::vector<std::string> source_labels() const;
};

/// One JSON object per line with string fields "source" and "text".
/// Blank lines are skipped.
TrainingCorpus read_corpus_jsonl(std::istream& in);
TrainingCorpus read_corpus_file(const std::filesystem::path& path);

}  // namespace psim
