#include "psim/vocabulary.hpp"

#include <algorithm>
#include <numeric>

#include "psim/error.hpp"

namespace psim {

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> counts)
    : tokens_(std::move(tokens)), counts_(std::move(counts)) {
  if (tokens_.size() != counts_.size()) {
    throw FormatError("vocabulary: " + std::to_string(tokens_.size()) + " tokens but " +
                      std::to_string(counts_.size()) + " counts");
  }
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
    if (!inserted) throw FormatError("vocabulary: duplicate token '" + tokens_[i] + "'");
  }
  total_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::at(std::string_view token) const {
  if (auto id = find(token)) return *id;
  throw NotFoundError("token '" + std::string(token) + "' is not in the vocabulary");
}

namespace {

Vocabulary from_tally(const std::unordered_map<std::string, std::uint64_t>& tally,
                      std::uint64_t min_count) {
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto& [token, n] : tally) {
    if (n >= min_count) kept.emplace_back(token, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  tokens.reserve(kept.size());
  counts.reserve(kept.size());
  for (auto& [token, n] : kept) {
    tokens.push_back(std::move(token));
    counts.push_back(n);
  }
  return Vocabulary(std::move(tokens), std::move(counts));
}

void check_min_count(std::uint64_t min_count) {
  if (min_count < 1) throw UsageError("min_count must be at least 1");
}

}  // namespace

Vocabulary build_vocabulary(const TrainingCorpus& corpus, std::uint64_t min_count) {
  check_min_count(min_count);
  std::unordered_map<std::string, std::uint64_t> tally;
  for (const auto& doc : corpus.documents) {
    for (const auto& token : doc.tokens) ++tally[token];
  }
  if (tally.empty()) throw EmptyInputError("cannot build a vocabulary from an empty corpus");
  return from_tally(tally, min_count);
}

Vocabulary build_vocabulary(std::span<const std::string> tokens, std::uint64_t min_count) {
  check_min_count(min_count);
  if (tokens.empty()) throw EmptyInputError("cannot build a vocabulary from an empty corpus");
  std::unordered_map<std::string, std::uint64_t> tally;
  for (const auto& token : tokens) ++tally[token];
  return from_tally(tally, min_count);
}

}  // namespace psim
