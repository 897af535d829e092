#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "psim/corpus.hpp"

namespace psim {

using TokenId = std::uint32_t;

/// Token <-> id map with corpus frequencies. Ids are positions in tokens().
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Throws FormatError on duplicate tokens or size mismatch.
  Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> counts);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }

  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::uint64_t count(TokenId id) const { return counts_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t total_count() const { return total_; }

  /// Absent for unknown tokens; never a fallback id.
  std::optional<TokenId> find(std::string_view token) const;
  /// Throws NotFoundError for unknown tokens.
  TokenId at(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.counts_ == b.counts_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, TokenId> index_;
  std::uint64_t total_ = 0;
};

/// Keeps tokens seen at least min_count times, ordered by descending count
/// with ties broken lexicographically.
Vocabulary build_vocabulary(const TrainingCorpus& corpus, std::uint64_t min_count);
Vocabulary build_vocabulary(std::span<const std::string> tokens, std::uint64_t min_count);

}  // namespace psim
