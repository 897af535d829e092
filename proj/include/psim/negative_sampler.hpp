#pragma once

#include <cstdint>
#include <vector>

#include "psim/rng.hpp"
#include "psim/vocabulary.hpp"

namespace psim {

/// Unigram distribution raised to a power (0.75 by default) and renormalized.
/// A vocabulary whose counts are all zero falls back to uniform.
class UnigramTable {
 public:
  explicit UnigramTable(const Vocabulary& vocab, double power = 0.75);

  std::size_t size() const { return cumulative_.size(); }
  double probability(TokenId id) const;
  /// Maps u in [0, 1) to a token id by inverting the cumulative distribution.
  TokenId draw(double u) const;
  TokenId draw(Rng& rng) const { return draw(uniform01(rng)); }

 private:
  std::vector<double> cumulative_;
};

/// Deterministic stream of negative-sample ids for a given seed.
class NegativeSampler {
 public:
  NegativeSampler(const Vocabulary& vocab, std::uint64_t seed, double power = 0.75);

  TokenId next() { return table_.draw(rng_); }
  const UnigramTable& table() const { return table_; }

 private:
  UnigramTable table_;
  Rng rng_;
};

}  // namespace psim
