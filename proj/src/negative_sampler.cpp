#include "psim/negative_sampler.hpp"

#include <algorithm>
#include <cmath>

#include "psim/error.hpp"

namespace psim {

UnigramTable::UnigramTable(const Vocabulary& vocab, double power) {
  if (vocab.empty()) throw EmptyInputError("negative sampling needs a nonempty vocabulary");
  cumulative_.resize(vocab.size());
  const bool uniform = vocab.total_count() == 0;
  double running = 0.0;
  for (TokenId i = 0; i < vocab.size(); ++i) {
    running += uniform ? 1.0 : std::pow(static_cast<double>(vocab.count(i)), power);
    cumulative_[i] = running;
  }
  for (auto& c : cumulative_) c /= running;
  cumulative_.back() = 1.0;
}

double UnigramTable::probability(TokenId id) const {
  const double upper = cumulative_.at(id);
  return id == 0 ? upper : upper - cumulative_[id - 1];
}

TokenId UnigramTable::draw(double u) const {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return static_cast<TokenId>(it - cumulative_.begin());
}

NegativeSampler::NegativeSampler(const Vocabulary& vocab, std::uint64_t seed, double power)
    : table_(vocab, power), rng_(derive_seed(seed, 0x6E6567 /* "neg" */)) {}

}  // namespace psim
