#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "psim/corpus.hpp"
#include "psim/embedding_model.hpp"
#include "psim/negative_sampler.hpp"

namespace psim {

/// kSgns scores a pair as s(c, t) = c.t; kSourceAugmented adds the document's
/// source vector to the context side, s(t, c, d) = t.(c + d).
enum class TrainMode { kSgns, kSourceAugmented };

TrainMode parse_train_mode(std::string_view name);
const char* to_string(TrainMode mode);

struct TrainConfig {
  int dim = 100;
  int window = 8;
  int epochs = 5;
  int negatives = 5;
  double learning_rate_start = 0.025;
  double learning_rate_end = 0.0001;
  std::uint64_t min_count = 5;
  std::uint64_t seed = 1;
  TrainMode mode = TrainMode::kSgns;
  /// Frequent-word subsampling threshold; 0 disables it.
  double subsample = 0.0;
  /// 1 runs the deterministic single-threaded loop. Larger values shard
  /// documents over OpenMP threads with unsynchronized (Hogwild) updates, and
  /// results are then no longer bit-reproducible.
  int threads = 1;

  /// Throws UsageError when an invariant is violated.
  void validate() const;
};

/// One positive (center, context) pair. `source` indexes the corpus source
/// labels in lexicographic order.
struct TrainingPair {
  TokenId target;
  TokenId context;
  std::uint32_t source;
};

/// Every (center, context) pair within `window` positions, document by
/// document. Tokens outside the vocabulary are dropped before windowing,
/// the same way training drops them.
std::vector<TrainingPair> enumerate_pairs(const TrainingCorpus& corpus, const Vocabulary& vocab,
                                          std::span<const std::string> source_labels, int window);

/// Explicit negative-sample assignment: `per_pair` ids for each pair, stored
/// contiguously in pair order.
struct FixedNegatives {
  int per_pair = 0;
  std::vector<TokenId> ids;

  std::span<const TokenId> for_pair(std::size_t pair) const {
    return std::span<const TokenId>(ids).subspan(pair * per_pair, per_pair);
  }
};

FixedNegatives draw_fixed_negatives(const Vocabulary& vocab, std::size_t pair_count, int per_pair,
                                    std::uint64_t seed);

/// log(1 + e^-x), evaluated without overflow.
double logistic_loss(double x);

/// Loss of one positive pair plus its negatives. With u = c (+ d in
/// source-augmented mode):
///   l(t.u) + sum_n l(-n.u)
/// Negatives stand in for the target word, so the source vector is contrasted
/// against sampled words rather than acting as a bias. `source` is empty in
/// kSgns mode.
struct PairGradient {
  Eigen::VectorXd target;
  Eigen::VectorXd context;
  Eigen::VectorXd source;
  std::vector<Eigen::VectorXd> negatives;
};
double pair_loss(const Eigen::VectorXd& target, const Eigen::VectorXd& context,
                 const Eigen::VectorXd& source, std::span<const Eigen::VectorXd> negatives,
                 PairGradient* gradient = nullptr);

/// Sum of pair_loss over all pairs with the given negatives.
double objective_value(const EmbeddingModel& model, std::span<const TrainingPair> pairs,
                       const FixedNegatives& negatives, TrainMode mode);
double objective_value(const EmbeddingModel& model, const TrainingCorpus& corpus,
                       const TrainConfig& config, const FixedNegatives& negatives);

/// Mutable parameter matrices during training.
struct TrainState {
  RowMatrixXf targets;
  RowMatrixXf contexts;
  RowMatrixXf sources;
};

/// Targets uniform in [-0.5/dim, 0.5/dim]; contexts and sources zero.
TrainState initial_state(std::size_t vocab_size, std::size_t source_count,
                         const TrainConfig& config);

/// One SGD step on a positive pair and its negatives (target-matrix rows).
/// Negatives equal to the target id are skipped. Pass source < 0 in kSgns
/// mode.
void sgd_pair_step(TrainState& state, TokenId target, TokenId context, long source,
                   std::span<const TokenId> negatives, float learning_rate);

/// Vocabulary and sources for `corpus` with random initial vectors; this is
/// what train() returns when epochs == 0.
EmbeddingModel initial_model(const TrainingCorpus& corpus, const TrainConfig& config);

/// Called after each completed epoch (1-based) with the current parameters.
using EpochObserver = std::function<void(int epoch, const TrainState& state)>;

EmbeddingModel train(const TrainingCorpus& corpus, const TrainConfig& config,
                     const EpochObserver& observer = {});

}  // namespace psim
