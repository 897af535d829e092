#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "psim/embedding_model.hpp"
#include "psim/kernels.hpp"
#include "psim/vocabulary.hpp"

namespace psim {

/// Nonnegative per-token weights defining the distribution over target words
/// that a similarity is conditioned on. At least two tokens carry weight.
class WeightSpec {
 public:
  /// Throws UsageError on negative or non-finite weights and
  /// DegenerateConditioningError when fewer than two weights are positive.
  explicit WeightSpec(std::vector<double> weights);

  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  double total() const { return total_; }
  std::size_t support_size() const { return support_; }

 private:
  std::vector<double> weights_;
  double total_ = 0.0;
  std::size_t support_ = 0;
};

/// Weight 1 for keywords found in the vocabulary, 0 elsewhere.
WeightSpec indicator_weights(std::span<const std::string> keywords, const Vocabulary& vocab);
/// The focus token gets |V| - 1, every other token 1, so the focus holds half
/// of the total weight.
WeightSpec focus_weights(std::string_view focus, const Vocabulary& vocab);
/// Default unconditioned distribution.
WeightSpec uniform_weights(const Vocabulary& vocab);
/// Weights proportional to corpus counts.
WeightSpec frequency_weights(const Vocabulary& vocab);

/// Weighted mean and covariance of the target vectors under a WeightSpec.
/// Immutable; safe to share across threads.
class ConditionedMetric {
 public:
  /// Symmetrizes `covariance` and checks it is positive semidefinite
  /// (no eigenvalue below -1e-8 * largest). Throws DataError otherwise.
  static ConditionedMetric from_moments(Eigen::VectorXd mean, Eigen::MatrixXd covariance,
                                        double total_weight);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  double total_weight() const { return total_weight_; }
  double max_eigenvalue() const { return max_eigenvalue_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  ConditionedMetric() = default;

  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  double total_weight_ = 0.0;
  double max_eigenvalue_ = 0.0;
  double min_eigenvalue_ = 0.0;
};

/// mean = sum w_i t_i / sum w_i;  covariance = sum w_i (t_i - mean)(t_i - mean)^T / sum w_i
ConditionedMetric weighted_covariance(const RowMatrixXd& targets, const WeightSpec& weights,
                                      kernels::Execution exec = kernels::Execution::kParallel);

/// Convenience: covariance of a model's target vectors.
ConditionedMetric condition(const EmbeddingModel& model, const WeightSpec& weights,
                            kernels::Execution exec = kernels::Execution::kParallel);

}  // namespace psim
