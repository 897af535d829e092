#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "psim/conditioning.hpp"
#include "psim/embedding_model.hpp"
#include "psim/kernels.hpp"

namespace psim {

/// Two vectors compared under a conditioned metric. The metric must outlive
/// the query.
struct SimilarityQuery {
  Eigen::VectorXd left;
  Eigen::VectorXd right;
  const ConditionedMetric* metric = nullptr;
};

/// Predictive similarity in closed form:
///
///   x^T C y / sqrt(x^T C x * y^T C y)
///
/// where C is the metric's weighted covariance of target vectors. This is the
/// weighted correlation of the scores x.t and y.t over targets t. Throws
/// UndefinedSimilarityError when x^T C x (or y^T C y) is at most
/// 1e-12 * |x|^2 * lambda_max(C).
double psim(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const ConditionedMetric& metric);
double psim(const SimilarityQuery& query);

/// Weighted Pearson correlation of the score sequences (x.t_i) and (y.t_i).
/// Scores every target, so it costs O(|V| dim); used as the reference for psim.
double psim_empirical(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const RowMatrixXd& targets, const WeightSpec& weights);

/// x.y / (|x| |y|). Throws UndefinedSimilarityError for a zero vector.
double cosine(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct Neighbor {
  std::string token;
  double similarity = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// The k tokens (query excluded) with the highest psim to the query token's
/// target vector, in descending order with lexicographic tie-breaks. Tokens
/// whose similarity is undefined under the metric are skipped.
std::vector<Neighbor> conditioned_knn(std::string_view query, std::size_t k,
                                      const ConditionedMetric& metric, const EmbeddingModel& model,
                                      kernels::Execution exec = kernels::Execution::kParallel);

}  // namespace psim
