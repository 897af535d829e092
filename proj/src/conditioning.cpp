#include "psim/conditioning.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "psim/error.hpp"

namespace psim {

WeightSpec::WeightSpec(std::vector<double> weights) : weights_(std::move(weights)) {
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) {
      throw UsageError("conditioning weights must be finite and nonnegative");
    }
    total_ += w;
    if (w > 0.0) ++support_;
  }
  if (support_ < 2) {
    throw DegenerateConditioningError(
        "conditioning needs at least two tokens with positive weight, got " +
        std::to_string(support_));
  }
}

WeightSpec indicator_weights(std::span<const std::string> keywords, const Vocabulary& vocab) {
  std::vector<double> w(vocab.size(), 0.0);
  std::size_t matched = 0;
  for (const auto& keyword : keywords) {
    if (auto id = vocab.find(keyword); id && w[*id] == 0.0) {
      w[*id] = 1.0;
      ++matched;
    }
  }
  if (matched < 2) {
    throw DegenerateConditioningError("only " + std::to_string(matched) + " of " +
                                      std::to_string(keywords.size()) +
                                      " keywords are in the vocabulary; need at least 2");
  }
  return WeightSpec(std::move(w));
}

WeightSpec focus_weights(std::string_view focus, const Vocabulary& vocab) {
  const TokenId id = vocab.at(focus);
  if (vocab.size() < 2) {
    throw DegenerateConditioningError("focus weighting needs a vocabulary of at least 2 tokens");
  }
  std::vector<double> w(vocab.size(), 1.0);
  w[id] = static_cast<double>(vocab.size() - 1);
  return WeightSpec(std::move(w));
}

WeightSpec uniform_weights(const Vocabulary& vocab) {
  return WeightSpec(std::vector<double>(vocab.size(), 1.0));
}

WeightSpec frequency_weights(const Vocabulary& vocab) {
  std::vector<double> w(vocab.counts().begin(), vocab.counts().end());
  return WeightSpec(std::move(w));
}

ConditionedMetric ConditionedMetric::from_moments(Eigen::VectorXd mean, Eigen::MatrixXd covariance,
                                                  double total_weight) {
  if (covariance.rows() != covariance.cols() || covariance.rows() != mean.size()) {
    throw UsageError("covariance must be square and match the mean dimension");
  }
  if (mean.size() == 0) throw UsageError("conditioned metric needs a positive dimension");
  if (!covariance.allFinite() || !mean.allFinite()) {
    throw DataError("covariance statistics contain NaN or Inf entries");
  }
  const double scale = covariance.cwiseAbs().maxCoeff();
  const double asymmetry = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-8 * scale) throw DataError("covariance matrix is not symmetric");

  ConditionedMetric m;
  m.mean_ = std::move(mean);
  m.covariance_ = 0.5 * (covariance + covariance.transpose());
  m.total_weight_ = total_weight;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.covariance_, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw DataError("eigenvalue computation failed");
  m.min_eigenvalue_ = solver.eigenvalues().minCoeff();
  m.max_eigenvalue_ = solver.eigenvalues().maxCoeff();
  if (m.min_eigenvalue_ < -1e-8 * std::max(m.max_eigenvalue_, 0.0)) {
    throw DataError("covariance matrix is not positive semidefinite");
  }
  return m;
}

ConditionedMetric weighted_covariance(const RowMatrixXd& targets, const WeightSpec& weights,
                                      kernels::Execution exec) {
  if (static_cast<Eigen::Index>(weights.size()) != targets.rows()) {
    throw UsageError("weight spec has " + std::to_string(weights.size()) + " entries for " +
                     std::to_string(targets.rows()) + " target vectors");
  }
  auto moments = kernels::weighted_moments(targets, weights.weights(), exec);
  return ConditionedMetric::from_moments(std::move(moments.mean), std::move(moments.covariance),
                                         moments.total_weight);
}

ConditionedMetric condition(const EmbeddingModel& model, const WeightSpec& weights,
                            kernels::Execution exec) {
  return weighted_covariance(model.targets_as_double(), weights, exec);
}

}  // namespace psim
