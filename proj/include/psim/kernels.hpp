#pragma once

#include <span>

#include <Eigen/Core>

#include "psim/embedding_model.hpp"

// Data-parallel inner loops. Each kernel has a serial reference version and
// an OpenMP version. The OpenMP versions produce the same result for any
// thread count.
namespace psim::kernels {

enum class Execution { kSerial, kParallel };

struct WeightedMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double total_weight = 0.0;
};

/// Population mean and covariance of `points` rows under `weights`
/// (normalized by their total). Rows with zero weight are skipped.
WeightedMoments weighted_moments_serial(const RowMatrixXd& points, std::span<const double> weights);
/// Rows are summed in fixed-size blocks whose partials are combined in block
/// order.
WeightedMoments weighted_moments_parallel(const RowMatrixXd& points,
                                          std::span<const double> weights);

inline WeightedMoments weighted_moments(const RowMatrixXd& points, std::span<const double> weights,
                                        Execution exec) {
  return exec == Execution::kSerial ? weighted_moments_serial(points, weights)
                                    : weighted_moments_parallel(points, weights);
}

/// For every row r of `rows`: cross[r] = x^T C r and self[r] = r^T C r.
struct BilinearScores {
  Eigen::VectorXd cross;
  Eigen::VectorXd self;
};

BilinearScores bilinear_scores_serial(const RowMatrixXd& rows, const Eigen::MatrixXd& C,
                                      const Eigen::VectorXd& x);
BilinearScores bilinear_scores_parallel(const RowMatrixXd& rows, const Eigen::MatrixXd& C,
                                        const Eigen::VectorXd& x);

inline BilinearScores bilinear_scores(const RowMatrixXd& rows, const Eigen::MatrixXd& C,
                                      const Eigen::VectorXd& x, Execution exec) {
  return exec == Execution::kSerial ? bilinear_scores_serial(rows, C, x)
                                    : bilinear_scores_parallel(rows, C, x);
}

}  // namespace psim::kernels
