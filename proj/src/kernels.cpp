#include "psim/kernels.hpp"

#include <algorithm>
#include <vector>

#include "psim/error.hpp"

namespace psim::kernels {

namespace {

constexpr Eigen::Index kMinBlockRows = 512;
constexpr Eigen::Index kMaxBlocks = 256;

void check_shapes(const RowMatrixXd& points, std::span<const double> weights) {
  if (static_cast<Eigen::Index>(weights.size()) != points.rows()) {
    throw UsageError("weight count does not match the number of target vectors");
  }
}

// Depends only on the row count, never on the thread count.
Eigen::Index block_rows(Eigen::Index n) {
  return std::max(kMinBlockRows, (n + kMaxBlocks - 1) / kMaxBlocks);
}

// sum += w_i t_i over rows [begin, end).
void accumulate_weighted_sum(const RowMatrixXd& points, std::span<const double> weights,
                             Eigen::Index begin, Eigen::Index end, Eigen::VectorXd& sum) {
  const Eigen::Index dim = points.cols();
  for (Eigen::Index i = begin; i < end; ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    const double* t = points.row(i).data();
    for (Eigen::Index j = 0; j < dim; ++j) sum[j] += w * t[j];
  }
}

// Lower triangle of scatter += w_i (t_i - mean)(t_i - mean)^T over rows [begin, end).
void accumulate_weighted_scatter(const RowMatrixXd& points, std::span<const double> weights,
                                 const Eigen::VectorXd& mean, Eigen::Index begin,
                                 Eigen::Index end, Eigen::MatrixXd& scatter) {
  const Eigen::Index dim = points.cols();
  std::vector<double> diff(static_cast<std::size_t>(dim));
  for (Eigen::Index i = begin; i < end; ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    const double* t = points.row(i).data();
    for (Eigen::Index j = 0; j < dim; ++j) diff[j] = t[j] - mean[j];
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double wd = w * diff[k];
      for (Eigen::Index j = k; j < dim; ++j) scatter(j, k) += wd * diff[j];
    }
  }
}

void mirror_lower(Eigen::MatrixXd& m) {
  m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
}

// Row-by-row inner loop shared by both bilinear kernels, so their results are
// bit-identical. `scratch` must have size dim.
inline void bilinear_row(const RowMatrixXd& rows, const Eigen::MatrixXd& C,
                         const Eigen::VectorXd& cx, Eigen::Index r, Eigen::VectorXd& scratch,
                         BilinearScores& out) {
  const Eigen::Map<const Eigen::VectorXd> t(rows.row(r).data(), rows.cols());
  scratch.noalias() = C * t;
  out.cross[r] = t.dot(cx);
  out.self[r] = t.dot(scratch);
}

Eigen::VectorXd times(const Eigen::MatrixXd& C, const Eigen::VectorXd& x) {
  if (C.rows() != C.cols() || C.cols() != x.size()) {
    throw UsageError("bilinear form: dimension mismatch");
  }
  Eigen::VectorXd cx(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) s += C(j, k) * x[k];
    cx[j] = s;
  }
  return cx;
}

}  // namespace

WeightedMoments weighted_moments_serial(const RowMatrixXd& points, std::span<const double> weights) {
  check_shapes(points, weights);
  const Eigen::Index n = points.rows();
  const Eigen::Index dim = points.cols();

  WeightedMoments out;
  for (double w : weights) out.total_weight += w;
  out.mean = Eigen::VectorXd::Zero(dim);
  out.covariance = Eigen::MatrixXd::Zero(dim, dim);
  if (!(out.total_weight > 0.0)) return out;

  accumulate_weighted_sum(points, weights, 0, n, out.mean);
  out.mean /= out.total_weight;
  accumulate_weighted_scatter(points, weights, out.mean, 0, n, out.covariance);
  out.covariance /= out.total_weight;
  mirror_lower(out.covariance);
  return out;
}

WeightedMoments weighted_moments_parallel(const RowMatrixXd& points,
                                          std::span<const double> weights) {
  check_shapes(points, weights);
  const Eigen::Index n = points.rows();
  const Eigen::Index dim = points.cols();
  const Eigen::Index block = block_rows(n);
  const Eigen::Index blocks = (n + block - 1) / block;

  WeightedMoments out;
  for (double w : weights) out.total_weight += w;
  out.mean = Eigen::VectorXd::Zero(dim);
  out.covariance = Eigen::MatrixXd::Zero(dim, dim);
  if (!(out.total_weight > 0.0)) return out;

  std::vector<Eigen::VectorXd> sums(static_cast<std::size_t>(blocks), Eigen::VectorXd::Zero(dim));
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    accumulate_weighted_sum(points, weights, b * block, std::min(n, (b + 1) * block), sums[b]);
  }
  for (const auto& part : sums) out.mean += part;
  out.mean /= out.total_weight;

  std::vector<Eigen::MatrixXd> scatters(static_cast<std::size_t>(blocks),
                                        Eigen::MatrixXd::Zero(dim, dim));
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    accumulate_weighted_scatter(points, weights, out.mean, b * block,
                                std::min(n, (b + 1) * block), scatters[b]);
  }
  for (const auto& part : scatters) out.covariance += part;
  out.covariance /= out.total_weight;
  mirror_lower(out.covariance);
  return out;
}

BilinearScores bilinear_scores_serial(const RowMatrixXd& rows, const Eigen::MatrixXd& C,
                                      const Eigen::VectorXd& x) {
  const Eigen::VectorXd cx = times(C, x);
  if (rows.cols() != x.size()) throw UsageError("bilinear form: dimension mismatch");
  BilinearScores out{Eigen::VectorXd(rows.rows()), Eigen::VectorXd(rows.rows())};
  Eigen::VectorXd scratch(x.size());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) bilinear_row(rows, C, cx, r, scratch, out);
  return out;
}

BilinearScores bilinear_scores_parallel(const RowMatrixXd& rows, const Eigen::MatrixXd& C,
                                        const Eigen::VectorXd& x) {
  const Eigen::VectorXd cx = times(C, x);
  if (rows.cols() != x.size()) throw UsageError("bilinear form: dimension mismatch");
  BilinearScores out{Eigen::VectorXd(rows.rows()), Eigen::VectorXd(rows.rows())};
  const Eigen::Index n = rows.rows();
#pragma omp parallel
  {
    Eigen::VectorXd scratch(x.size());
#pragma omp for schedule(static)
    for (Eigen::Index r = 0; r < n; ++r) bilinear_row(rows, C, cx, r, scratch, out);
  }
  return out;
}

}  // namespace psim::kernels
