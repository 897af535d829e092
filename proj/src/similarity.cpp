#include "psim/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "psim/error.hpp"

namespace psim {

namespace {

constexpr double kRelativeVarianceFloor = 1e-12;

void check_dim(const Eigen::VectorXd& v, int dim, const char* side) {
  if (v.size() != dim) {
    throw UsageError(std::string(side) + " vector has dimension " + std::to_string(v.size()) +
                     ", metric has " + std::to_string(dim));
  }
}

double variance_floor(const Eigen::VectorXd& v, const ConditionedMetric& metric) {
  return kRelativeVarianceFloor * v.squaredNorm() * std::max(metric.max_eigenvalue(), 0.0);
}

double quadratic_form(const Eigen::VectorXd& v, const ConditionedMetric& metric,
                      const char* side) {
  const double q = v.dot(metric.covariance() * v);
  if (!(q > variance_floor(v, metric))) {
    throw UndefinedSimilarityError(std::string("similarity is undefined: the ") + side +
                                   " vector has zero variance under the conditioning");
  }
  return q;
}

}  // namespace

double psim(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const ConditionedMetric& metric) {
  check_dim(x, metric.dim(), "left");
  check_dim(y, metric.dim(), "right");
  const double qx = quadratic_form(x, metric, "left");
  const double qy = quadratic_form(y, metric, "right");
  return x.dot(metric.covariance() * y) / std::sqrt(qx * qy);
}

double psim(const SimilarityQuery& query) {
  if (!query.metric) throw UsageError("similarity query has no metric");
  return psim(query.left, query.right, *query.metric);
}

double psim_empirical(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const RowMatrixXd& targets, const WeightSpec& weights) {
  if (static_cast<Eigen::Index>(weights.size()) != targets.rows()) {
    throw UsageError("weight spec does not match the number of target vectors");
  }
  if (x.size() != targets.cols() || y.size() != targets.cols()) {
    throw UsageError("query vectors do not match the target dimension");
  }
  const Eigen::VectorXd sx = targets * x;
  const Eigen::VectorXd sy = targets * y;
  const auto w = weights.weights();
  const double total = weights.total();

  double mx = 0.0, my = 0.0;
  for (Eigen::Index i = 0; i < targets.rows(); ++i) {
    const double p = w[i] / total;
    mx += p * sx[i];
    my += p * sy[i];
  }
  double cxy = 0.0, vx = 0.0, vy = 0.0, ex2 = 0.0, ey2 = 0.0;
  for (Eigen::Index i = 0; i < targets.rows(); ++i) {
    const double p = w[i] / total;
    const double dx = sx[i] - mx;
    const double dy = sy[i] - my;
    cxy += p * dx * dy;
    vx += p * dx * dx;
    vy += p * dy * dy;
    ex2 += p * sx[i] * sx[i];
    ey2 += p * sy[i] * sy[i];
  }
  if (!(vx > kRelativeVarianceFloor * ex2)) {
    throw UndefinedSimilarityError("similarity is undefined: the left score sequence is constant");
  }
  if (!(vy > kRelativeVarianceFloor * ey2)) {
    throw UndefinedSimilarityError("similarity is undefined: the right score sequence is constant");
  }
  return cxy / std::sqrt(vx * vy);
}

double cosine(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw UsageError("cosine: vectors differ in dimension");
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) {
    throw UndefinedSimilarityError("cosine similarity is undefined for a zero vector");
  }
  return x.dot(y) / (nx * ny);
}

std::vector<Neighbor> conditioned_knn(std::string_view query, std::size_t k,
                                      const ConditionedMetric& metric, const EmbeddingModel& model,
                                      kernels::Execution exec) {
  if (k < 1) throw UsageError("k must be at least 1");
  const TokenId qid = model.vocab().at(query);
  const RowMatrixXd targets = model.targets_as_double();
  if (targets.cols() != metric.dim()) throw UsageError("metric and model differ in dimension");
  const Eigen::VectorXd x = targets.row(qid).transpose();
  const double qx = quadratic_form(x, metric, "query");

  const auto scores = kernels::bilinear_scores(targets, metric.covariance(), x, exec);
  const double lambda = std::max(metric.max_eigenvalue(), 0.0);

  std::vector<std::pair<double, TokenId>> candidates;
  candidates.reserve(targets.rows());
  for (Eigen::Index r = 0; r < targets.rows(); ++r) {
    if (r == qid) continue;
    const double floor = kRelativeVarianceFloor * targets.row(r).squaredNorm() * lambda;
    if (!(scores.self[r] > floor)) continue;
    candidates.emplace_back(scores.cross[r] / std::sqrt(qx * scores.self[r]),
                            static_cast<TokenId>(r));
  }
  const auto& vocab = model.vocab();
  auto better = [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return vocab.token(a.second) < vocab.token(b.second);
  };
  const std::size_t take = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<long>(take),
                    candidates.end(), better);

  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back({vocab.token(candidates[i].second), candidates[i].first});
  }
  return out;
}

}  // namespace psim
