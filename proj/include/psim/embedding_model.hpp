#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "psim/vocabulary.hpp"

namespace psim {

using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Target-word, context-word and (optional) source vectors sharing one
/// dimension. Immutable once constructed.
class EmbeddingModel {
 public:
  /// Validates shapes and finiteness; throws FormatError on violation.
  /// `sources` may be empty (0 rows) when `source_labels` is empty.
  EmbeddingModel(Vocabulary vocab, RowMatrixXf targets, RowMatrixXf contexts,
                 std::vector<std::string> source_labels = {}, RowMatrixXf sources = {});

  int dim() const { return static_cast<int>(targets_.cols()); }
  const Vocabulary& vocab() const { return vocab_; }
  const RowMatrixXf& targets() const { return targets_; }
  const RowMatrixXf& contexts() const { return contexts_; }
  const RowMatrixXf& sources() const { return sources_; }
  const std::vector<std::string>& source_labels() const { return source_labels_; }
  bool has_sources() const { return !source_labels_.empty(); }

  std::optional<std::size_t> find_source(std::string_view label) const;

  std::optional<Eigen::VectorXd> target_vector(std::string_view token) const;
  std::optional<Eigen::VectorXd> context_vector(std::string_view token) const;
  std::optional<Eigen::VectorXd> source_vector(std::string_view label) const;

  /// Target matrix widened to double, the input for covariance statistics.
  RowMatrixXd targets_as_double() const { return targets_.cast<double>(); }

 private:
  Vocabulary vocab_;
  RowMatrixXf targets_;
  RowMatrixXf contexts_;
  std::vector<std::string> source_labels_;
  RowMatrixXf sources_;
  std::unordered_map<std::string, std::size_t> source_index_;
};

}  // namespace psim
