#include "psim/embedding_model.hpp"

#include "psim/error.hpp"

namespace psim {

namespace {

void require_finite(const RowMatrixXf& m, const char* what) {
  if (!m.allFinite()) throw FormatError(std::string(what) + " contain NaN or Inf entries");
}

std::optional<Eigen::VectorXd> row_of(const RowMatrixXf& m, std::optional<std::size_t> row) {
  if (!row) return std::nullopt;
  return Eigen::VectorXd(m.row(static_cast<Eigen::Index>(*row)).transpose().cast<double>());
}

}  // namespace

EmbeddingModel::EmbeddingModel(Vocabulary vocab, RowMatrixXf targets, RowMatrixXf contexts,
                               std::vector<std::string> source_labels, RowMatrixXf sources)
    : vocab_(std::move(vocab)),
      targets_(std::move(targets)),
      contexts_(std::move(contexts)),
      source_labels_(std::move(source_labels)),
      sources_(std::move(sources)) {
  const auto n = static_cast<Eigen::Index>(vocab_.size());
  if (targets_.cols() < 1) throw FormatError("embedding dimension must be positive");
  if (targets_.rows() != n || contexts_.rows() != n) {
    throw FormatError("target and context matrices must have one row per vocabulary token");
  }
  if (contexts_.cols() != targets_.cols()) {
    throw FormatError("context vectors do not share the target dimension");
  }
  if (source_labels_.empty() && sources_.size() == 0) {
    sources_.resize(0, targets_.cols());
  }
  if (sources_.rows() != static_cast<Eigen::Index>(source_labels_.size())) {
    throw FormatError("source matrix must have one row per source label");
  }
  if (sources_.cols() != targets_.cols()) {
    throw FormatError("source vectors do not share the target dimension");
  }
  require_finite(targets_, "target vectors");
  require_finite(contexts_, "context vectors");
  require_finite(sources_, "source vectors");
  for (std::size_t i = 0; i < source_labels_.size(); ++i) {
    if (!source_index_.emplace(source_labels_[i], i).second) {
      throw FormatError("duplicate source label '" + source_labels_[i] + "'");
    }
  }
}

std::optional<std::size_t> EmbeddingModel::find_source(std::string_view label) const {
  auto it = source_index_.find(std::string(label));
  if (it == source_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<Eigen::VectorXd> EmbeddingModel::target_vector(std::string_view token) const {
  auto id = vocab_.find(token);
  return row_of(targets_, id ? std::optional<std::size_t>(*id) : std::nullopt);
}

std::optional<Eigen::VectorXd> EmbeddingModel::context_vector(std::string_view token) const {
  auto id = vocab_.find(token);
  return row_of(contexts_, id ? std::optional<std::size_t>(*id) : std::nullopt);
}

std::optional<Eigen::VectorXd> EmbeddingModel::source_vector(std::string_view label) const {
  return row_of(sources_, find_source(label));
}

}  // namespace psim
