#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "psim/config_files.hpp"
#include "psim/embedding_model.hpp"

namespace psim {

/// Named set of source labels, e.g. the outlets making up "Left wing" media.
struct SourceGroup {
  std::string name;
  std::vector<std::string> members;
};

/// Keyword list standing in for an issue.
struct IssueSet {
  std::string name;
  std::vector<std::string> keywords;
};

enum class MetricKind { kPsim, kCosine };

MetricKind parse_metric_kind(std::string_view name);
const char* to_string(MetricKind kind);

/// Dense media x issue x column grid. Columns are parties or blocs. Cells that
/// were never set hold NaN.
class SimilarityTable {
 public:
  SimilarityTable() = default;
  SimilarityTable(std::vector<std::string> media, std::vector<std::string> issues,
                  std::vector<std::string> columns, MetricKind kind = MetricKind::kPsim);

  const std::vector<std::string>& media() const { return media_; }
  const std::vector<std::string>& issues() const { return issues_; }
  const std::vector<std::string>& columns() const { return columns_; }
  MetricKind kind() const { return kind_; }

  double& at(std::size_t m, std::size_t i, std::size_t c) { return cells_[offset(m, i, c)]; }
  double at(std::size_t m, std::size_t i, std::size_t c) const { return cells_[offset(m, i, c)]; }
  /// Lookup by level names; throws NotFoundError for unknown levels.
  double value(std::string_view media, std::string_view issue, std::string_view column) const;

  /// True when every cell holds a finite value.
  bool complete() const;

 private:
  std::size_t offset(std::size_t m, std::size_t i, std::size_t c) const {
    return (m * issues_.size() + i) * columns_.size() + c;
  }

  std::vector<std::string> media_;
  std::vector<std::string> issues_;
  std::vector<std::string> columns_;
  MetricKind kind_ = MetricKind::kPsim;
  std::vector<double> cells_;
};

/// Index of `name` in `levels`; throws NotFoundError naming `what`.
std::size_t level_index(const std::vector<std::string>& levels, std::string_view name,
                        std::string_view what);

/// cell(g, i, p) = mean over the members of g found in the model of
/// psim(source m, party p) conditioned on issue i's keywords. For
/// MetricKind::kCosine the issue axis collapses to a single "Cos" level.
/// Members absent from the model are skipped; a group with none left is an
/// error.
SimilarityTable aggregate_similarity(const EmbeddingModel& model,
                                     const std::vector<SourceGroup>& groups,
                                     const std::vector<std::string>& parties,
                                     const std::vector<IssueSet>& issues, MetricKind kind);

/// Party -> bloc assignment plus parties deliberately left out.
struct BlocMap {
  std::map<std::string, std::string> bloc_of;
  std::set<std::string> excluded;

  /// Sections name blocs and list parties; a section named "exclude" lists
  /// parties to leave out.
  static BlocMap from_sections(const std::vector<Section>& sections);
};

/// Averages party columns into bloc columns (in lexicographic bloc order).
/// Every party must have a bloc or be excluded.
SimilarityTable bloc_average(const SimilarityTable& table, const BlocMap& blocs);

/// Sub-grid with the given levels in the given order; an empty list keeps
/// all levels of that axis.
SimilarityTable restrict_levels(const SimilarityTable& table, const std::vector<std::string>& media,
                                const std::vector<std::string>& issues,
                                const std::vector<std::string>& columns);

/// value ~ grand_mean + media_effect + issue_effect + bloc_effect, each effect
/// set summing to zero; residuals = value - fitted.
struct AdditiveFit {
  double grand_mean = 0.0;
  Eigen::VectorXd media_effects;
  Eigen::VectorXd issue_effects;
  Eigen::VectorXd bloc_effects;
  SimilarityTable residuals;
};

/// Least-squares fit on an effect-coded design matrix (column-pivoted QR).
/// Throws DataError for an incomplete grid.
AdditiveFit additive_fit(const SimilarityTable& table);
/// Closed-form marginal-means solution, valid for a complete balanced grid.
AdditiveFit additive_fit_marginal_means(const SimilarityTable& table);

/// TSV with a "media<TAB>issues<TAB><column>..." header and one row per
/// (media, issue) pair; values with 4 significant digits, "NA" for missing.
void write_table_tsv(std::ostream& out, const SimilarityTable& table);
SimilarityTable read_table_tsv(std::istream& in, MetricKind kind = MetricKind::kPsim);

}  // namespace psim
