#include "psim/issue_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <Eigen/QR>

#include "psim/conditioning.hpp"
#include "psim/error.hpp"
#include "psim/similarity.hpp"

namespace psim {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
    fields.back().pop_back();
  }
  return fields;
}

void require_unique(const std::vector<std::string>& levels, const char* what) {
  std::set<std::string> seen;
  for (const auto& level : levels) {
    if (!seen.insert(level).second) {
      throw FormatError(std::string("duplicate ") + what + " level '" + level + "'");
    }
  }
}

// Effect-coded column block: level l < L-1 gets a unit entry, level L-1 gets -1
// in every column.
void effect_code(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, std::size_t level, std::size_t levels) {
  row.setZero();
  if (levels < 2) return;
  if (level + 1 < levels) {
    row[static_cast<Eigen::Index>(level)] = 1.0;
  } else {
    row.setConstant(-1.0);
  }
}

Eigen::VectorXd expand_effects(const Eigen::VectorXd& free, std::size_t levels) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(levels));
  if (levels < 2) return out;
  out.head(free.size()) = free;
  out[out.size() - 1] = -free.sum();
  return out;
}

SimilarityTable residual_table(const SimilarityTable& table, double mu, const Eigen::VectorXd& a,
                               const Eigen::VectorXd& b, const Eigen::VectorXd& g) {
  SimilarityTable res(table.media(), table.issues(), table.columns(), table.kind());
  for (std::size_t m = 0; m < table.media().size(); ++m) {
    for (std::size_t i = 0; i < table.issues().size(); ++i) {
      for (std::size_t c = 0; c < table.columns().size(); ++c) {
        res.at(m, i, c) = table.at(m, i, c) - (mu + a[m] + b[i] + g[c]);
      }
    }
  }
  return res;
}

void require_complete(const SimilarityTable& table) {
  if (table.media().empty() || table.issues().empty() || table.columns().empty()) {
    throw DataError("additive fit needs at least one level on every axis");
  }
  if (!table.complete()) throw DataError("additive fit needs a complete grid (missing cells found)");
}

std::string format_value(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

MetricKind parse_metric_kind(std::string_view name) {
  if (name == "psim") return MetricKind::kPsim;
  if (name == "cosine" || name == "cos") return MetricKind::kCosine;
  throw UsageError("unknown metric '" + std::string(name) + "' (expected psim or cosine)");
}

const char* to_string(MetricKind kind) { return kind == MetricKind::kPsim ? "psim" : "cosine"; }

SimilarityTable::SimilarityTable(std::vector<std::string> media, std::vector<std::string> issues,
                                 std::vector<std::string> columns, MetricKind kind)
    : media_(std::move(media)),
      issues_(std::move(issues)),
      columns_(std::move(columns)),
      kind_(kind),
      cells_(media_.size() * issues_.size() * columns_.size(), kMissing) {
  require_unique(media_, "media");
  require_unique(issues_, "issue");
  require_unique(columns_, "column");
}

double SimilarityTable::value(std::string_view media, std::string_view issue,
                              std::string_view column) const {
  return at(level_index(media_, media, "media"), level_index(issues_, issue, "issue"),
            level_index(columns_, column, "column"));
}

bool SimilarityTable::complete() const {
  return std::all_of(cells_.begin(), cells_.end(), [](double v) { return std::isfinite(v); });
}

std::size_t level_index(const std::vector<std::string>& levels, std::string_view name,
                        std::string_view what) {
  auto it = std::find(levels.begin(), levels.end(), name);
  if (it == levels.end()) {
    throw NotFoundError(std::string(what) + " level '" + std::string(name) + "' not found");
  }
  return static_cast<std::size_t>(it - levels.begin());
}

SimilarityTable aggregate_similarity(const EmbeddingModel& model,
                                     const std::vector<SourceGroup>& groups,
                                     const std::vector<std::string>& parties,
                                     const std::vector<IssueSet>& issues, MetricKind kind) {
  if (groups.empty() || parties.empty()) throw UsageError("need at least one group and one party");
  if (kind == MetricKind::kPsim && issues.empty()) throw UsageError("psim table needs issue sets");

  std::vector<Eigen::VectorXd> party_vectors;
  for (const auto& party : parties) {
    auto v = model.source_vector(party);
    if (!v) throw NotFoundError("party '" + party + "' has no source vector in the model");
    party_vectors.push_back(std::move(*v));
  }

  // Members sorted by label so the mean does not depend on listing order.
  std::vector<std::vector<Eigen::VectorXd>> member_vectors;
  std::vector<std::string> media;
  for (const auto& group : groups) {
    std::set<std::string> present;
    for (const auto& member : group.members) {
      if (model.find_source(member)) present.insert(member);
    }
    if (present.empty()) {
      throw DataError("source group '" + group.name + "' has no members in the model");
    }
    std::vector<Eigen::VectorXd> vectors;
    for (const auto& member : present) vectors.push_back(*model.source_vector(member));
    member_vectors.push_back(std::move(vectors));
    media.push_back(group.name);
  }

  std::vector<std::string> issue_levels;
  std::vector<std::optional<ConditionedMetric>> metrics;
  if (kind == MetricKind::kCosine) {
    issue_levels.push_back("Cos");
    metrics.emplace_back(std::nullopt);
  } else {
    const RowMatrixXd targets = model.targets_as_double();
    for (const auto& issue : issues) {
      issue_levels.push_back(issue.name);
      try {
        metrics.emplace_back(weighted_covariance(targets, indicator_weights(issue.keywords, model.vocab())));
      } catch (const DegenerateConditioningError& e) {
        throw DegenerateConditioningError("issue set '" + issue.name + "': " + e.what());
      }
    }
  }

  SimilarityTable table(media, issue_levels, parties, kind);
  const auto n_groups = static_cast<long>(groups.size());
  const auto n_parties = static_cast<long>(parties.size());
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const auto& metric = metrics[i];
    std::vector<std::string> errors(static_cast<std::size_t>(n_groups * n_parties));
#pragma omp parallel for collapse(2) schedule(static)
    for (long g = 0; g < n_groups; ++g) {
      for (long p = 0; p < n_parties; ++p) {
        try {
          double sum = 0.0;
          for (const auto& member : member_vectors[g]) {
            sum += metric ? psim(member, party_vectors[p], *metric)
                          : cosine(member, party_vectors[p]);
          }
          table.at(g, i, p) = sum / static_cast<double>(member_vectors[g].size());
        } catch (const Error& e) {
          errors[g * n_parties + p] = e.what();
        }
      }
    }
    for (std::size_t cell = 0; cell < errors.size(); ++cell) {
      if (!errors[cell].empty()) {
        throw UndefinedSimilarityError("cell (" + media[cell / n_parties] + ", " + issue_levels[i] +
                                       ", " + parties[cell % n_parties] + "): " + errors[cell]);
      }
    }
  }
  return table;
}

BlocMap BlocMap::from_sections(const std::vector<Section>& sections) {
  BlocMap map;
  for (const auto& section : sections) {
    for (const auto& party : section.entries) {
      const bool clash = section.name == "exclude"
                             ? map.bloc_of.count(party) > 0
                             : map.excluded.count(party) > 0 || map.bloc_of.count(party) > 0;
      if (clash) throw FormatError("party '" + party + "' is assigned more than once");
      if (section.name == "exclude") {
        map.excluded.insert(party);
      } else {
        map.bloc_of.emplace(party, section.name);
      }
    }
  }
  return map;
}

SimilarityTable bloc_average(const SimilarityTable& table, const BlocMap& blocs) {
  std::set<std::string> bloc_names;
  std::vector<std::optional<std::string>> bloc_of_column;
  for (const auto& party : table.columns()) {
    if (auto it = blocs.bloc_of.find(party); it != blocs.bloc_of.end()) {
      bloc_names.insert(it->second);
      bloc_of_column.emplace_back(it->second);
    } else if (blocs.excluded.count(party)) {
      bloc_of_column.emplace_back(std::nullopt);
    } else {
      throw DataError("party '" + party + "' has no bloc and is not excluded");
    }
  }
  std::vector<std::string> columns(bloc_names.begin(), bloc_names.end());
  SimilarityTable out(table.media(), table.issues(), columns, table.kind());
  for (std::size_t b = 0; b < columns.size(); ++b) {
    for (std::size_t m = 0; m < table.media().size(); ++m) {
      for (std::size_t i = 0; i < table.issues().size(); ++i) {
        double sum = 0.0;
        int n = 0;
        for (std::size_t c = 0; c < table.columns().size(); ++c) {
          if (bloc_of_column[c] && *bloc_of_column[c] == columns[b]) {
            sum += table.at(m, i, c);
            ++n;
          }
        }
        out.at(m, i, b) = sum / n;
      }
    }
  }
  return out;
}

SimilarityTable restrict_levels(const SimilarityTable& table, const std::vector<std::string>& media,
                                const std::vector<std::string>& issues,
                                const std::vector<std::string>& columns) {
  const auto& keep_m = media.empty() ? table.media() : media;
  const auto& keep_i = issues.empty() ? table.issues() : issues;
  const auto& keep_c = columns.empty() ? table.columns() : columns;
  SimilarityTable out(keep_m, keep_i, keep_c, table.kind());
  for (std::size_t m = 0; m < keep_m.size(); ++m) {
    const auto sm = level_index(table.media(), keep_m[m], "media");
    for (std::size_t i = 0; i < keep_i.size(); ++i) {
      const auto si = level_index(table.issues(), keep_i[i], "issue");
      for (std::size_t c = 0; c < keep_c.size(); ++c) {
        out.at(m, i, c) = table.at(sm, si, level_index(table.columns(), keep_c[c], "column"));
      }
    }
  }
  return out;
}

AdditiveFit additive_fit(const SimilarityTable& table) {
  require_complete(table);
  const std::size_t M = table.media().size();
  const std::size_t I = table.issues().size();
  const std::size_t B = table.columns().size();
  const Eigen::Index pm = static_cast<Eigen::Index>(M - 1);
  const Eigen::Index pi = static_cast<Eigen::Index>(I - 1);
  const Eigen::Index pb = static_cast<Eigen::Index>(B - 1);
  const Eigen::Index params = 1 + pm + pi + pb;

  Eigen::MatrixXd X(static_cast<Eigen::Index>(M * I * B), params);
  Eigen::VectorXd y(X.rows());
  Eigen::Index row = 0;
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t i = 0; i < I; ++i) {
      for (std::size_t b = 0; b < B; ++b, ++row) {
        X(row, 0) = 1.0;
        effect_code(X.row(row).segment(1, pm), m, M);
        effect_code(X.row(row).segment(1 + pm, pi), i, I);
        effect_code(X.row(row).segment(1 + pm + pi, pb), b, B);
        y[row] = table.at(m, i, b);
      }
    }
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);

  AdditiveFit fit;
  fit.grand_mean = beta[0];
  fit.media_effects = expand_effects(beta.segment(1, pm), M);
  fit.issue_effects = expand_effects(beta.segment(1 + pm, pi), I);
  fit.bloc_effects = expand_effects(beta.segment(1 + pm + pi, pb), B);
  fit.residuals = residual_table(table, fit.grand_mean, fit.media_effects, fit.issue_effects,
                                 fit.bloc_effects);
  return fit;
}

AdditiveFit additive_fit_marginal_means(const SimilarityTable& table) {
  require_complete(table);
  const std::size_t M = table.media().size();
  const std::size_t I = table.issues().size();
  const std::size_t B = table.columns().size();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(I));
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(B));
  double total = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t i = 0; i < I; ++i) {
      for (std::size_t c = 0; c < B; ++c) {
        const double v = table.at(m, i, c);
        total += v;
        a[m] += v;
        b[i] += v;
        g[c] += v;
      }
    }
  }
  AdditiveFit fit;
  fit.grand_mean = total / static_cast<double>(M * I * B);
  fit.media_effects = (a / static_cast<double>(I * B)).array() - fit.grand_mean;
  fit.issue_effects = (b / static_cast<double>(M * B)).array() - fit.grand_mean;
  fit.bloc_effects = (g / static_cast<double>(M * I)).array() - fit.grand_mean;
  fit.residuals = residual_table(table, fit.grand_mean, fit.media_effects, fit.issue_effects,
                                 fit.bloc_effects);
  return fit;
}

void write_table_tsv(std::ostream& out, const SimilarityTable& table) {
  out << "media\tissues";
  for (const auto& c : table.columns()) out << '\t' << c;
  out << '\n';
  for (std::size_t m = 0; m < table.media().size(); ++m) {
    for (std::size_t i = 0; i < table.issues().size(); ++i) {
      out << table.media()[m] << '\t' << table.issues()[i];
      for (std::size_t c = 0; c < table.columns().size(); ++c) {
        out << '\t' << format_value(table.at(m, i, c));
      }
      out << '\n';
    }
  }
}

SimilarityTable read_table_tsv(std::istream& in, MetricKind kind) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("table: missing header row");
  const auto header = split_tabs(line);
  if (header.size() < 3) throw FormatError("table: header needs media, issues and value columns");
  const std::vector<std::string> columns(header.begin() + 2, header.end());

  struct Row {
    std::string media, issue;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  std::vector<std::string> media, issues;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_tabs(line);
    if (fields.size() != header.size()) {
      throw FormatError("table line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, found " +
                        std::to_string(fields.size()));
    }
    Row row{fields[0], fields[1], {}};
    for (std::size_t c = 2; c < fields.size(); ++c) {
      if (fields[c] == "NA") {
        row.values.push_back(kMissing);
        continue;
      }
      std::istringstream parse(fields[c]);
      double v;
      if (!(parse >> v) || !parse.eof()) {
        throw FormatError("table line " + std::to_string(line_no) + ": cannot parse '" +
                          fields[c] + "'");
      }
      row.values.push_back(v);
    }
    if (std::find(media.begin(), media.end(), row.media) == media.end()) media.push_back(row.media);
    if (std::find(issues.begin(), issues.end(), row.issue) == issues.end()) {
      issues.push_back(row.issue);
    }
    rows.push_back(std::move(row));
  }

  SimilarityTable table(media, issues, columns, kind);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& row : rows) {
    if (!seen.emplace(row.media, row.issue).second) {
      throw FormatError("table: duplicate row (" + row.media + ", " + row.issue + ")");
    }
    const auto m = level_index(media, row.media, "media");
    const auto i = level_index(issues, row.issue, "issue");
    for (std::size_t c = 0; c < columns.size(); ++c) table.at(m, i, c) = row.values[c];
  }
  return table;
}

}  // namespace psim
