#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>

#include "CLI11.hpp"

#include "psim/conditioning.hpp"
#include "psim/config_files.hpp"
#include "psim/corpus.hpp"
#include "psim/error.hpp"
#include "psim/issue_analysis.hpp"
#include "psim/similarity.hpp"
#include "psim/trainer.hpp"
#include "psim/vector_io.hpp"

namespace psim::cli {

namespace {

struct ConditionOptions {
  std::string keywords;
  std::string focus;
  std::string weights = "uniform";
};

void add_condition_flags(CLI::App* cmd, ConditionOptions& opt) {
  auto* kw = cmd->add_option("--keywords", opt.keywords, "Keyword file defining the issue to condition on");
  auto* focus = cmd->add_option("--focus", opt.focus, "Give this token half of the total weight");
  kw->excludes(focus);
  cmd->add_option("--weights", opt.weights, "Unconditioned target distribution")
      ->check(CLI::IsMember({"uniform", "frequency"}))
      ->capture_default_str();
}

/// Keyword lines go through the corpus tokenizer so they match vocabulary
/// entries; a line holding several words contributes each of them.
std::vector<std::string> read_keywords(const std::string& path) {
  std::vector<std::string> keywords;
  for (const auto& line : read_list_file(path)) {
    for (auto& token : tokenize(line)) keywords.push_back(std::move(token));
  }
  return keywords;
}

WeightSpec make_weights(const ConditionOptions& opt, const Vocabulary& vocab) {
  if (!opt.keywords.empty()) return indicator_weights(read_keywords(opt.keywords), vocab);
  if (!opt.focus.empty()) return focus_weights(opt.focus, vocab);
  return opt.weights == "frequency" ? frequency_weights(vocab) : uniform_weights(vocab);
}

/// Writes to the file named by `path`, or to `fallback` when it is empty.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw IoError("cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

std::string fixed(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// --- vocab -----------------------------------------------------------------

struct VocabOptions {
  std::string corpus;
  std::uint64_t min_count = 1;
  std::string output;
};

void cmd_vocab(const VocabOptions& opt, std::ostream& out) {
  const auto vocab = build_vocabulary(read_corpus_file(opt.corpus), opt.min_count);
  if (vocab.empty()) {
    throw EmptyInputError("no token occurs at least " + std::to_string(opt.min_count) + " times");
  }
  Sink sink(opt.output, out);
  for (TokenId i = 0; i < vocab.size(); ++i) {
    sink.get() << vocab.token(i) << '\t' << vocab.count(i) << '\n';
  }
}

// --- train -----------------------------------------------------------------

struct TrainOptions {
  std::string corpus;
  std::string output;
  std::string mode = "sgns";
  std::string format = "binary";
  TrainConfig config;
};

void cmd_train(const TrainOptions& opt, std::ostream& out) {
  auto config = opt.config;
  config.mode = parse_train_mode(opt.mode);
  const auto format = parse_vector_format(opt.format);
  config.validate();
  const auto corpus = read_corpus_file(opt.corpus);
  const auto model = train(corpus, config);
  save_model(model, opt.output, format);
  out << "trained " << to_string(config.mode) << " model: " << model.vocab().size()
      << " tokens, " << model.source_labels().size() << " sources, dim " << model.dim()
      << " -> " << opt.output << '\n';
}

// --- knn -------------------------------------------------------------------

struct KnnOptions {
  std::string model;
  std::string token;
  std::size_t k = 10;
  ConditionOptions condition;
  std::string output;
};

void cmd_knn(const KnnOptions& opt, std::ostream& out) {
  const auto model = load_model(opt.model);
  const auto metric = condition(model, make_weights(opt.condition, model.vocab()));
  const auto neighbors = conditioned_knn(opt.token, opt.k, metric, model);
  Sink sink(opt.output, out);
  sink.get() << "rank\ttoken\tpsim\n";
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    sink.get() << i + 1 << '\t' << neighbors[i].token << '\t' << fixed(neighbors[i].similarity)
               << '\n';
  }
}

// --- psim ------------------------------------------------------------------

struct PsimOptions {
  std::string model;
  std::string left;
  std::string right;
  std::string space = "word";
  std::string metric = "psim";
  ConditionOptions condition;
};

void cmd_psim(const PsimOptions& opt, std::ostream& out) {
  const auto model = load_model(opt.model);
  auto lookup = [&](const std::string& name) {
    auto v = opt.space == "source" ? model.source_vector(name) : model.target_vector(name);
    if (!v) {
      throw NotFoundError(std::string(opt.space == "source" ? "source '" : "token '") + name +
                          "' is not in the model");
    }
    return *v;
  };
  const auto x = lookup(opt.left);
  const auto y = lookup(opt.right);
  double value;
  if (parse_metric_kind(opt.metric) == MetricKind::kCosine) {
    value = cosine(x, y);
  } else {
    value = psim(x, y, condition(model, make_weights(opt.condition, model.vocab())));
  }
  out << fixed(value, 10) << '\n';
}

// --- table -----------------------------------------------------------------

struct TableOptions {
  std::string model;
  std::string groups;
  std::string issues;
  std::vector<std::string> keyword_files;
  std::vector<std::string> parties;
  std::string metric = "psim";
  std::string output;
};

void cmd_table(const TableOptions& opt, std::ostream& out) {
  const auto kind = parse_metric_kind(opt.metric);
  const auto model = load_model(opt.model);

  std::vector<SourceGroup> groups;
  for (auto& section : read_section_file(opt.groups)) {
    groups.push_back({std::move(section.name), std::move(section.entries)});
  }
  std::vector<IssueSet> issues;
  if (!opt.issues.empty()) {
    for (const auto& section : read_section_file(opt.issues)) {
      IssueSet issue{section.name, {}};
      for (const auto& line : section.entries) {
        for (auto& token : tokenize(line)) issue.keywords.push_back(std::move(token));
      }
      issues.push_back(std::move(issue));
    }
  }
  for (const auto& path : opt.keyword_files) {
    issues.push_back({std::filesystem::path(path).stem().string(), read_keywords(path)});
  }
  if (kind == MetricKind::kPsim && issues.empty()) {
    throw UsageError("psim tables need --issues or --keywords");
  }

  const auto table = aggregate_similarity(model, groups, opt.parties, issues, kind);
  Sink sink(opt.output, out);
  write_table_tsv(sink.get(), table);
}

// --- normalize -------------------------------------------------------------

struct NormalizeOptions {
  std::string table = "-";
  std::string blocs;
  std::vector<std::string> exclude;
  std::vector<std::string> media;
  std::vector<std::string> issues;
  std::string effects;
  std::string output;
};

void cmd_normalize(const NormalizeOptions& opt, std::istream& in, std::ostream& out) {
  SimilarityTable table;
  if (opt.table == "-") {
    table = read_table_tsv(in);
  } else {
    std::ifstream file(opt.table);
    if (!file) throw IoError("cannot open table '" + opt.table + "'");
    table = read_table_tsv(file);
  }
  auto blocs = BlocMap::from_sections(read_section_file(opt.blocs));
  for (const auto& party : opt.exclude) blocs.excluded.insert(party);

  const auto grouped = restrict_levels(bloc_average(table, blocs), opt.media, opt.issues, {});
  const auto fit = additive_fit(grouped);

  Sink sink(opt.output, out);
  write_table_tsv(sink.get(), fit.residuals);
  if (!opt.effects.empty()) {
    Sink effects(opt.effects, out);
    auto& e = effects.get();
    e << "factor\tlevel\teffect\n";
    e << "grand_mean\t-\t" << fixed(fit.grand_mean) << '\n';
    auto dump = [&](const char* factor, const std::vector<std::string>& levels,
                    const Eigen::VectorXd& values) {
      for (std::size_t i = 0; i < levels.size(); ++i) {
        e << factor << '\t' << levels[i] << '\t' << fixed(values[static_cast<Eigen::Index>(i)]) << '\n';
      }
    };
    dump("media", grouped.media(), fit.media_effects);
    dump("issues", grouped.issues(), fit.issue_effects);
    dump("bloc", grouped.columns(), fit.bloc_effects);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Predictive similarity over prediction-based embeddings"};
  app.name(args.empty() ? "psim" : args.front());
  app.require_subcommand(1);

  VocabOptions vocab_opt;
  auto* vocab = app.add_subcommand("vocab", "Build a vocabulary from a JSONL corpus");
  vocab->add_option("--corpus", vocab_opt.corpus, "JSONL corpus with source and text fields")->required();
  vocab->add_option("--min-count", vocab_opt.min_count)->capture_default_str();
  vocab->add_option("--output", vocab_opt.output, "Write here instead of stdout");

  TrainOptions train_opt;
  auto& tc = train_opt.config;
  auto* train_cmd = app.add_subcommand("train", "Train skipgram or source-augmented vectors");
  train_cmd->add_option("--corpus", train_opt.corpus)->required();
  train_cmd->add_option("--output", train_opt.output, "Model directory")->required();
  train_cmd->add_option("--mode", train_opt.mode)->check(CLI::IsMember({"sgns", "source"}))->capture_default_str();
  train_cmd->add_option("--dim", tc.dim)->capture_default_str();
  train_cmd->add_option("--window", tc.window)->capture_default_str();
  train_cmd->add_option("--epochs", tc.epochs)->capture_default_str();
  train_cmd->add_option("--negatives", tc.negatives)->capture_default_str();
  train_cmd->add_option("--alpha", tc.learning_rate_start, "Initial learning rate")->capture_default_str();
  train_cmd->add_option("--min-alpha", tc.learning_rate_end, "Final learning rate")->capture_default_str();
  train_cmd->add_option("--min-count", tc.min_count)->capture_default_str();
  train_cmd->add_option("--subsample", tc.subsample, "Frequent-word subsampling threshold, 0 = off")->capture_default_str();
  train_cmd->add_option("--threads", tc.threads, "1 = deterministic; more = Hogwild over documents")->capture_default_str();
  train_cmd->add_option("--seed", tc.seed)->capture_default_str();
  train_cmd->add_option("--format", train_opt.format)->check(CLI::IsMember({"text", "binary"}))->capture_default_str();

  KnnOptions knn_opt;
  auto* knn = app.add_subcommand("knn", "Conditioned nearest neighbours of a word");
  knn->add_option("--model", knn_opt.model, "Model directory")->required();
  knn->add_option("--token", knn_opt.token)->required();
  knn->add_option("--k", knn_opt.k)->capture_default_str();
  knn->add_option("--output", knn_opt.output);
  add_condition_flags(knn, knn_opt.condition);

  PsimOptions psim_opt;
  auto* psim_cmd = app.add_subcommand("psim", "Similarity between two words or two sources");
  psim_cmd->add_option("--model", psim_opt.model)->required();
  psim_cmd->add_option("--left", psim_opt.left)->required();
  psim_cmd->add_option("--right", psim_opt.right)->required();
  psim_cmd->add_option("--space", psim_opt.space, "Compare word target vectors or source vectors")
      ->check(CLI::IsMember({"word", "source"}))->capture_default_str();
  psim_cmd->add_option("--metric", psim_opt.metric)->check(CLI::IsMember({"psim", "cosine"}))->capture_default_str();
  add_condition_flags(psim_cmd, psim_opt.condition);

  TableOptions table_opt;
  auto* table = app.add_subcommand("table", "Average similarity of source groups to parties per issue");
  table->add_option("--model", table_opt.model)->required();
  table->add_option("--groups", table_opt.groups, "Section file of source groups")->required();
  table->add_option("--issues", table_opt.issues, "Section file of issue keyword sets");
  table->add_option("--keywords", table_opt.keyword_files, "Keyword file per issue (named by file stem)");
  table->add_option("--party", table_opt.parties, "Party source labels")->required()->delimiter(',');
  table->add_option("--metric", table_opt.metric)->check(CLI::IsMember({"psim", "cosine"}))->capture_default_str();
  table->add_option("--output", table_opt.output);

  NormalizeOptions norm_opt;
  auto* normalize = app.add_subcommand("normalize", "Bloc-average a table and report additive-model residuals");
  normalize->add_option("--table", norm_opt.table, "Table TSV, - for stdin")->capture_default_str();
  normalize->add_option("--blocs", norm_opt.blocs, "Section file mapping parties to blocs")->required();
  normalize->add_option("--exclude", norm_opt.exclude, "Parties left out of every bloc")->delimiter(',');
  normalize->add_option("--media", norm_opt.media, "Media levels to keep, in order")->delimiter(',');
  normalize->add_option("--issues", norm_opt.issues, "Issue levels to keep, in order")->delimiter(',');
  normalize->add_option("--effects", norm_opt.effects, "Also write the fitted effects here");
  normalize->add_option("--output", norm_opt.output);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return kSuccess;
    }
    err << app.get_name() << ": " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (*vocab) cmd_vocab(vocab_opt, out);
    else if (*train_cmd) cmd_train(train_opt, out);
    else if (*knn) cmd_knn(knn_opt, out);
    else if (*psim_cmd) cmd_psim(psim_opt, out);
    else if (*table) cmd_table(table_opt, out);
    else if (*normalize) cmd_normalize(norm_opt, std::cin, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kSuccess;
}

}  // namespace psim::cli
