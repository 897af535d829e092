#include "psim/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "psim/error.hpp"

namespace psim {

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

float sigmoidf(float x) { return 1.0f / (1.0f + std::exp(-x)); }

void check_row(Eigen::Index row, Eigen::Index rows, const char* what) {
  if (row < 0 || row >= rows) {
    throw NotFoundError(std::string(what) + " id " + std::to_string(row) + " is missing from the model");
  }
}

struct EncodedCorpus {
  std::vector<std::vector<TokenId>> docs;
  std::vector<long> sources;
  std::vector<std::size_t> offsets;
  std::size_t token_count = 0;
};

EncodedCorpus encode(const TrainingCorpus& corpus, const Vocabulary& vocab,
                     std::span<const std::string> source_labels, bool need_sources) {
  EncodedCorpus enc;
  enc.docs.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) {
    std::vector<TokenId> ids;
    ids.reserve(doc.tokens.size());
    for (const auto& token : doc.tokens) {
      if (auto id = vocab.find(token)) ids.push_back(*id);
    }
    long source = -1;
    if (need_sources) {
      auto it = std::lower_bound(source_labels.begin(), source_labels.end(), doc.source);
      if (it == source_labels.end() || *it != doc.source) {
        throw NotFoundError("source '" + doc.source + "' is missing from the model");
      }
      source = static_cast<long>(it - source_labels.begin());
    }
    enc.offsets.push_back(enc.token_count);
    enc.token_count += ids.size();
    enc.docs.push_back(std::move(ids));
    enc.sources.push_back(source);
  }
  return enc;
}

}  // namespace

TrainMode parse_train_mode(std::string_view name) {
  if (name == "sgns") return TrainMode::kSgns;
  if (name == "source" || name == "source_augmented") return TrainMode::kSourceAugmented;
  throw UsageError("unknown training mode '" + std::string(name) + "' (expected sgns or source)");
}

const char* to_string(TrainMode mode) {
  return mode == TrainMode::kSgns ? "sgns" : "source_augmented";
}

void TrainConfig::validate() const {
  if (dim < 1) throw UsageError("dim must be at least 1");
  if (window < 1) throw UsageError("window must be at least 1");
  if (epochs < 0) throw UsageError("epochs must be nonnegative");
  if (negatives < 1) throw UsageError("negatives must be at least 1");
  if (!(learning_rate_end > 0.0) || !(learning_rate_start > learning_rate_end)) {
    throw UsageError("learning rate schedule needs start > end > 0");
  }
  if (min_count < 1) throw UsageError("min_count must be at least 1");
  if (subsample < 0.0) throw UsageError("subsample threshold must be nonnegative");
  if (threads < 1) throw UsageError("threads must be at least 1");
}

std::vector<TrainingPair> enumerate_pairs(const TrainingCorpus& corpus, const Vocabulary& vocab,
                                          std::span<const std::string> source_labels, int window) {
  if (window < 1) throw UsageError("window must be at least 1");
  const auto enc = encode(corpus, vocab, source_labels, !source_labels.empty());
  std::vector<TrainingPair> pairs;
  for (std::size_t d = 0; d < enc.docs.size(); ++d) {
    const auto& ids = enc.docs[d];
    const auto source = static_cast<std::uint32_t>(std::max(enc.sources[d], 0L));
    const auto n = static_cast<long>(ids.size());
    for (long i = 0; i < n; ++i) {
      for (long j = std::max(0L, i - window); j <= std::min(n - 1, i + window); ++j) {
        if (j != i) pairs.push_back({ids[i], ids[j], source});
      }
    }
  }
  return pairs;
}

FixedNegatives draw_fixed_negatives(const Vocabulary& vocab, std::size_t pair_count, int per_pair,
                                    std::uint64_t seed) {
  if (per_pair < 0) throw UsageError("negatives per pair must be nonnegative");
  NegativeSampler sampler(vocab, seed);
  FixedNegatives out;
  out.per_pair = per_pair;
  out.ids.resize(pair_count * static_cast<std::size_t>(per_pair));
  for (auto& id : out.ids) id = sampler.next();
  return out;
}

double logistic_loss(double x) {
  return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

double pair_loss(const Eigen::VectorXd& target, const Eigen::VectorXd& context,
                 const Eigen::VectorXd& source, std::span<const Eigen::VectorXd> negatives,
                 PairGradient* gradient) {
  const bool with_source = source.size() > 0;
  const Eigen::VectorXd u = with_source ? Eigen::VectorXd(context + source) : context;

  const double s_pos = target.dot(u);
  double loss = logistic_loss(s_pos);
  const double g_pos = sigmoid(s_pos) - 1.0;
  Eigen::VectorXd grad_u = g_pos * target;
  if (gradient) {
    gradient->target = g_pos * u;
    gradient->negatives.clear();
  }
  for (const auto& n : negatives) {
    const double s_neg = n.dot(u);
    loss += logistic_loss(-s_neg);
    const double g_neg = sigmoid(s_neg);
    grad_u += g_neg * n;
    if (gradient) gradient->negatives.push_back(g_neg * u);
  }
  if (gradient) {
    gradient->context = grad_u;
    gradient->source = with_source ? grad_u : Eigen::VectorXd();
  }
  return loss;
}

double objective_value(const EmbeddingModel& model, std::span<const TrainingPair> pairs,
                       const FixedNegatives& negatives, TrainMode mode) {
  if (negatives.ids.size() != pairs.size() * static_cast<std::size_t>(negatives.per_pair)) {
    throw UsageError("fixed negatives do not cover every training pair");
  }
  const bool with_source = mode == TrainMode::kSourceAugmented;
  if (with_source && !model.has_sources()) {
    throw NotFoundError("source-augmented objective needs source vectors");
  }
  const auto& T = model.targets();
  const auto& C = model.contexts();
  const auto& D = model.sources();
  const Eigen::Index dim = T.cols();

  auto score = [&](Eigen::Index t, Eigen::Index c, Eigen::Index d) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < dim; ++k) {
      double u = C(c, k);
      if (with_source) u += D(d, k);
      s += static_cast<double>(T(t, k)) * u;
    }
    return s;
  };

  double total = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& pair = pairs[p];
    check_row(pair.target, T.rows(), "target token");
    check_row(pair.context, C.rows(), "context token");
    if (with_source) check_row(pair.source, D.rows(), "source");
    total += logistic_loss(score(pair.target, pair.context, pair.source));
    for (TokenId n : negatives.for_pair(p)) {
      check_row(n, T.rows(), "negative token");
      total += logistic_loss(-score(n, pair.context, pair.source));
    }
  }
  return total;
}

double objective_value(const EmbeddingModel& model, const TrainingCorpus& corpus,
                       const TrainConfig& config, const FixedNegatives& negatives) {
  const auto pairs = enumerate_pairs(corpus, model.vocab(),
                                     config.mode == TrainMode::kSourceAugmented
                                         ? std::span<const std::string>(model.source_labels())
                                         : std::span<const std::string>(),
                                     config.window);
  return objective_value(model, pairs, negatives, config.mode);
}

TrainState initial_state(std::size_t vocab_size, std::size_t source_count,
                         const TrainConfig& config) {
  TrainState state;
  const auto n = static_cast<Eigen::Index>(vocab_size);
  state.targets.resize(n, config.dim);
  Rng rng(derive_seed(config.seed, 0x696E6974 /* "init" */));
  const double scale = 1.0 / config.dim;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < config.dim; ++k) {
      state.targets(i, k) = static_cast<float>((uniform01(rng) - 0.5) * scale);
    }
  }
  state.contexts = RowMatrixXf::Zero(n, config.dim);
  state.sources = RowMatrixXf::Zero(static_cast<Eigen::Index>(source_count), config.dim);
  return state;
}

void sgd_pair_step(TrainState& state, TokenId target, TokenId context, long source,
                   std::span<const TokenId> negatives, float learning_rate) {
  const Eigen::Index dim = state.targets.cols();
  float* c = state.contexts.row(context).data();
  float* d = source >= 0 ? state.sources.row(source).data() : nullptr;

  thread_local std::vector<float> u;
  thread_local std::vector<float> grad_u;
  u.assign(c, c + dim);
  if (d) {
    for (Eigen::Index k = 0; k < dim; ++k) u[k] += d[k];
  }
  grad_u.assign(static_cast<std::size_t>(dim), 0.0f);

  // g is the negative loss derivative scaled by the learning rate.
  auto term = [&](TokenId row, float label) {
    float* t = state.targets.row(row).data();
    float s = 0.0f;
    for (Eigen::Index k = 0; k < dim; ++k) s += t[k] * u[k];
    const float g = (label - sigmoidf(s)) * learning_rate;
    for (Eigen::Index k = 0; k < dim; ++k) grad_u[k] += g * t[k];
    for (Eigen::Index k = 0; k < dim; ++k) t[k] += g * u[k];
  };

  term(target, 1.0f);
  for (TokenId n : negatives) {
    if (n != target) term(n, 0.0f);
  }
  for (Eigen::Index k = 0; k < dim; ++k) c[k] += grad_u[k];
  if (d) {
    for (Eigen::Index k = 0; k < dim; ++k) d[k] += grad_u[k];
  }
}

EmbeddingModel initial_model(const TrainingCorpus& corpus, const TrainConfig& config) {
  config.validate();
  auto vocab = build_vocabulary(corpus, config.min_count);
  if (vocab.empty()) throw EmptyInputError("corpus is empty after min_count filtering");
  std::vector<std::string> labels;
  if (config.mode == TrainMode::kSourceAugmented) labels = corpus.source_labels();
  auto state = initial_state(vocab.size(), labels.size(), config);
  return EmbeddingModel(std::move(vocab), std::move(state.targets), std::move(state.contexts),
                        std::move(labels), std::move(state.sources));
}

EmbeddingModel train(const TrainingCorpus& corpus, const TrainConfig& config,
                     const EpochObserver& observer) {
  config.validate();
  auto vocab = build_vocabulary(corpus, config.min_count);
  if (vocab.empty()) throw EmptyInputError("corpus is empty after min_count filtering");
  const bool with_source = config.mode == TrainMode::kSourceAugmented;
  std::vector<std::string> labels;
  if (with_source) labels = corpus.source_labels();

  auto state = initial_state(vocab.size(), labels.size(), config);
  const auto enc = encode(corpus, vocab, labels, with_source);
  const UnigramTable table(vocab);

  std::vector<double> keep_probability;
  if (config.subsample > 0.0) {
    const double threshold = config.subsample * static_cast<double>(vocab.total_count());
    keep_probability.resize(vocab.size());
    for (TokenId i = 0; i < vocab.size(); ++i) {
      const double f = static_cast<double>(vocab.count(i));
      keep_probability[i] = (std::sqrt(f / threshold) + 1.0) * threshold / f;
    }
  }

  const double total_updates =
      static_cast<double>(config.epochs) * static_cast<double>(std::max<std::size_t>(enc.token_count, 1));
  const double lr_span = config.learning_rate_start - config.learning_rate_end;

  auto run_document = [&](int epoch, std::size_t doc) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch) + 1, doc));
    const auto& ids = enc.docs[doc];
    std::vector<TokenId> kept;
    std::vector<std::size_t> position;
    kept.reserve(ids.size());
    position.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!keep_probability.empty() && keep_probability[ids[i]] < uniform01(rng)) continue;
      kept.push_back(ids[i]);
      position.push_back(i);
    }
    std::vector<TokenId> negs(static_cast<std::size_t>(config.negatives));
    const auto n = static_cast<long>(kept.size());
    for (long i = 0; i < n; ++i) {
      const double progress =
          (static_cast<double>(epoch) * enc.token_count + enc.offsets[doc] + position[i]) /
          total_updates;
      const auto lr = static_cast<float>(
          std::max(config.learning_rate_end, config.learning_rate_start - lr_span * progress));
      for (long j = std::max(0L, i - config.window); j <= std::min(n - 1, i + config.window); ++j) {
        if (j == i) continue;
        for (auto& neg : negs) neg = table.draw(rng);
        sgd_pair_step(state, kept[i], kept[j], enc.sources[doc], negs, lr);
      }
    }
  };

  const auto doc_count = static_cast<long>(enc.docs.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.threads == 1) {
      for (long doc = 0; doc < doc_count; ++doc) run_document(epoch, static_cast<std::size_t>(doc));
    } else {
#pragma omp parallel for num_threads(config.threads) schedule(dynamic, 1)
      for (long doc = 0; doc < doc_count; ++doc) run_document(epoch, static_cast<std::size_t>(doc));
    }
    if (observer) observer(epoch + 1, state);
  }

  return EmbeddingModel(std::move(vocab), std::move(state.targets), std::move(state.contexts),
                        std::move(labels), std::move(state.sources));
}

}  // namespace psim
