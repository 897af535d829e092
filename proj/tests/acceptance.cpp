// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: acceptance [data-dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "psim/conditioning.hpp"
#include "psim/config_files.hpp"
#include "psim/issue_analysis.hpp"
#include "psim/similarity.hpp"
#include "psim/trainer.hpp"
#include "psim/vector_io.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace psim {
namespace {

using testing::random_matrix;
using testing::random_vector;
using testing::random_weights;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path g_data_dir;

Vocabulary numbered_vocab(int n) {
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  for (int i = 0; i < n; ++i) {
    tokens.push_back("w" + std::to_string(i));
    counts.push_back(static_cast<std::uint64_t>(n - i));
  }
  return Vocabulary(tokens, counts);
}

Outcome closed_form_matches_empirical() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> vocab_size(20, 300), dims(2, 30);
  double worst = 0.0;
  const int instances = 120;
  for (int trial = 0; trial < instances; ++trial) {
    const int n = vocab_size(rng);
    const int d = dims(rng);
    const EmbeddingModel model(numbered_vocab(n), random_matrix(rng, n, d).cast<float>(), RowMatrixXf::Zero(n, d));
    const auto raw = random_weights(rng, n);
    const WeightSpec w(raw);
    const auto metric = condition(model, w);
    const auto x = random_vector(rng, d), y = random_vector(rng, d);
    const double closed = psim(x, y, metric);
    const auto targets = model.targets_as_double();
    worst = std::max({worst, std::abs(closed - psim_empirical(x, y, targets, w)),
                      std::abs(closed - testing::oracle_weighted_correlation(x, y, targets, raw))});
  }
  return {worst <= 1e-9, "max |psim - empirical| = " + fmt("%.2e", worst) + " over " + std::to_string(instances) +
                             " instances (limit 1e-9)"};
}

Outcome cosine_reduction() {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  std::uniform_int_distribution<int> dims(2, 30);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = dims(rng);
    const double c = scale(rng);
    const auto metric = ConditionedMetric::from_moments(Eigen::VectorXd::Zero(d),
                                                        c * Eigen::MatrixXd::Identity(d, d), 1.0);
    const auto x = random_vector(rng, d), y = random_vector(rng, d);
    worst = std::max(worst, std::abs(psim(x, y, metric) - testing::oracle_cosine(x, y)));
  }
  return {worst <= 1e-9, "max |psim - cosine| = " + fmt("%.2e", worst) + " over 100 pairs, C = cI (limit 1e-9)"};
}

Outcome metric_axioms() {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> scale(1e-2, 1e2);
  double self = 0.0, asym = 0.0, range = 0.0, scaling = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const RowMatrixXd t = random_matrix(rng, 60, 12);
    const auto metric = weighted_covariance(t, WeightSpec(random_weights(rng, 60)));
    const auto x = random_vector(rng, 12), y = random_vector(rng, 12);
    const double v = psim(x, y, metric);
    self = std::max(self, std::abs(psim(x, x, metric) - 1.0));
    asym = std::max(asym, std::abs(v - psim(y, x, metric)));
    range = std::max(range, std::abs(v) - 1.0);
    const Eigen::VectorXd ax = scale(rng) * x, by = scale(rng) * y;
    scaling = std::max(scaling, std::abs(psim(ax, by, metric) - v));
  }
  const bool pass = self <= 1e-9 && asym <= 1e-12 && range <= 1e-9 && scaling <= 1e-12;
  return {pass, "|self - 1| " + fmt("%.1e", self) + ", asymmetry " + fmt("%.1e", asym) + ", excess over 1 " +
                    fmt("%.1e", std::max(range, 0.0)) + ", scaling drift " + fmt("%.1e", scaling) +
                    " over 100 instances"};
}

Outcome covariance_oracle() {
  std::mt19937_64 rng(104);
  std::uniform_int_distribution<int> rows(2, 200), dims(1, 16);
  double worst = 0.0, worst_psd = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = rows(rng), d = dims(rng);
    const RowMatrixXd t = random_matrix(rng, n, d);
    const auto w = random_weights(rng, n);
    const auto m = weighted_covariance(t, WeightSpec(w));
    const auto o = testing::oracle_moments(t, w);
    for (int j = 0; j < d; ++j) {
      worst = std::max(worst, std::abs(m.mean()[j] - o.mean[j]));
      for (int k = 0; k < d; ++k) worst = std::max(worst, std::abs(m.covariance()(j, k) - o.cov[j][k]));
    }
    worst_psd = std::max(worst_psd, -m.min_eigenvalue() / m.max_eigenvalue());
  }

  bool exact = true;
  for (int n : {10, 300, 5000}) {
    const RowMatrixXd t = random_matrix(rng, n, 6);
    std::vector<double> mean(6, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 6; ++j) mean[j] += t(i, j);
    for (double& v : mean) v /= n;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(6, 6);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 6; ++j)
        for (int k = 0; k < 6; ++k) cov(j, k) += (t(i, j) - mean[j]) * (t(i, k) - mean[k]);
    cov /= n;
    const auto m = weighted_covariance(t, WeightSpec(std::vector<double>(n, 1.0)), kernels::Execution::kSerial);
    exact = exact && m.covariance() == cov && m.mean() == Eigen::Map<Eigen::VectorXd>(mean.data(), 6);
  }
  const bool pass = worst <= 1e-10 && worst_psd <= 1e-8 && exact;
  return {pass, "max oracle diff " + fmt("%.2e", worst) + " over 50 instances (limit 1e-10), min eigenvalue / max " +
                    fmt("%.1e", -worst_psd) + " (limit -1e-8), uniform weights " +
                    (exact ? "bit-identical" : "NOT bit-identical") + " to unweighted covariance"};
}

Outcome gradient_check() {
  std::mt19937_64 rng(105);
  double worst = 0.0;
  int checked = 0;
  for (auto mode : {TrainMode::kSgns, TrainMode::kSourceAugmented}) {
    const bool src = mode == TrainMode::kSourceAugmented;
    for (int trial = 0; trial < 25; ++trial) {
      const int dim = 8;
      Eigen::VectorXd t = random_vector(rng, dim, 0.6), c = random_vector(rng, dim, 0.6);
      Eigen::VectorXd d = src ? random_vector(rng, dim, 0.6) : Eigen::VectorXd();
      std::vector<Eigen::VectorXd> negs;
      for (int k = 0; k < 5; ++k) negs.push_back(random_vector(rng, dim, 0.6));
      PairGradient g;
      pair_loss(t, c, d, negs, &g);
      const double h = 1e-4;
      auto check = [&](Eigen::VectorXd& param, const Eigen::VectorXd& analytic) {
        for (int k = 0; k < param.size(); ++k) {
          const double saved = param[k];
          param[k] = saved + h;
          const double up = pair_loss(t, c, d, negs);
          param[k] = saved - h;
          const double down = pair_loss(t, c, d, negs);
          param[k] = saved;
          const double numeric = (up - down) / (2 * h);
          const double scale = std::max({std::abs(numeric), std::abs(analytic[k]), 1e-3});
          worst = std::max(worst, std::abs(numeric - analytic[k]) / scale);
          ++checked;
        }
      };
      check(t, g.target);
      check(c, g.context);
      if (src) check(d, g.source);
      for (std::size_t n = 0; n < negs.size(); ++n) check(negs[n], g.negatives[n]);
    }
  }
  return {worst <= 1e-4, "max relative error " + fmt("%.2e", worst) + " over " + std::to_string(checked) +
                             " partials, both scoring modes (limit 1e-4)"};
}

TrainConfig two_topic_config() {
  TrainConfig config;
  config.dim = 8;
  config.window = 3;
  config.epochs = 20;
  config.negatives = 3;
  config.min_count = 1;
  config.seed = 42;
  config.learning_rate_start = 0.005;
  return config;
}

Outcome trainer_sanity() {
  const auto corpus = testing::two_topic_corpus(12, 10, 40, 3);
  const auto config = two_topic_config();
  const auto vocab = build_vocabulary(corpus, config.min_count);
  const auto pairs = enumerate_pairs(corpus, vocab, {}, config.window);
  const auto negs = draw_fixed_negatives(vocab, pairs.size(), config.negatives, 99);
  const double before = objective_value(initial_model(corpus, config), pairs, negs, config.mode);
  const auto model = train(corpus, config);
  const double after = objective_value(model, pairs, negs, config.mode);

  double within = 0.0, across = 0.0;
  int nw = 0, na = 0;
  for (TokenId i = 0; i < vocab.size(); ++i) {
    for (TokenId j = i + 1; j < vocab.size(); ++j) {
      const double c = cosine(*model.target_vector(vocab.token(i)), *model.target_vector(vocab.token(j)));
      if (vocab.token(i)[0] == vocab.token(j)[0]) {
        within += c;
        ++nw;
      } else {
        across += c;
        ++na;
      }
    }
  }
  within /= nw;
  across /= na;
  const double drop = 1.0 - after / before;
  return {drop >= 0.2 && within > across && corpus.token_count() <= 10000,
          std::to_string(corpus.token_count()) + " tokens, objective drop " + fmt("%.1f%%", 100 * drop) +
              " (need >= 20%), mean cosine within " + fmt("%.3f", within) + " vs across " + fmt("%.3f", across)};
}

std::vector<std::string> planted_neighbors(const EmbeddingModel& model, char topic) {
  const auto metric = condition(model, indicator_weights(testing::planted_topic(topic), model.vocab()));
  std::vector<std::string> out;
  for (const auto& n : conditioned_knn("q", 10, metric, model)) out.push_back(n.token);
  return out;
}

Outcome conditioning_effect() {
  TrainConfig config;
  config.dim = 10;
  config.window = 5;
  config.epochs = 10;
  config.min_count = 1;
  config.seed = 3;
  const auto corpus = testing::planted_corpus(25, 60, 0.1, 0.3, 3);
  const auto first = train(corpus, config);
  const auto second = train(corpus, config);
  const auto a = planted_neighbors(first, 'a'), b = planted_neighbors(first, 'b');
  const double j = testing::jaccard(a, b);
  const bool deterministic = first.targets() == second.targets() && planted_neighbors(second, 'a') == a &&
                             planted_neighbors(second, 'b') == b;
  return {j < 0.5 && a.size() == 10 && deterministic,
          "top-10 Jaccard between topic conditionings " + fmt("%.2f", j) + " (need < 0.5), repeated run " +
              (deterministic ? "identical" : "DIFFERENT")};
}

SimilarityTable read_fixture(const std::string& name) {
  std::ifstream in(g_data_dir / name);
  if (!in) throw std::runtime_error("cannot open " + (g_data_dir / name).string());
  return read_table_tsv(in);
}

Outcome table_reproduction() {
  std::ifstream bloc_file(g_data_dir / "blocs.txt");
  if (!bloc_file) throw std::runtime_error("cannot open blocs.txt");
  const auto blocs = BlocMap::from_sections(parse_sections(bloc_file));
  const std::vector<std::string> three{"Left wing", "Right wing", "Nativist"};
  const auto grid = restrict_levels(bloc_average(read_fixture("party_similarity.tsv"), blocs), three, three, {});
  const auto fit = additive_fit(grid);
  const auto expected = read_fixture("bloc_residuals.tsv");
  double worst = 0.0;
  int cells = 0;
  for (const auto& m : expected.media())
    for (const auto& i : expected.issues())
      for (const auto& b : expected.columns()) {
        worst = std::max(worst, std::abs(fit.residuals.value(m, i, b) - expected.value(m, i, b)));
        ++cells;
      }
  const double spot1 = fit.residuals.value("Nativist", "Left wing", "Nativist");
  const double spot2 = fit.residuals.value("Nativist", "Nativist", "Left");
  const bool pass =
      cells == 27 && worst <= 0.02 && std::abs(spot1 - 0.18) <= 0.02 && std::abs(spot2 + 0.15) <= 0.02;
  return {pass, "27 residuals, max deviation " + fmt("%.4f", worst) + " (limit 0.02); spots " + fmt("%.3f", spot1) +
                    " (0.18) and " + fmt("%.3f", spot2) + " (-0.15)"};
}

Outcome additive_properties() {
  std::mt19937_64 rng(109);
  std::normal_distribution<double> normal;
  double level_sum = 0.0, effect_sum = 0.0, recovery = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int M = 2 + trial % 3, I = 2 + trial % 4, B = 3 + trial % 2;
    std::vector<std::string> ml, il, bl;
    for (int k = 0; k < M; ++k) ml.push_back("m" + std::to_string(k));
    for (int k = 0; k < I; ++k) il.push_back("i" + std::to_string(k));
    for (int k = 0; k < B; ++k) bl.push_back("b" + std::to_string(k));
    SimilarityTable noisy(ml, il, bl), exact(ml, il, bl);
    Eigen::VectorXd a = random_vector(rng, M), b = random_vector(rng, I), g = random_vector(rng, B);
    a.array() -= a.mean();
    b.array() -= b.mean();
    g.array() -= g.mean();
    const double mu = normal(rng);
    for (int m = 0; m < M; ++m)
      for (int i = 0; i < I; ++i)
        for (int c = 0; c < B; ++c) {
          noisy.at(m, i, c) = normal(rng);
          exact.at(m, i, c) = mu + a[m] + b[i] + g[c];
        }
    const auto fit = additive_fit(noisy);
    effect_sum = std::max({effect_sum, std::abs(fit.media_effects.sum()), std::abs(fit.issue_effects.sum()),
                           std::abs(fit.bloc_effects.sum())});
    std::vector<double> by_m(M, 0.0), by_i(I, 0.0), by_b(B, 0.0);
    for (int m = 0; m < M; ++m)
      for (int i = 0; i < I; ++i)
        for (int c = 0; c < B; ++c) {
          const double r = fit.residuals.at(m, i, c);
          by_m[m] += r;
          by_i[i] += r;
          by_b[c] += r;
        }
    for (const auto* v : {&by_m, &by_i, &by_b})
      for (double s : *v) level_sum = std::max(level_sum, std::abs(s));

    const auto known = additive_fit(exact);
    for (int m = 0; m < M; ++m)
      for (int i = 0; i < I; ++i)
        for (int c = 0; c < B; ++c) recovery = std::max(recovery, std::abs(known.residuals.at(m, i, c)));
  }
  const bool pass = effect_sum <= 1e-12 && level_sum <= 1e-9 && recovery <= 1e-10;
  return {pass, "max |effect sum| " + fmt("%.1e", effect_sum) + ", max per-level residual sum " +
                    fmt("%.1e", level_sum) + " (limit 1e-9), max residual on exact tables " + fmt("%.1e", recovery) +
                    " (limit 1e-10)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism_and_io() {
  const fs::path dir = fs::temp_directory_path() / ("psim_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  auto config = two_topic_config();
  config.mode = TrainMode::kSourceAugmented;
  config.subsample = 0.05;
  const auto corpus = testing::two_topic_corpus(12, 10, 40, 8);
  bool identical = true;
  for (auto format : {VectorFormat::kBinary, VectorFormat::kText}) {
    save_model(train(corpus, config), dir / "one", format);
    save_model(train(corpus, config), dir / "two", format);
    for (const auto& entry : fs::directory_iterator(dir / "one")) {
      identical = identical && slurp(entry.path()) == slurp(dir / "two" / entry.path().filename());
    }
    fs::remove_all(dir / "one");
    fs::remove_all(dir / "two");
  }

  std::mt19937_64 rng(110);
  const RowMatrixXf t = random_matrix(rng, 200, 16, 3.0).cast<float>();
  const auto vocab = numbered_vocab(200);
  save_vectors(EmbeddingModel(vocab, t, RowMatrixXf::Zero(200, 16)), dir / "vectors.bin", VectorFormat::kBinary);
  const auto back = load_vectors(dir / "vectors.bin", VectorFormat::kBinary);
  const bool round_trip = back.targets() == t && back.vocab().tokens() == vocab.tokens();
  fs::remove_all(dir);
  return {identical && round_trip, std::string("same-seed model files ") + (identical ? "byte-identical" : "DIFFER") +
                                       ", binary save/load " + (round_trip ? "bit-exact" : "NOT bit-exact")};
}

}  // namespace
}  // namespace psim

int main(int argc, char** argv) {
  using namespace psim;
  g_data_dir = argc > 1 ? fs::path(argv[1]) : fs::path(PSIM_ACCEPTANCE_DATA);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double time_limit;
  };
  const std::vector<Criterion> criteria{
      {1, "closed-form / empirical equivalence", closed_form_matches_empirical, 10.0},
      {2, "cosine reduction", cosine_reduction, 0.0},
      {3, "metric axioms", metric_axioms, 0.0},
      {4, "weighted covariance oracle", covariance_oracle, 0.0},
      {5, "gradient check", gradient_check, 0.0},
      {6, "trainer sanity", trainer_sanity, 60.0},
      {7, "conditioning effect", conditioning_effect, 0.0},
      {8, "reference table reproduction", table_reproduction, 1.0},
      {9, "additive-fit properties", additive_properties, 0.0},
      {10, "determinism and IO", determinism_and_io, 0.0},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.2f s", seconds);
    if (c.time_limit > 0) {
      timing += fmt(", limit %.0f s", c.time_limit);
      if (seconds >= c.time_limit) outcome.pass = false;
    }
    if (!outcome.pass) ++failures;
    std::printf("%s  criterion %2d  %-36s %s [%s]\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name,
                outcome.detail.c_str(), timing.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
