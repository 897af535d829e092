#pragma once

// Generators and reference oracles shared by the test binaries. The oracles
// are deliberately naive scalar loops, written independently of the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "psim/corpus.hpp"
#include "psim/embedding_model.hpp"

namespace psim::testing {

inline RowMatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  RowMatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int n, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

/// Positive weights in (0.1, 2) with a random subset of zeros (at least two
/// stay positive).
inline std::vector<double> random_weights(std::mt19937_64& rng, int n, double zero_fraction = 0.3) {
  std::uniform_real_distribution<double> w(0.1, 2.0);
  std::bernoulli_distribution zero(zero_fraction);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = (i < 2 || !zero(rng)) ? w(rng) : 0.0;
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

struct Moments {
  std::vector<double> mean;
  std::vector<std::vector<double>> cov;
};

/// Two-pass weighted population moments, plain loops.
inline Moments oracle_moments(const RowMatrixXd& t, const std::vector<double>& w) {
  const int n = static_cast<int>(t.rows());
  const int d = static_cast<int>(t.cols());
  double total = 0.0;
  for (double x : w) total += x;
  Moments m{std::vector<double>(d, 0.0), std::vector<std::vector<double>>(d, std::vector<double>(d, 0.0))};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m.mean[j] += w[i] * t(i, j);
  for (int j = 0; j < d; ++j) m.mean[j] /= total;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        m.cov[j][k] += w[i] * (t(i, j) - m.mean[j]) * (t(i, k) - m.mean[k]);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) m.cov[j][k] /= total;
  return m;
}

/// Weighted Pearson correlation of the scores x.t_i and y.t_i.
inline double oracle_weighted_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                          const RowMatrixXd& t, const std::vector<double>& w) {
  const int n = static_cast<int>(t.rows());
  std::vector<double> sx(n, 0.0), sy(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < t.cols(); ++k) {
      sx[i] += x[k] * t(i, k);
      sy[i] += y[k] * t(i, k);
    }
  double W = 0, mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    W += w[i];
    mx += w[i] * sx[i];
    my += w[i] * sy[i];
  }
  mx /= W;
  my /= W;
  double cxy = 0, vx = 0, vy = 0;
  for (int i = 0; i < n; ++i) {
    cxy += w[i] * (sx[i] - mx) * (sy[i] - my);
    vx += w[i] * (sx[i] - mx) * (sx[i] - mx);
    vy += w[i] * (sy[i] - my) * (sy[i] - my);
  }
  return cxy / std::sqrt(vx * vy);
}

inline double oracle_cosine(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double xy = 0, xx = 0, yy = 0;
  for (int i = 0; i < x.size(); ++i) {
    xy += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  return xy / std::sqrt(xx * yy);
}

/// Two topics with disjoint vocabularies. Each document draws its tokens
/// uniformly from one topic's words; documents alternate between topics and
/// carry the source label "topic-a" or "topic-b".
inline TrainingCorpus two_topic_corpus(int words_per_topic, int docs_per_topic, int doc_length,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, words_per_topic - 1);
  TrainingCorpus corpus;
  for (int d = 0; d < docs_per_topic; ++d) {
    for (char topic : {'a', 'b'}) {
      Document doc{std::string("topic-") + topic, {}};
      for (int i = 0; i < doc_length; ++i) doc.tokens.push_back(topic + std::to_string(pick(rng)));
      corpus.documents.push_back(std::move(doc));
    }
  }
  return corpus;
}

inline std::vector<std::string> topic_words(char topic, int words_per_topic) {
  std::vector<std::string> out;
  for (int i = 0; i < words_per_topic; ++i) out.push_back(topic + std::to_string(i));
  return out;
}

/// Four subtopics a1, a2, b1, b2 of `words_per_subtopic` words each
/// ("a1w0", ...), one document per subtopic per round. The ambiguous word "q"
/// replaces tokens in a1 documents at `minor_rate` and in b1 documents at
/// `major_rate`, so its dominant usage is b1.
inline TrainingCorpus planted_corpus(int rounds, int doc_length, double minor_rate,
                                     double major_rate, std::uint64_t seed,
                                     int words_per_subtopic = 10) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, words_per_subtopic - 1);
  std::bernoulli_distribution minor(minor_rate), major(major_rate);
  TrainingCorpus corpus;
  for (int r = 0; r < rounds; ++r) {
    for (const std::string sub : {"a1", "a2", "b1", "b2"}) {
      Document doc{"src-" + sub, {}};
      for (int i = 0; i < doc_length; ++i) {
        const bool q = sub == "a1" ? minor(rng) : sub == "b1" ? major(rng) : false;
        doc.tokens.push_back(q ? "q" : sub + "w" + std::to_string(pick(rng)));
      }
      corpus.documents.push_back(std::move(doc));
    }
  }
  return corpus;
}

/// All words of topic 'a' or 'b' in planted_corpus (both subtopics).
inline std::vector<std::string> planted_topic(char topic, int words_per_subtopic = 10) {
  std::vector<std::string> out;
  for (const char* sub : {"1", "2"})
    for (int i = 0; i < words_per_subtopic; ++i)
      out.push_back(std::string(1, topic) + sub + "w" + std::to_string(i));
  return out;
}

inline double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> x(a), y(b), both, either;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(both));
  std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(either));
  return either.empty() ? 1.0 : static_cast<double>(both.size()) / either.size();
}

}  // namespace psim::testing
