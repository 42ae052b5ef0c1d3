#include "mlpa/synthetic.hpp"

#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "mlpa/random.hpp"

namespace mlpa::synthetic {

namespace {
constexpr double kBaseAlpha = 0.1;
constexpr double kPeakAlpha = 10.0;
constexpr double kInBlock = 1.0;
constexpr double kOffBlock = 0.01;
}  // namespace

ModelParams separated_params(std::size_t classes, std::size_t topics,
                             std::size_t vocab, std::uint64_t seed) {
  if (classes == 0 || topics == 0 || vocab < topics) {
    throw std::invalid_argument("separated_params: need C >= 1 and V >= T >= 1");
  }
  ModelParams p;
  p.mode = Mode::no_crowd;
  p.classes = classes;
  p.topics = topics;
  p.vocab = vocab;
  p.theta_prior = Matrix<double>(2 * classes, topics, kBaseAlpha);
  p.class_prior.resize(classes);
  for (std::size_t i = 0; i < classes; ++i) {
    const std::size_t present = i % topics;
    std::size_t absent = (i + 1) % topics;
    if (topics >= 2 * classes) {
      absent = classes + i;
    } else if (topics > classes) {
      absent = topics - 1;
    }
    p.theta_prior(2 * i + 1, present) += kPeakAlpha;
    p.theta_prior(2 * i, absent) += kPeakAlpha;
    p.class_prior[i] =
        classes == 1 ? 0.45 : 0.3 + 0.3 * static_cast<double>(i) / (classes - 1);
  }

  Rng rng(seed);
  p.topic_word = Matrix<double>(topics, vocab);
  const std::size_t block = vocab / topics;
  for (std::size_t t = 0; t < topics; ++t) {
    std::vector<double> conc(vocab, kOffBlock);
    const std::size_t end = t + 1 == topics ? vocab : (t + 1) * block;
    for (std::size_t v = t * block; v < end; ++v) conc[v] = kInBlock;
    const auto row = sample_dirichlet(conc, rng);
    std::copy(row.begin(), row.end(), p.topic_word.row(t).begin());
  }
  return p;
}

Corpus generate_corpus(const ModelParams& truth, std::size_t docs,
                       double mean_length, std::uint64_t seed) {
  if (truth.smoothing) {
    throw std::invalid_argument("generate_corpus: needs an explicit beta");
  }
  if (mean_length < 1.0) {
    throw std::invalid_argument("generate_corpus: mean length must be >= 1");
  }
  const std::size_t C = truth.classes;
  Corpus corpus;
  corpus.reserve(docs);
  for (std::size_t d = 0; d < docs; ++d) {
    Rng rng = stream_rng(seed, d);
    Document doc;
    doc.id = "doc" + std::to_string(d);
    doc.true_labels.resize(C);
    std::vector<std::vector<double>> theta(C);
    for (std::size_t i = 0; i < C; ++i) {
      std::bernoulli_distribution coin(truth.class_prior[i]);
      const int on = coin(rng) ? 1 : 0;
      doc.true_labels[i] = static_cast<std::int8_t>(on);
      theta[i] = sample_dirichlet(truth.theta_prior_row(i, on), rng);
    }
    std::poisson_distribution<int> extra(mean_length - 1.0);
    const std::size_t length = 1 + static_cast<std::size_t>(extra(rng));
    std::uniform_int_distribution<std::size_t> pick_class(0, C - 1);
    std::map<std::uint32_t, std::uint32_t> counts;
    for (std::size_t n = 0; n < length; ++n) {
      const std::size_t u = pick_class(rng);
      const std::size_t z = sample_categorical(theta[u], rng);
      const std::size_t w = sample_categorical(truth.topic_word.row(z), rng);
      ++counts[static_cast<std::uint32_t>(w)];
    }
    for (const auto& [index, count] : counts) doc.words.push_back({index, count});
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace mlpa::synthetic
