#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mlpa/errors.hpp"
#include "mlpa/inference.hpp"
#include "mlpa/model.hpp"
#include "support.hpp"

using namespace mlpa;

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

Document doc_with(std::vector<WordCount> words, std::size_t C, std::size_t K = 0) {
  Document d;
  d.id = "d";
  d.words = std::move(words);
  d.true_labels.assign(C, kUnknownLabel);
  d.crowd_labels.assign(K * C, kUnknownLabel);
  return d;
}

ModelParams random_params(Rng& rng, Mode mode, bool smoothing) {
  Dimensions dims{1, 3, 4, 9, mode == Mode::crowd ? 5u : 0u};
  ModelParams p = init_params(dims, mode, smoothing, rng());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double& a : p.theta_prior.values()) a = 0.01 + 10.0 * unit(rng);
  for (double& x : p.class_prior) x = 0.01 + 0.98 * unit(rng);
  for (double& r : p.annotator_quality) r = 0.01 + 0.98 * unit(rng);
  for (double& e : p.topic_word_prior.values()) e = std::exp(10.0 * unit(rng) - 5.0);
  return p;
}

}  // namespace

TEST_CASE("init_params defaults") {
  const ModelParams p = init_params({1, 2, 3, 5, 0}, Mode::no_crowd, false, 7);
  CHECK(p.theta_prior.rows() == 4);
  CHECK(p.theta_prior.cols() == 3);
  for (double a : p.theta_prior.values()) CHECK(a == 1.0);
  CHECK(p.class_prior == std::vector<double>{0.5, 0.5});
  CHECK(p.annotator_quality.empty());
  REQUIRE(p.topic_word.rows() == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    double sum = 0.0;
    for (double b : p.topic_word.row(t)) {
      CHECK(b >= 0.0);
      sum += b;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
  CHECK(p.topic_word_prior.empty());
  CHECK(validate(p).empty());
}

TEST_CASE("init_params is deterministic in the seed") {
  const Dimensions dims{1, 2, 3, 5, 0};
  CHECK(init_params(dims, Mode::no_crowd, false, 7) == init_params(dims, Mode::no_crowd, false, 7));
  CHECK_FALSE(init_params(dims, Mode::no_crowd, false, 7).topic_word ==
              init_params(dims, Mode::no_crowd, false, 8).topic_word);
}

TEST_CASE("init_params smoothing and crowd variants") {
  const ModelParams s = init_params({1, 2, 3, 5, 0}, Mode::no_crowd, true, 7);
  CHECK(s.topic_word.empty());
  REQUIRE(s.topic_word_prior.rows() == 3);
  for (double e : s.topic_word_prior.values()) CHECK(e == 1.0);

  const ModelParams c = init_params({1, 2, 3, 5, 4}, Mode::crowd, false, 7);
  CHECK(c.annotator_quality == std::vector<double>(4, 0.7));
  CHECK_THROWS_AS(init_params({1, 2, 3, 5, 0}, Mode::crowd, false, 7), std::invalid_argument);
}

TEST_CASE("dimension validation") {
  CHECK_NOTHROW(Dimensions{1, 1, 1, 1, 0}.validate());
  CHECK_THROWS(Dimensions{0, 1, 1, 1, 0}.validate());
  CHECK_THROWS(Dimensions{1, 0, 1, 1, 0}.validate());
  CHECK_THROWS(Dimensions{1, 1, 0, 1, 0}.validate());
  CHECK_THROWS(Dimensions{1, 1, 1, 0, 0}.validate());
}

TEST_CASE("mode names") {
  CHECK(parse_mode("crowd") == Mode::crowd);
  CHECK(parse_mode("nocrowd") == Mode::no_crowd);
  CHECK(to_string(Mode::crowd) == "crowd");
  CHECK(to_string(Mode::no_crowd) == "nocrowd");
  CHECK_THROWS(parse_mode("both"));
}

TEST_CASE("document validation") {
  const Dimensions dims{1, 2, 2, 4, 0};
  Document d = doc_with({{0, 1}, {3, 2}}, 2);
  CHECK_NOTHROW(d.validate(dims));
  CHECK(d.length() == 3);
  d.words = {{3, 1}, {0, 1}};
  CHECK_THROWS(d.validate(dims));
  d.words = {{4, 1}};
  CHECK_THROWS(d.validate(dims));
  d.words = {{1, 0}};
  CHECK_THROWS(d.validate(dims));
  d.words = {};
  CHECK_THROWS(d.validate(dims));
}

TEST_CASE("init_doc_variational") {
  SUBCASE("delta rows start uniform") {
    const ModelParams p = init_params({1, 4, 3, 6, 0}, Mode::no_crowd, false, 1);
    const auto s = init_doc_variational(doc_with({{0, 2}, {5, 1}}, 4), p, LabelEvidence::none);
    for (std::size_t w = 0; w < 2; ++w) {
      for (double x : s.word_class.row(w)) CHECK(x == 0.25);
      for (double x : s.word_topic.row(w)) CHECK(x == doctest::Approx(1.0 / 3.0));
    }
    CHECK(validate(p, &s).empty());
  }
  SUBCASE("unlabelled documents start at the prior") {
    ModelParams p = init_params({1, 2, 2, 3, 0}, Mode::no_crowd, false, 1);
    p.class_prior = {0.3, 0.7};
    const auto s = init_doc_variational(doc_with({{1, 1}}, 2), p, LabelEvidence::none);
    CHECK(s.membership == std::vector<double>{0.3, 0.7});
    CHECK_FALSE(s.labels_observed);
  }
  SUBCASE("unanimous annotators push the warm start their way") {
    ModelParams p = init_params({1, 2, 2, 3, 3}, Mode::crowd, false, 1);
    p.annotator_quality = {0.9, 0.9, 0.9};
    Document d = doc_with({{1, 1}}, 2, 3);
    for (std::size_t k = 0; k < 3; ++k) d.crowd_labels[k * 2 + 0] = 1;
    const auto s = init_doc_variational(d, p, LabelEvidence::crowd);
    CHECK(s.membership[0] > 0.5);
    CHECK(s.membership[1] == doctest::Approx(0.5));
  }
  SUBCASE("observed labels are copied exactly") {
    const ModelParams p = init_params({1, 2, 2, 3, 0}, Mode::no_crowd, false, 1);
    Document d = doc_with({{1, 1}}, 2);
    d.true_labels = {1, 0};
    const auto s = init_doc_variational(d, p, LabelEvidence::observed);
    CHECK(s.labels_observed);
    CHECK(s.membership == std::vector<double>{1.0, 0.0});
    CHECK(validate(p, &s).empty());
    d.true_labels = {1, kUnknownLabel};
    CHECK_THROWS(init_doc_variational(d, p, LabelEvidence::observed));
  }
  SUBCASE("gamma is alpha plus the weighted counts") {
    ModelParams p = init_params({1, 2, 3, 4, 0}, Mode::no_crowd, false, 1);
    p.class_prior = {0.2, 0.6};
    const Document d = doc_with({{0, 2}, {3, 1}}, 2);
    const auto s = init_doc_variational(d, p, LabelEvidence::none);
    // delta = 1/2, phi = 1/3, three tokens: per (i, t) count 3 * 1/6 = 1/2.
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t t = 0; t < 3; ++t) {
        CHECK(s.theta_posterior(2 * i + 1, t) == doctest::Approx(1.0 + 0.5 * p.class_prior[i]));
        CHECK(s.theta_posterior(2 * i, t) == doctest::Approx(1.0 + 0.5 * (1 - p.class_prior[i])));
      }
    }
  }
}

TEST_CASE("validate reports violated invariants") {
  ModelParams p = init_params({1, 2, 3, 5, 2}, Mode::crowd, false, 3);
  Document d = doc_with({{0, 1}, {2, 2}}, 2, 2);
  DocVariational s = init_doc_variational(d, p, LabelEvidence::crowd);
  CHECK(validate(p, &s).empty());

  SUBCASE("beta") {
    for (double& b : p.topic_word.row(1)) b *= 2.0;
    CHECK(contains(validate(p), "beta row not stochastic"));
  }
  SUBCASE("alpha") {
    p.theta_prior(0, 0) = -1.0;
    CHECK(contains(validate(p), "alpha positivity"));
  }
  SUBCASE("xi") {
    p.class_prior[0] = 0.0;
    CHECK(contains(validate(p), "xi range"));
  }
  SUBCASE("rho") {
    p.annotator_quality[1] = 1.0;
    CHECK(contains(validate(p), "rho range"));
  }
  SUBCASE("delta") {
    s.word_class(0, 0) += 0.1;
    CHECK(contains(validate(p, &s), "delta row not stochastic"));
  }
  SUBCASE("phi") {
    s.word_topic(1, 2) = 0.9;
    CHECK(contains(validate(p, &s), "phi row not stochastic"));
  }
  SUBCASE("Delta") {
    s.membership[1] = 1.0;
    CHECK(contains(validate(p, &s), "Delta range"));
  }
  SUBCASE("gamma") {
    s.theta_posterior(3, 1) = p.theta_prior(3, 1) - 1e-6;
    CHECK(contains(validate(p, &s), "gamma below alpha"));
  }
}

TEST_CASE("validate covers the smoothed parameters") {
  ModelParams p = init_params({1, 2, 3, 5, 0}, Mode::no_crowd, true, 3);
  SmoothedTopicState chi{p.topic_word_prior};
  chi.topic_word_posterior(0, 0) += 1.0;
  CHECK(validate(p, nullptr, &chi).empty());
  chi.topic_word_posterior(1, 1) = 0.5;
  CHECK(contains(validate(p, nullptr, &chi), "chi below eta"));
  p.topic_word_prior(2, 4) = 0.0;
  CHECK(contains(validate(p), "eta positivity"));
}

TEST_CASE("model files round-trip bit-exactly") {
  Rng rng(99);
  for (const Mode mode : {Mode::no_crowd, Mode::crowd}) {
    for (const bool smoothing : {false, true}) {
      const ModelParams p = random_params(rng, mode, smoothing);
      SmoothedTopicState chi;
      if (smoothing) {
        chi.topic_word_posterior = p.topic_word_prior;
        for (double& c : chi.topic_word_posterior.values()) c += 1.0 / 3.0;
      }
      std::stringstream ss;
      write_model(ss, p, smoothing ? &chi : nullptr);
      CHECK(ss.str().rfind("mlpa-model v1\n", 0) == 0);
      const LoadedModel back = read_model(ss);
      CHECK(back.params == p);
      if (smoothing) CHECK(back.topics.topic_word_posterior == chi.topic_word_posterior);
      std::stringstream again;
      write_model(again, back.params, smoothing ? &back.topics : nullptr);
      std::stringstream first;
      write_model(first, p, smoothing ? &chi : nullptr);
      CHECK(again.str() == first.str());
    }
  }
}

TEST_CASE("malformed model files are rejected") {
  const ModelParams p = init_params({1, 2, 3, 5, 0}, Mode::no_crowd, false, 3);
  std::stringstream good;
  write_model(good, p, nullptr);
  const std::string text = good.str();

  std::stringstream bad_header("mlpa-model v2\n" + text.substr(text.find('\n') + 1));
  CHECK_THROWS_AS(read_model(bad_header), FormatError);

  std::stringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS(read_model(truncated));

  std::string broken = text;
  broken.replace(broken.find("xi 2\n") + 5, 3, "1.5");
  std::stringstream invalid(broken);
  CHECK_THROWS(read_model(invalid));
}
