#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mlpa/crowd.hpp"
#include "mlpa/errors.hpp"
#include "mlpa/random.hpp"

using namespace mlpa;

namespace {

Corpus labelled(std::size_t docs, std::size_t C, std::uint64_t seed) {
  Rng rng(seed);
  std::bernoulli_distribution coin(0.5);
  Corpus corpus(docs);
  for (std::size_t d = 0; d < docs; ++d) {
    corpus[d].id = "d" + std::to_string(d);
    corpus[d].words = {{0, 1}};
    for (std::size_t i = 0; i < C; ++i) corpus[d].true_labels.push_back(coin(rng) ? 1 : 0);
  }
  return corpus;
}

AnnotatorPool fixed_pool(std::vector<double> qualities, std::size_t per_doc) {
  AnnotatorPool pool;
  pool.qualities = std::move(qualities);
  pool.per_doc = per_doc;
  return pool;
}

std::size_t annotators_on(const Document& doc) {
  const std::size_t C = doc.num_classes();
  std::size_t n = 0;
  for (std::size_t k = 0; k * C < doc.crowd_labels.size(); ++k) {
    bool any = false;
    for (std::size_t i = 0; i < C; ++i) any |= doc.crowd_label(k, i) != kUnknownLabel;
    n += any;
  }
  return n;
}

}  // namespace

TEST_CASE("bucket presets") {
  const auto def = default_buckets();
  REQUIRE(def.size() == 3);
  CHECK(def[0].count == 10);
  CHECK(def[0].low == 0.51);
  CHECK(def[0].high == 0.65);
  CHECK(def[1].count == 20);
  CHECK(def[1].low == 0.66);
  CHECK(def[1].high == 0.85);
  CHECK(def[2].count == 20);
  CHECK(def[2].low == 0.86);
  CHECK(def[2].high == 0.9999);

  const auto adv = adversarial_buckets();
  REQUIRE(adv.size() == 4);
  CHECK(adv[0].count == 10);
  CHECK(adv[0].low == 0.0001);
  CHECK(adv[0].high == 0.1);
  CHECK(adv[1].count == 15);
  CHECK(adv[2].count == 20);
  CHECK(adv[3].count == 5);
  CHECK(adv[3].low == 0.86);
}

TEST_CASE("sampled qualities fall in their buckets") {
  const AnnotatorPool pool = sample_pool(default_buckets(), 5, 3);
  REQUIRE(pool.size() == 50);
  std::size_t k = 0;
  for (const auto& b : pool.buckets) {
    for (std::size_t n = 0; n < b.count; ++n, ++k) {
      CHECK(pool.qualities[k] >= b.low);
      CHECK(pool.qualities[k] <= b.high);
    }
  }
  CHECK(sample_pool(default_buckets(), 5, 3).qualities == pool.qualities);
  CHECK(sample_pool(default_buckets(), 5, 4).qualities != pool.qualities);
  CHECK(sample_pool({{1, 0.9, 0.9}}, 1, 0).qualities == std::vector<double>{0.9});
}

TEST_CASE("pool validation") {
  CHECK_THROWS(sample_pool({{2, 0.0, 0.5}}, 1, 0));
  CHECK_THROWS(sample_pool({{2, 0.5, 1.0}}, 1, 0));
  CHECK_THROWS(sample_pool({{2, 0.7, 0.6}}, 1, 0));
  CHECK_THROWS(sample_pool({{2, 0.6, 0.7}}, 3, 0));
  CHECK_THROWS(sample_pool({{2, 0.6, 0.7}}, 0, 0));
  CHECK_THROWS(fixed_pool({}, 1).validate());
  CHECK_THROWS(fixed_pool({1.2}, 1).validate());
}

TEST_CASE("bucket strings") {
  const auto b = parse_buckets("10:0.51:0.65,2:0.9:0.95");
  REQUIRE(b.size() == 2);
  CHECK(b[1].count == 2);
  CHECK(b[1].low == 0.9);
  CHECK(b[1].high == 0.95);
  CHECK_THROWS(parse_buckets(""));
  CHECK_THROWS(parse_buckets("10:0.5"));
  CHECK_THROWS(parse_buckets("10;0.5;0.6"));
  CHECK_THROWS(parse_buckets("10:0.5:0.6x"));
}

TEST_CASE("noiseless and fully flipped annotators") {
  const Corpus corpus = labelled(40, 3, 1);
  for (const double rho : {1.0, 0.0}) {
    const AnnotatedCorpus out = annotate_corpus(corpus, fixed_pool({rho}, 1), 9);
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      for (std::size_t i = 0; i < 3; ++i) {
        const int truth = corpus[d].true_labels[i];
        CHECK(out.docs[d].crowd_label(0, i) == (rho == 1.0 ? truth : 1 - truth));
      }
    }
  }
}

TEST_CASE("every document gets exactly per_doc annotators") {
  const AnnotatorPool pool = sample_pool(default_buckets(), 5, 2);
  const AnnotatedCorpus out = annotate_corpus(labelled(200, 4, 2), pool, 5);
  for (const auto& doc : out.docs) {
    CHECK(annotators_on(doc) == 5);
    CHECK(doc.num_annotators() == 50);
  }
}

TEST_CASE("selected annotators label every class unless masked") {
  const AnnotatorPool pool = sample_pool(default_buckets(), 5, 2);
  const AnnotatedCorpus full = annotate_corpus(labelled(50, 3, 2), pool, 5);
  std::size_t provided = 0;
  for (const auto& doc : full.docs) {
    for (auto y : doc.crowd_labels) provided += y != kUnknownLabel;
  }
  CHECK(provided == 50 * 5 * 3);

  const AnnotatedCorpus masked = annotate_corpus(labelled(400, 3, 2), pool, 5, 0.3);
  provided = 0;
  for (const auto& doc : masked.docs) {
    for (auto y : doc.crowd_labels) provided += y != kUnknownLabel;
  }
  CHECK(static_cast<double>(provided) / (400 * 5 * 3) == doctest::Approx(0.7).epsilon(0.05));
  CHECK_THROWS(annotate_corpus(labelled(5, 3, 2), pool, 5, 1.0));
}

TEST_CASE("empirical flip rate matches the annotator quality") {
  const AnnotatorPool pool = fixed_pool({0.62, 0.9, 0.15}, 3);
  const Corpus corpus = labelled(4000, 3, 8);
  const AnnotatedCorpus out = annotate_corpus(corpus, pool, 13);
  for (std::size_t k = 0; k < 3; ++k) {
    double flips = 0.0, total = 0.0;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      for (std::size_t i = 0; i < 3; ++i) {
        const auto y = out.docs[d].crowd_label(k, i);
        if (y == kUnknownLabel) continue;
        total += 1.0;
        flips += y != corpus[d].true_labels[i];
      }
    }
    REQUIRE(total >= 1e4);
    CHECK(std::abs(flips / total - (1.0 - pool.qualities[k])) < 0.02);
  }
}

TEST_CASE("annotation hides the true labels and keeps them aside") {
  const Corpus corpus = labelled(30, 2, 4);
  const AnnotatedCorpus out = annotate_corpus(corpus, sample_pool(default_buckets(), 5, 1), 2);
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    CHECK(out.docs[d].true_labels == std::vector<std::int8_t>{kUnknownLabel, kUnknownLabel});
    CHECK_FALSE(out.docs[d].labels_known());
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(out.truth(d, i) == corpus[d].true_labels[i]);
    }
  }
  Corpus partial = corpus;
  partial[7].true_labels[1] = kUnknownLabel;
  CHECK_THROWS(annotate_corpus(partial, sample_pool(default_buckets(), 5, 1), 2));
}

TEST_CASE("annotation is deterministic per seed and document") {
  const Corpus corpus = labelled(20, 2, 4);
  const AnnotatorPool pool = sample_pool(default_buckets(), 5, 1);
  const auto a = annotate_corpus(corpus, pool, 77);
  CHECK(annotate_corpus(corpus, pool, 77).docs == a.docs);
  CHECK(annotate_corpus(corpus, pool, 78).docs != a.docs);
  // A document's labels do not depend on what comes before it.
  const Corpus head(corpus.begin(), corpus.begin() + 5);
  const auto b = annotate_corpus(head, pool, 77);
  for (std::size_t d = 0; d < 5; ++d) CHECK(b.docs[d] == a.docs[d]);
}

TEST_CASE("ann_rmse") {
  const std::vector<double> truth{0.6, 0.8, 0.95};
  CHECK(ann_rmse(truth, truth) == 0.0);
  const std::vector<double> offset{0.7, 0.9, 1.05};
  CHECK(ann_rmse(offset, truth) == doctest::Approx(0.1).epsilon(1e-12));
  const std::vector<double> other{0.5, 0.81, 0.7};
  CHECK(ann_rmse(other, truth) == ann_rmse(truth, other));
  CHECK(ann_rmse(other, truth) > 0.0);
  CHECK(ann_rmse(std::vector<double>{0.2, 0.5}, std::vector<double>{0.5, 0.9}) ==
        doctest::Approx(std::sqrt((0.09 + 0.16) / 2.0)).epsilon(1e-14));
  CHECK_THROWS(ann_rmse(std::vector<double>{0.1}, truth));
  CHECK_THROWS(ann_rmse(std::vector<double>{}, std::vector<double>{}));
}

TEST_CASE("pool files round-trip") {
  const AnnotatorPool pool = sample_pool(adversarial_buckets(), 5, 6);
  std::stringstream ss;
  write_pool(ss, pool);
  const AnnotatorPool back = read_pool(ss);
  CHECK(back.qualities == pool.qualities);

  std::stringstream gap("0 0.5\n2 0.7\n");
  CHECK_THROWS_AS(read_pool(gap), FormatError);
  std::stringstream range("0 1.5\n");
  CHECK_THROWS_AS(read_pool(range), FormatError);
  std::stringstream junk("0 0.5 extra\n");
  CHECK_THROWS_AS(read_pool(junk), FormatError);
  std::stringstream empty("\n");
  CHECK_THROWS_AS(read_pool(empty), FormatError);
}
