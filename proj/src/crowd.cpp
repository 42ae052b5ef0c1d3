#include "mlpa/crowd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mlpa/errors.hpp"
#include "mlpa/random.hpp"

namespace mlpa {

void AnnotatorPool::validate() const {
  if (qualities.empty()) throw std::invalid_argument("annotator pool is empty");
  for (double q : qualities) {
    if (!(q >= 0.0 && q <= 1.0)) {
      throw std::invalid_argument("annotator quality outside [0,1]");
    }
  }
  if (!buckets.empty()) {
    std::size_t total = 0;
    for (const auto& b : buckets) {
      if (!(b.low > 0.0 && b.low <= b.high && b.high < 1.0)) {
        throw std::invalid_argument("bucket range must satisfy 0 < low <= high < 1");
      }
      total += b.count;
    }
    if (total != qualities.size()) {
      throw std::invalid_argument("bucket counts do not sum to the pool size");
    }
  }
  if (per_doc < 1 || per_doc > qualities.size()) {
    throw std::invalid_argument("annotators per document must be in [1, K]");
  }
}

std::vector<QualityBucket> default_buckets() {
  return {{10, 0.51, 0.65}, {20, 0.66, 0.85}, {20, 0.86, 0.9999}};
}

std::vector<QualityBucket> adversarial_buckets() {
  return {{10, 0.0001, 0.1}, {15, 0.51, 0.65}, {20, 0.66, 0.85}, {5, 0.86, 0.9999}};
}

std::vector<QualityBucket> parse_buckets(const std::string& text) {
  std::vector<QualityBucket> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    QualityBucket b;
    char c1 = 0, c2 = 0;
    std::istringstream is(item);
    if (!(is >> b.count >> c1 >> b.low >> c2 >> b.high) || c1 != ':' || c2 != ':') {
      throw std::invalid_argument("bad bucket '" + item + "', expected count:low:high");
    }
    std::string rest;
    if (is >> rest) throw std::invalid_argument("bad bucket '" + item + "'");
    out.push_back(b);
  }
  if (out.empty()) throw std::invalid_argument("no buckets given");
  return out;
}

AnnotatorPool sample_pool(const std::vector<QualityBucket>& buckets,
                          std::size_t per_doc, std::uint64_t seed) {
  AnnotatorPool pool;
  pool.buckets = buckets;
  pool.per_doc = per_doc;
  Rng rng(seed);
  for (const auto& b : buckets) {
    std::uniform_real_distribution<double> draw(b.low, b.high);
    for (std::size_t k = 0; k < b.count; ++k) {
      pool.qualities.push_back(b.low == b.high ? b.low : draw(rng));
    }
  }
  pool.validate();
  return pool;
}

AnnotatedCorpus annotate_corpus(const Corpus& corpus, const AnnotatorPool& pool,
                                std::uint64_t seed, double mask_fraction) {
  pool.validate();
  if (!(mask_fraction >= 0.0 && mask_fraction < 1.0)) {
    throw std::invalid_argument("mask fraction must lie in [0,1)");
  }
  AnnotatedCorpus out;
  out.docs = corpus;
  out.truth = truth_matrix(corpus);
  const std::size_t K = pool.size();
  std::vector<std::size_t> order(K);
  for (std::size_t d = 0; d < out.docs.size(); ++d) {
    auto& doc = out.docs[d];
    const std::size_t C = doc.num_classes();
    Rng rng = stream_rng(seed, d);
    std::iota(order.begin(), order.end(), 0);
    // Partial Fisher-Yates: the first per_doc entries are a uniform sample.
    for (std::size_t k = 0; k < pool.per_doc; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, K - 1);
      std::swap(order[k], order[pick(rng)]);
    }
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pool.per_doc));
    doc.crowd_labels.assign(K * C, kUnknownLabel);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t s = 0; s < pool.per_doc; ++s) {
      const std::size_t k = order[s];
      for (std::size_t i = 0; i < C; ++i) {
        const bool keep = mask_fraction == 0.0 || unif(rng) >= mask_fraction;
        const bool correct = unif(rng) < pool.qualities[k];
        if (!keep) continue;
        const std::int8_t truth = doc.true_labels[i];
        doc.crowd_labels[k * C + i] = correct ? truth : static_cast<std::int8_t>(1 - truth);
      }
    }
    std::fill(doc.true_labels.begin(), doc.true_labels.end(), kUnknownLabel);
  }
  return out;
}

double ann_rmse(std::span<const double> estimated, std::span<const double> truth) {
  if (estimated.size() != truth.size() || truth.empty()) {
    throw std::invalid_argument("ann_rmse: vectors must be non-empty and equal length");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double d = estimated[k] - truth[k];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(truth.size()));
}

void write_pool(std::ostream& out, const AnnotatorPool& pool) {
  char buf[64];
  for (std::size_t k = 0; k < pool.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu %.17g\n", k, pool.qualities[k]);
    out << buf;
  }
}

AnnotatorPool read_pool(std::istream& in, const std::string& source) {
  AnnotatorPool pool;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream is(line);
    std::size_t idx = 0;
    double q = 0.0;
    std::string rest;
    if (!(is >> idx >> q) || (is >> rest)) {
      throw FormatError(source, lineno, "expected '<annotator_idx> <rho>'");
    }
    if (idx != pool.qualities.size()) {
      throw FormatError(source, lineno, "annotator indices must be 0,1,2,... in order");
    }
    if (!(q >= 0.0 && q <= 1.0)) throw FormatError(source, lineno, "rho outside [0,1]");
    pool.qualities.push_back(q);
  }
  if (pool.qualities.empty()) throw FormatError(source, 0, "empty pool file");
  pool.per_doc = pool.qualities.size();
  return pool;
}

}  // namespace mlpa
