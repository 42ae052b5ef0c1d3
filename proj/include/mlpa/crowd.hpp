#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mlpa/eval.hpp"
#include "mlpa/model.hpp"

namespace mlpa {

/// `count` annotators with quality drawn from U[low, high].
struct QualityBucket {
  std::size_t count = 0;
  double low = 0.0;
  double high = 0.0;
};

struct AnnotatorPool {
  std::vector<double> qualities;  // true rho per annotator
  std::vector<QualityBucket> buckets;
  std::size_t per_doc = 1;  // annotators sampled per document

  std::size_t size() const { return qualities.size(); }
  void validate() const;
};

/// 50 annotators: 10 in [0.51, 0.65], 20 in [0.66, 0.85], 20 in [0.86, 0.9999].
std::vector<QualityBucket> default_buckets();
/// 50 annotators, 10 of them adversarial in [0.0001, 0.1].
std::vector<QualityBucket> adversarial_buckets();

/// "count:low:high,count:low:high,..."
std::vector<QualityBucket> parse_buckets(const std::string& text);

AnnotatorPool sample_pool(const std::vector<QualityBucket>& buckets,
                          std::size_t per_doc, std::uint64_t seed);

struct AnnotatedCorpus {
  Corpus docs;        // crowd labels filled, true labels erased
  LabelMatrix truth;  // the erased labels, for evaluation only
};

/// Each document gets `pool.per_doc` distinct annotators chosen uniformly;
/// each reports every class correctly with probability rho, independently.
/// With mask_fraction > 0 each judgment is dropped (-1) with that
/// probability. Document d uses its own stream derived from (seed, d).
AnnotatedCorpus annotate_corpus(const Corpus& corpus, const AnnotatorPool& pool,
                                std::uint64_t seed, double mask_fraction = 0.0);

/// sqrt(mean (estimated - truth)^2).
double ann_rmse(std::span<const double> estimated, std::span<const double> truth);

// Pool file: `<annotator_idx> <rho>` per line.
void write_pool(std::ostream& out, const AnnotatorPool& pool);
AnnotatorPool read_pool(std::istream& in, const std::string& source = "pool");

}  // namespace mlpa
