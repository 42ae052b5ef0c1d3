#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mlpa/model.hpp"

namespace mlpa {

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Throws std::invalid_argument on duplicate terms.
  explicit Vocabulary(std::vector<std::string> terms);

  std::size_t size() const { return terms_.size(); }
  const std::string& term(std::size_t index) const { return terms_.at(index); }
  std::optional<std::size_t> index_of(const std::string& term) const;
  const std::vector<std::string>& terms() const { return terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// One term per line, line number = index.
Vocabulary read_vocabulary(std::istream& in, const std::string& source = "vocab");
Vocabulary load_vocabulary(const std::string& path);

// Corpus file (.mlc):
//   #mlc v1 D=<int> V=<int> C=<int>
//   <doc_id> | <l_1> ... <l_C> | <idx>:<cnt> <idx>:<cnt> ...
// with labels in {0, 1, -1}. Word lists are stored sorted by index.
struct LoadedCorpus {
  Corpus docs;
  Dimensions dims;  // topics is 0; annotators from the crowd file, if any
};

LoadedCorpus read_corpus(std::istream& in, const std::string& source = "corpus");
void write_corpus(std::ostream& out, const Corpus& corpus, std::size_t vocab);

// Crowd file (.crowd):
//   #crowd v1 K=<int> C=<int>
//   <doc_id> <annotator_idx> <class_idx> <0|1>
// Absent triples mean -1. Documents not mentioned get all -1.
void read_crowd(std::istream& in, LoadedCorpus& corpus,
                const std::string& source = "crowd");
void write_crowd(std::ostream& out, const Corpus& corpus, std::size_t annotators);

LoadedCorpus load_corpus(const std::string& corpus_path,
                         const std::optional<std::string>& crowd_path = std::nullopt);

// Real-valued feature file (.mlr), input to the discretizer:
//   #mlr v1 D=<int> F=<int> C=<int>
//   <doc_id> | <l_1> ... <l_C> | <f_1> ... <f_F>
struct RealInstance {
  std::string id;
  std::vector<std::int8_t> labels;
  std::vector<double> features;
};
std::vector<RealInstance> read_real_corpus(std::istream& in,
                                           const std::string& source = "features");
void write_real_corpus(std::ostream& out, const std::vector<RealInstance>& data);

/// 1-D k-means codebook over pooled feature values.
struct Discretizer {
  std::vector<double> centers;  // strictly increasing
  std::uint64_t seed = 0;

  std::size_t size() const { return centers.size(); }
};

struct DiscretizerFit {
  Discretizer discretizer;
  std::vector<double> objective_trace;  // within-cluster SSE per Lloyd pass
  int iterations = 0;
  std::vector<std::string> warnings;
};

inline constexpr int kKMeansMaxIters = 300;
inline constexpr double kKMeansTol = 1e-9;

/// Lloyd's algorithm with k-means++ seeding. When fewer than `vocab`
/// distinct values exist, every distinct value becomes a center and a
/// warning is recorded.
DiscretizerFit fit_discretizer(std::span<const double> values, std::size_t vocab,
                               std::uint64_t seed);

/// Index of the nearest center; ties go to the lower index.
std::size_t nearest_center(double value, const Discretizer& disc);

std::vector<WordCount> discretize_instance(std::span<const double> features,
                                           const Discretizer& disc);

// Discretizer file: "#disc v1 V=<int>" then one center per line.
void write_discretizer(std::ostream& out, const Discretizer& disc);
Discretizer read_discretizer(std::istream& in, const std::string& source = "disc");

struct CorpusSplit {
  Corpus train;
  Corpus test;
};

/// Seeded shuffle, then the first ceil(fraction * D) documents (at least
/// one, at most D - 1) go to train.
CorpusSplit split_corpus(const Corpus& corpus, double fraction, std::uint64_t seed);

}  // namespace mlpa
