#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mlpa/matrix.hpp"

namespace mlpa {

enum class Mode { no_crowd, crowd };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

struct Dimensions {
  std::size_t docs = 0;
  std::size_t classes = 0;
  std::size_t topics = 0;
  std::size_t vocab = 0;
  std::size_t annotators = 0;  // 0 outside crowd mode

  void validate() const;
  bool operator==(const Dimensions&) const = default;
};

inline constexpr std::int8_t kUnknownLabel = -1;

struct WordCount {
  std::uint32_t index = 0;
  std::uint32_t count = 0;
  bool operator==(const WordCount&) const = default;
};

struct Document {
  std::string id;
  std::vector<WordCount> words;           // sorted by index, unique
  std::vector<std::int8_t> true_labels;   // C entries in {0, 1, -1}
  std::vector<std::int8_t> crowd_labels;  // K x C row-major in {0, 1, -1}

  std::size_t length() const;
  std::size_t num_classes() const { return true_labels.size(); }
  std::size_t num_annotators() const;
  std::int8_t crowd_label(std::size_t annotator, std::size_t cls) const {
    return crowd_labels[annotator * true_labels.size() + cls];
  }
  bool labels_known() const;

  /// Throws std::invalid_argument if the document is inconsistent with dims.
  void validate(const Dimensions& dims) const;

  bool operator==(const Document&) const = default;
};

using Corpus = std::vector<Document>;

// Probability clamps applied before any logarithm.
inline constexpr double kParamClamp = 1e-6;
inline constexpr double kMembershipClamp = 1e-9;
inline constexpr double kStochasticTolerance = 1e-9;

double clamp_probability(double p, double margin);

/// Global parameters. Symbol names in comments follow the usual notation
/// of the model: alpha, xi, rho, beta, eta.
struct ModelParams {
  Mode mode = Mode::no_crowd;
  bool smoothing = false;
  std::size_t classes = 0;
  std::size_t topics = 0;
  std::size_t vocab = 0;

  // alpha: Dirichlet priors over topics, one row per (class, present) pair.
  // Row 2*i + 1 is class i present, row 2*i is class i absent.
  Matrix<double> theta_prior;
  std::vector<double> class_prior;        // xi
  std::vector<double> annotator_quality;  // rho, empty outside crowd mode
  Matrix<double> topic_word;              // beta, T x V (unsmoothed only)
  Matrix<double> topic_word_prior;        // eta, T x V (smoothed only)

  std::size_t annotators() const { return annotator_quality.size(); }
  Dimensions dims(std::size_t docs = 1) const;

  std::span<const double> theta_prior_row(std::size_t cls, int present) const {
    return theta_prior.row(2 * cls + present);
  }

  bool operator==(const ModelParams&) const = default;
};

/// Per-document variational state, stored per unique word: row w of
/// word_class / word_topic is shared by every token of doc.words[w].
struct DocVariational {
  Matrix<double> word_class;       // delta, U x C
  std::vector<double> membership;  // Delta, C
  Matrix<double> word_topic;       // phi, U x T
  Matrix<double> theta_posterior;  // gamma, 2C x T, rows as theta_prior
  // Membership is the observed label vector rather than an inferred
  // probability; entries are exactly 0 or 1 and carry no entropy.
  bool labels_observed = false;
};

/// Variational Dirichlet posteriors over topic-word distributions (chi).
struct SmoothedTopicState {
  Matrix<double> topic_word_posterior;  // T x V
};

/// Where class memberships come from during an E-step.
enum class LabelEvidence {
  observed,  // true labels known; membership fixed to them
  crowd,     // inferred from annotator labels, words and prior
  none       // inferred from words and prior only (prediction)
};

inline constexpr double kDefaultQualityInit = 0.7;

ModelParams init_params(const Dimensions& dims, Mode mode, bool smoothing,
                        std::uint64_t seed,
                        double quality_init = kDefaultQualityInit);

/// gamma = alpha + membership-weighted sum over words of delta * phi.
void update_theta_posterior(const Document& doc, const ModelParams& params,
                            DocVariational& state);

DocVariational init_doc_variational(const Document& doc,
                                    const ModelParams& params,
                                    LabelEvidence evidence);

/// Every violated invariant of params (and state, if given), as messages.
std::vector<std::string> validate(const ModelParams& params,
                                  const DocVariational* state = nullptr,
                                  const SmoothedTopicState* topics = nullptr);

// Model file: header line "mlpa-model v1", then keyed sections with reals
// printed at 17 significant digits. chi is stored alongside eta so that a
// smoothed model can be used for prediction on its own.
void write_model(std::ostream& out, const ModelParams& params,
                 const SmoothedTopicState* topics);
struct LoadedModel {
  ModelParams params;
  SmoothedTopicState topics;  // empty unless params.smoothing
};
LoadedModel read_model(std::istream& in);
void save_model(const std::string& path, const ModelParams& params,
                const SmoothedTopicState* topics);
LoadedModel load_model(const std::string& path);

}  // namespace mlpa
