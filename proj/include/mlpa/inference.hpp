#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mlpa/matrix.hpp"
#include "mlpa/model.hpp"

namespace mlpa {

struct TrainConfig {
  int max_em_iters = 200;
  double em_rel_tol = 1e-6;
  int max_estep_iters = 100;
  double estep_tol = 1e-5;
  Mode mode = Mode::no_crowd;
  bool smoothing = false;
  std::uint64_t seed = 1;
  // Starting annotator quality. Must stay away from 0.5, where the crowd
  // likelihood is symmetric in the labels.
  double quality_init = kDefaultQualityInit;
  unsigned threads = 1;

  void validate() const;
};

struct ElboRecord {
  int iteration = 0;
  double elbo = 0.0;
  double max_param_change = 0.0;
};
using ElboTrace = std::vector<ElboRecord>;

/// CSV with header `iteration,elbo,max_param_change`.
void write_trace_csv(std::ostream& out, const ElboTrace& trace);

LabelEvidence training_evidence(Mode mode);

/// T x V table of per-topic word log-weights: log beta, or E[log beta] under
/// Dir(chi) when smoothing.
Matrix<double> topic_log_weights(const ModelParams& params,
                                 const SmoothedTopicState* topics);

/// chi initialised as eta plus the corpus word counts split across topics
/// by per-word Dirichlet(1) draws. Without the random split every topic
/// would start identical and stay so.
SmoothedTopicState init_topic_state(const ModelParams& params,
                                    const Corpus& corpus, std::uint64_t seed);

// Coordinate updates of the per-document E-step. `elog_theta` is the 2C x T
// table of E[log theta] for the current theta_posterior.
Matrix<double> expected_log_theta(const DocVariational& state);
void update_word_topic(const Document& doc, const Matrix<double>& elog_theta,
                       const Matrix<double>& log_weights, DocVariational& state);
void update_word_class(const Document& doc, const Matrix<double>& elog_theta,
                       DocVariational& state);
void update_membership(const Document& doc, const ModelParams& params,
                       const Matrix<double>& elog_theta, LabelEvidence evidence,
                       DocVariational& state);

struct EStepResult {
  int iterations = 0;
  double max_change = 0.0;
  bool converged = false;
};

/// Cycles gamma -> phi -> delta -> Delta on `state` until the largest
/// change in delta, Delta and phi drops below cfg.estep_tol or
/// cfg.max_estep_iters cycles have run. Throws NumericalFailure on NaN/inf.
EStepResult e_step_document(const Document& doc, const ModelParams& params,
                            const Matrix<double>& log_weights,
                            LabelEvidence evidence, const TrainConfig& cfg,
                            DocVariational& state);

/// Same, starting from init_doc_variational.
DocVariational e_step_document(const Document& doc, const ModelParams& params,
                               const Matrix<double>& log_weights,
                               LabelEvidence evidence, const TrainConfig& cfg);

/// Corpus-level sums needed by the M-step.
struct SufficientStats {
  std::size_t docs = 0;
  std::vector<double> membership_sum;    // sum_d Delta_i
  std::vector<double> annotator_agree;   // sum of agreement with Delta
  std::vector<double> annotator_labels;  // number of provided labels
  Matrix<double> topic_word_counts;      // sum_d sum_w cnt * phi_wt
  Matrix<double> theta_log_sum;          // sum_d E[log theta^d], 2C x T

  explicit SufficientStats(const ModelParams& params);
  void add(const Document& doc, const DocVariational& state,
           LabelEvidence evidence);
};

SufficientStats collect_stats(const Corpus& corpus,
                              const std::vector<DocVariational>& states,
                              const ModelParams& params, LabelEvidence evidence);

/// chi = eta + topic_word_counts.
SmoothedTopicState update_topic_posterior(const ModelParams& params,
                                          const SufficientStats& stats);

inline constexpr int kNewtonMaxIters = 50;
inline constexpr double kNewtonTol = 1e-8;

/// Closed-form xi, rho, beta updates and Newton solves for alpha (and eta
/// when smoothing). Annotators without labels keep their quality and add a
/// message to `warnings`.
ModelParams m_step(const SufficientStats& stats, const ModelParams& params,
                   const SmoothedTopicState* topics, const TrainConfig& cfg,
                   std::vector<std::string>* warnings = nullptr);

/// Bound contribution of one document (excludes the topic-word prior term).
double document_elbo(const Document& doc, const ModelParams& params,
                     const Matrix<double>& log_weights,
                     const DocVariational& state, LabelEvidence evidence);

/// E[log p(beta | eta)] - E[log q(beta | chi)], the smoothed-only term.
double topic_prior_elbo(const ModelParams& params,
                        const SmoothedTopicState& topics);

double compute_elbo(const Corpus& corpus, const ModelParams& params,
                    const std::vector<DocVariational>& states,
                    const SmoothedTopicState* topics, LabelEvidence evidence,
                    unsigned threads = 1);
double compute_elbo(const Corpus& corpus, const ModelParams& params,
                    const std::vector<DocVariational>& states,
                    const SmoothedTopicState* topics);

struct TrainResult {
  ModelParams params;
  std::optional<SmoothedTopicState> topics;
  ElboTrace trace;
  bool converged = false;
  std::vector<std::string> warnings;
  std::vector<DocVariational> states;

  const SmoothedTopicState* topics_ptr() const {
    return topics ? &*topics : nullptr;
  }
};

TrainResult train(const Corpus& corpus, const Dimensions& dims,
                  const TrainConfig& cfg);

struct Prediction {
  std::vector<double> membership;
  std::vector<std::uint8_t> labels;
};

inline constexpr double kDefaultThreshold = 0.5;

/// Class memberships from words and the class prior alone; annotator and
/// true labels on `doc` are ignored. Words with zero probability under
/// every topic (unseen in unsmoothed training) are skipped.
Prediction predict(const Document& doc, const ModelParams& params,
                   const SmoothedTopicState* topics, const TrainConfig& cfg,
                   double threshold = kDefaultThreshold);

std::vector<Prediction> predict_corpus(const Corpus& corpus,
                                       const ModelParams& params,
                                       const SmoothedTopicState* topics,
                                       const TrainConfig& cfg,
                                       double threshold = kDefaultThreshold);

std::vector<std::uint8_t> threshold_labels(const std::vector<double>& membership,
                                           double threshold);

}  // namespace mlpa
