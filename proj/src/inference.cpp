#include "mlpa/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "mlpa/errors.hpp"
#include "mlpa/numerics.hpp"
#include "mlpa/random.hpp"

namespace mlpa {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Topic responsibilities below this are set to zero. Left in place they
// can reach the subnormal range, where the normalised beta entry built from
// them underflows to 0 while phi stays positive and the bound becomes -inf.
constexpr double kResponsibilityFloor = 1e-280;

// x * log(y) with the 0 * log(0) = 0 convention.
double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// mix(i, t) = Delta_i E[log theta_i1t] + (1 - Delta_i) E[log theta_i0t]
Matrix<double> membership_mix(const DocVariational& state,
                              const Matrix<double>& elog_theta) {
  const std::size_t C = state.membership.size();
  const std::size_t T = elog_theta.cols();
  Matrix<double> mix(C, T);
  for (std::size_t i = 0; i < C; ++i) {
    const double on = state.membership[i];
    for (std::size_t t = 0; t < T; ++t) {
      mix(i, t) = on * elog_theta(2 * i + 1, t) + (1.0 - on) * elog_theta(2 * i, t);
    }
  }
  return mix;
}

void normalize_log_row(std::span<double> logs, std::span<double> out,
                       const Document& doc, const char* where) {
  const double norm = log_sum_exp(logs);
  if (!std::isfinite(norm)) throw NumericalFailure(doc.id, where);
  for (std::size_t k = 0; k < logs.size(); ++k) {
    out[k] = std::exp(logs[k] - norm);
  }
}

template <typename T>
double max_abs_diff(const std::vector<T>& a, const std::vector<T>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    m = std::max(m, std::abs(static_cast<double>(a[k]) - static_cast<double>(b[k])));
  }
  return m;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double param_change(const ModelParams& a, const ModelParams& b) {
  double m = max_abs_diff(a.theta_prior.values(), b.theta_prior.values());
  m = std::max(m, max_abs_diff(a.class_prior, b.class_prior));
  m = std::max(m, max_abs_diff(a.annotator_quality, b.annotator_quality));
  m = std::max(m, max_abs_diff(a.topic_word.values(), b.topic_word.values()));
  m = std::max(m, max_abs_diff(a.topic_word_prior.values(),
                               b.topic_word_prior.values()));
  return m;
}

void check_corpus(const Corpus& corpus, const Dimensions& dims) {
  if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
  for (const auto& doc : corpus) doc.validate(dims);
}

}  // namespace

void TrainConfig::validate() const {
  if (max_em_iters < 1) throw std::invalid_argument("max-em-iters must be >= 1");
  if (max_estep_iters < 1) {
    throw std::invalid_argument("max-estep-iters must be >= 1");
  }
  if (!(em_rel_tol > 0.0) || !(estep_tol > 0.0)) {
    throw std::invalid_argument("tolerances must be > 0");
  }
  if (!(quality_init > 0.0 && quality_init < 1.0)) {
    throw std::invalid_argument("initial annotator quality must lie in (0,1)");
  }
}

void write_trace_csv(std::ostream& out, const ElboTrace& trace) {
  out << "iteration,elbo,max_param_change\n";
  char buf[96];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.iteration, r.elbo,
                  r.max_param_change);
    out << buf;
  }
}

LabelEvidence training_evidence(Mode mode) {
  return mode == Mode::crowd ? LabelEvidence::crowd : LabelEvidence::observed;
}

Matrix<double> topic_log_weights(const ModelParams& params,
                                 const SmoothedTopicState* topics) {
  const std::size_t T = params.topics;
  const std::size_t V = params.vocab;
  Matrix<double> out(T, V);
  if (params.smoothing) {
    if (topics == nullptr) {
      throw std::invalid_argument("smoothed model requires topic posterior");
    }
    for (std::size_t t = 0; t < T; ++t) {
      dirichlet_expected_log(topics->topic_word_posterior.row(t), out.row(t));
    }
  } else {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t v = 0; v < V; ++v) {
        const double b = params.topic_word(t, v);
        out(t, v) = b == 0.0 ? kNegInf : std::log(b);
      }
    }
  }
  return out;
}

SmoothedTopicState init_topic_state(const ModelParams& params,
                                    const Corpus& corpus, std::uint64_t seed) {
  const std::size_t T = params.topics;
  const std::size_t V = params.vocab;
  std::vector<double> word_totals(V, 0.0);
  for (const auto& doc : corpus) {
    for (const auto& w : doc.words) word_totals[w.index] += w.count;
  }
  SmoothedTopicState s;
  s.topic_word_posterior = params.topic_word_prior;
  Rng rng(seed);
  const std::vector<double> flat(T, 1.0);
  for (std::size_t v = 0; v < V; ++v) {
    const auto split = sample_dirichlet(flat, rng);
    for (std::size_t t = 0; t < T; ++t) {
      s.topic_word_posterior(t, v) += word_totals[v] * split[t];
    }
  }
  return s;
}

Matrix<double> expected_log_theta(const DocVariational& state) {
  const auto& gamma = state.theta_posterior;
  Matrix<double> out(gamma.rows(), gamma.cols());
  for (std::size_t r = 0; r < gamma.rows(); ++r) {
    dirichlet_expected_log(gamma.row(r), out.row(r));
  }
  return out;
}

void update_word_topic(const Document& doc, const Matrix<double>& elog_theta,
                       const Matrix<double>& log_weights, DocVariational& state) {
  const std::size_t C = state.membership.size();
  const std::size_t T = elog_theta.cols();
  const Matrix<double> mix = membership_mix(state, elog_theta);
  std::vector<double> logs(T);
  for (std::size_t w = 0; w < doc.words.size(); ++w) {
    const auto delta = state.word_class.row(w);
    const std::size_t word = doc.words[w].index;
    for (std::size_t t = 0; t < T; ++t) {
      double a = log_weights(t, word);
      for (std::size_t i = 0; i < C; ++i) a += delta[i] * mix(i, t);
      logs[t] = a;
    }
    auto phi = state.word_topic.row(w);
    normalize_log_row(logs, phi, doc, "phi update");
    double kept = 0.0;
    for (double& p : phi) {
      if (p < kResponsibilityFloor) p = 0.0;
      kept += p;
    }
    if (kept != 1.0) {
      for (double& p : phi) p /= kept;
    }
  }
}

void update_word_class(const Document& doc, const Matrix<double>& elog_theta,
                       DocVariational& state) {
  const std::size_t C = state.membership.size();
  const std::size_t T = elog_theta.cols();
  const Matrix<double> mix = membership_mix(state, elog_theta);
  const double log_uniform = -std::log(static_cast<double>(C));
  std::vector<double> logs(C);
  for (std::size_t w = 0; w < doc.words.size(); ++w) {
    const auto phi = state.word_topic.row(w);
    for (std::size_t i = 0; i < C; ++i) {
      double a = log_uniform;
      for (std::size_t t = 0; t < T; ++t) a += phi[t] * mix(i, t);
      logs[i] = a;
    }
    normalize_log_row(logs, state.word_class.row(w), doc, "delta update");
  }
}

void update_membership(const Document& doc, const ModelParams& params,
                       const Matrix<double>& elog_theta, LabelEvidence evidence,
                       DocVariational& state) {
  if (evidence == LabelEvidence::observed) return;
  const std::size_t C = params.classes;
  const std::size_t T = params.topics;
  const std::size_t K =
      evidence == LabelEvidence::crowd ? params.annotators() : 0;
  if (K > 0 && doc.num_annotators() != K) {
    throw std::invalid_argument("document '" + doc.id +
                                "': crowd labels do not match annotator count");
  }
  for (std::size_t i = 0; i < C; ++i) {
    double on = std::log(params.class_prior[i]);
    double off = std::log1p(-params.class_prior[i]);
    for (std::size_t k = 0; k < K; ++k) {
      const auto y = doc.crowd_label(k, i);
      if (y == kUnknownLabel) continue;
      const double log_q = std::log(params.annotator_quality[k]);
      const double log_flip = std::log1p(-params.annotator_quality[k]);
      on += y == 1 ? log_q : log_flip;
      off += y == 1 ? log_flip : log_q;
    }
    for (std::size_t w = 0; w < doc.words.size(); ++w) {
      const double weight = doc.words[w].count * state.word_class(w, i);
      const auto phi = state.word_topic.row(w);
      for (std::size_t t = 0; t < T; ++t) {
        on += weight * phi[t] * elog_theta(2 * i + 1, t);
        off += weight * phi[t] * elog_theta(2 * i, t);
      }
    }
    const double pair[2] = {on, off};
    const double norm = log_sum_exp(pair);
    const double p = std::exp(on - norm);
    if (!std::isfinite(p)) throw NumericalFailure(doc.id, "Delta update");
    state.membership[i] = clamp_probability(p, kMembershipClamp);
  }
}

EStepResult e_step_document(const Document& doc, const ModelParams& params,
                            const Matrix<double>& log_weights,
                            LabelEvidence evidence, const TrainConfig& cfg,
                            DocVariational& state) {
  EStepResult result;
  for (int it = 0; it < cfg.max_estep_iters; ++it) {
    const auto old_delta = state.word_class.values();
    const auto old_phi = state.word_topic.values();
    const auto old_membership = state.membership;

    update_theta_posterior(doc, params, state);
    if (!all_finite(state.theta_posterior.values())) {
      throw NumericalFailure(doc.id, "gamma update");
    }
    const Matrix<double> elog = expected_log_theta(state);
    update_word_topic(doc, elog, log_weights, state);
    update_word_class(doc, elog, state);
    update_membership(doc, params, elog, evidence, state);

    result.iterations = it + 1;
    result.max_change =
        std::max({max_abs_diff(old_delta, state.word_class.values()),
                  max_abs_diff(old_phi, state.word_topic.values()),
                  max_abs_diff(old_membership, state.membership)});
    if (result.max_change < cfg.estep_tol) {
      result.converged = true;
      break;
    }
  }
  // Leave gamma consistent with the final delta, phi and Delta.
  update_theta_posterior(doc, params, state);
  return result;
}

DocVariational e_step_document(const Document& doc, const ModelParams& params,
                               const Matrix<double>& log_weights,
                               LabelEvidence evidence, const TrainConfig& cfg) {
  DocVariational state = init_doc_variational(doc, params, evidence);
  e_step_document(doc, params, log_weights, evidence, cfg, state);
  return state;
}

SufficientStats::SufficientStats(const ModelParams& params)
    : membership_sum(params.classes, 0.0),
      annotator_agree(params.annotators(), 0.0),
      annotator_labels(params.annotators(), 0.0),
      topic_word_counts(params.topics, params.vocab, 0.0),
      theta_log_sum(2 * params.classes, params.topics, 0.0) {}

void SufficientStats::add(const Document& doc, const DocVariational& state,
                          LabelEvidence evidence) {
  ++docs;
  const std::size_t C = membership_sum.size();
  const std::size_t T = topic_word_counts.rows();
  for (std::size_t i = 0; i < C; ++i) membership_sum[i] += state.membership[i];
  if (evidence == LabelEvidence::crowd) {
    for (std::size_t k = 0; k < annotator_agree.size(); ++k) {
      for (std::size_t i = 0; i < C; ++i) {
        const auto y = doc.crowd_label(k, i);
        if (y == kUnknownLabel) continue;
        const double m = state.membership[i];
        annotator_labels[k] += 1.0;
        annotator_agree[k] += y == 1 ? m : 1.0 - m;
      }
    }
  }
  for (std::size_t w = 0; w < doc.words.size(); ++w) {
    const double cnt = doc.words[w].count;
    const std::size_t word = doc.words[w].index;
    for (std::size_t t = 0; t < T; ++t) {
      topic_word_counts(t, word) += cnt * state.word_topic(w, t);
    }
  }
  const Matrix<double> elog = expected_log_theta(state);
  for (std::size_t k = 0; k < elog.size(); ++k) {
    theta_log_sum.values()[k] += elog.values()[k];
  }
}

SufficientStats collect_stats(const Corpus& corpus,
                              const std::vector<DocVariational>& states,
                              const ModelParams& params, LabelEvidence evidence) {
  SufficientStats stats(params);
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    stats.add(corpus[d], states[d], evidence);
  }
  return stats;
}

SmoothedTopicState update_topic_posterior(const ModelParams& params,
                                          const SufficientStats& stats) {
  SmoothedTopicState s;
  s.topic_word_posterior = params.topic_word_prior;
  auto& chi = s.topic_word_posterior.values();
  const auto& counts = stats.topic_word_counts.values();
  for (std::size_t k = 0; k < chi.size(); ++k) chi[k] += counts[k];
  return s;
}

ModelParams m_step(const SufficientStats& stats, const ModelParams& params,
                   const SmoothedTopicState* topics, const TrainConfig& cfg,
                   std::vector<std::string>* warnings) {
  (void)cfg;
  if (stats.docs == 0) throw std::invalid_argument("m_step: no documents");
  ModelParams next = params;
  const double D = static_cast<double>(stats.docs);

  for (std::size_t i = 0; i < params.classes; ++i) {
    next.class_prior[i] = clamp_probability(stats.membership_sum[i] / D, kParamClamp);
  }

  for (std::size_t k = 0; k < params.annotators(); ++k) {
    if (stats.annotator_labels[k] == 0.0) {
      if (warnings) {
        warnings->push_back("annotator " + std::to_string(k) +
                            " provided no labels; quality left unchanged");
      }
      continue;
    }
    next.annotator_quality[k] = clamp_probability(
        stats.annotator_agree[k] / stats.annotator_labels[k], kParamClamp);
  }

  if (!params.smoothing) {
    for (std::size_t t = 0; t < params.topics; ++t) {
      const auto counts = stats.topic_word_counts.row(t);
      const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
      if (!(total > 0.0)) {
        if (warnings) {
          warnings->push_back("topic " + std::to_string(t) +
                              " received no words; row left unchanged");
        }
        continue;
      }
      auto row = next.topic_word.row(t);
      for (std::size_t v = 0; v < params.vocab; ++v) row[v] = counts[v] / total;
    }
  } else {
    if (topics == nullptr) {
      throw std::invalid_argument("m_step: smoothed model requires chi");
    }
    for (std::size_t t = 0; t < params.topics; ++t) {
      const auto chi = topics->topic_word_posterior.row(t);
      DirichletNewtonProblem problem;
      const auto prior = params.topic_word_prior.row(t);
      problem.current.assign(prior.begin(), prior.end());
      problem.stats = dirichlet_expected_log(chi);
      problem.scale = 1;
      auto solved = newton_dirichlet_solve(std::move(problem), kNewtonMaxIters,
                                           kNewtonTol);
      std::copy(solved.values.begin(), solved.values.end(),
                next.topic_word_prior.row(t).begin());
    }
  }

  for (std::size_t r = 0; r < 2 * params.classes; ++r) {
    DirichletNewtonProblem problem;
    const auto prior = params.theta_prior.row(r);
    const auto stat = stats.theta_log_sum.row(r);
    problem.current.assign(prior.begin(), prior.end());
    problem.stats.assign(stat.begin(), stat.end());
    problem.scale = static_cast<int>(stats.docs);
    auto solved = newton_dirichlet_solve(std::move(problem), kNewtonMaxIters,
                                         kNewtonTol);
    std::copy(solved.values.begin(), solved.values.end(),
              next.theta_prior.row(r).begin());
  }
  return next;
}

double document_elbo(const Document& doc, const ModelParams& params,
                     const Matrix<double>& log_weights,
                     const DocVariational& state, LabelEvidence evidence) {
  const std::size_t C = params.classes;
  const std::size_t T = params.topics;
  const Matrix<double> elog = expected_log_theta(state);
  const Matrix<double> mix = membership_mix(state, elog);
  double elbo = 0.0;

  // E[log p(lambda | xi)] and, for inferred memberships, the Bernoulli entropy.
  for (std::size_t i = 0; i < C; ++i) {
    const double m = state.membership[i];
    elbo += xlogy(m, params.class_prior[i]) + xlogy(1.0 - m, 1.0 - params.class_prior[i]);
    if (!state.labels_observed) elbo -= xlogy(m, m) + xlogy(1.0 - m, 1.0 - m);
  }

  // E[log p(theta | alpha)] - E[log q(theta | gamma)]
  for (std::size_t r = 0; r < 2 * C; ++r) {
    const auto alpha = params.theta_prior.row(r);
    const auto gamma = state.theta_posterior.row(r);
    double sum_a = 0.0, sum_g = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      sum_a += alpha[t];
      sum_g += gamma[t];
      elbo += -std::lgamma(alpha[t]) + std::lgamma(gamma[t]) +
              (alpha[t] - gamma[t]) * elog(r, t);
    }
    elbo += std::lgamma(sum_a) - std::lgamma(sum_g);
  }

  // E[log p(u)] + E[log p(z | u, lambda, theta)] + E[log p(w | z, beta)]
  // and the entropies of q(u), q(z).
  const double log_uniform = -std::log(static_cast<double>(C));
  for (std::size_t w = 0; w < doc.words.size(); ++w) {
    const double cnt = doc.words[w].count;
    const std::size_t word = doc.words[w].index;
    const auto delta = state.word_class.row(w);
    const auto phi = state.word_topic.row(w);
    double term = log_uniform;
    for (std::size_t i = 0; i < C; ++i) {
      term -= xlogy(delta[i], delta[i]);
    }
    for (std::size_t t = 0; t < T; ++t) {
      if (phi[t] == 0.0) continue;
      double z = log_weights(t, word) - std::log(phi[t]);
      for (std::size_t i = 0; i < C; ++i) z += delta[i] * mix(i, t);
      term += phi[t] * z;
    }
    elbo += cnt * term;
  }

  if (evidence == LabelEvidence::crowd) {
    for (std::size_t k = 0; k < params.annotators(); ++k) {
      const double log_q = std::log(params.annotator_quality[k]);
      const double log_flip = std::log1p(-params.annotator_quality[k]);
      for (std::size_t i = 0; i < C; ++i) {
        const auto y = doc.crowd_label(k, i);
        if (y == kUnknownLabel) continue;
        const double m = state.membership[i];
        const double agree = y == 1 ? m : 1.0 - m;
        elbo += agree * log_q + (1.0 - agree) * log_flip;
      }
    }
  }
  return elbo;
}

double topic_prior_elbo(const ModelParams& params,
                        const SmoothedTopicState& topics) {
  double elbo = 0.0;
  std::vector<double> elog(params.vocab);
  for (std::size_t t = 0; t < params.topics; ++t) {
    const auto eta = params.topic_word_prior.row(t);
    const auto chi = topics.topic_word_posterior.row(t);
    dirichlet_expected_log(chi, elog);
    double sum_e = 0.0, sum_c = 0.0;
    for (std::size_t v = 0; v < params.vocab; ++v) {
      sum_e += eta[v];
      sum_c += chi[v];
      elbo += -std::lgamma(eta[v]) + std::lgamma(chi[v]) + (eta[v] - chi[v]) * elog[v];
    }
    elbo += std::lgamma(sum_e) - std::lgamma(sum_c);
  }
  return elbo;
}

double compute_elbo(const Corpus& corpus, const ModelParams& params,
                    const std::vector<DocVariational>& states,
                    const SmoothedTopicState* topics, LabelEvidence evidence,
                    unsigned threads) {
  if (states.size() != corpus.size()) {
    throw std::invalid_argument("compute_elbo: one state per document required");
  }
  const Matrix<double> log_weights = topic_log_weights(params, topics);
  std::vector<double> per_doc(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t d) {
    per_doc[d] = document_elbo(corpus[d], params, log_weights, states[d], evidence);
  });
  double elbo = 0.0;
  for (double x : per_doc) elbo += x;
  if (params.smoothing) elbo += topic_prior_elbo(params, *topics);
  return elbo;
}

double compute_elbo(const Corpus& corpus, const ModelParams& params,
                    const std::vector<DocVariational>& states,
                    const SmoothedTopicState* topics) {
  return compute_elbo(corpus, params, states, topics,
                      training_evidence(params.mode));
}

TrainResult train(const Corpus& corpus, const Dimensions& dims,
                  const TrainConfig& cfg) {
  cfg.validate();
  dims.validate();
  if (cfg.mode == Mode::crowd && dims.annotators == 0) {
    throw std::invalid_argument("crowd mode requires annotators (K > 0)");
  }
  Dimensions model_dims = dims;
  if (cfg.mode == Mode::no_crowd) model_dims.annotators = 0;
  Dimensions doc_dims = dims;
  doc_dims.docs = corpus.size();
  check_corpus(corpus, doc_dims);

  const LabelEvidence evidence = training_evidence(cfg.mode);
  TrainResult result;
  result.params = init_params(model_dims, cfg.mode, cfg.smoothing, cfg.seed,
                              cfg.quality_init);
  ModelParams& params = result.params;

  auto& states = result.states;
  states.resize(corpus.size());
  parallel_for(corpus.size(), cfg.threads, [&](std::size_t d) {
    states[d] = init_doc_variational(corpus[d], params, evidence);
  });
  if (cfg.smoothing) {
    result.topics = init_topic_state(params, corpus, cfg.seed);
  }

  double previous = 0.0;
  for (int iter = 1; iter <= cfg.max_em_iters; ++iter) {
    const Matrix<double> log_weights = topic_log_weights(params, result.topics_ptr());
    parallel_for(corpus.size(), cfg.threads, [&](std::size_t d) {
      e_step_document(corpus[d], params, log_weights, evidence, cfg, states[d]);
    });
    const SufficientStats stats = collect_stats(corpus, states, params, evidence);
    if (cfg.smoothing) result.topics = update_topic_posterior(params, stats);

    ModelParams next = m_step(stats, params, result.topics_ptr(), cfg, &result.warnings);
    const double change = param_change(params, next);
    params = std::move(next);

    const double elbo = compute_elbo(corpus, params, states, result.topics_ptr(),
                                     evidence, cfg.threads);
    if (!std::isfinite(elbo)) throw NumericalFailure("<corpus>", "ELBO");
    result.trace.push_back({iter, elbo, change});
    if (iter > 1) {
      const double rel = std::abs(elbo - previous) /
                         std::max(std::abs(previous), std::numeric_limits<double>::min());
      if (rel < cfg.em_rel_tol) {
        result.converged = true;
        break;
      }
    }
    previous = elbo;
  }
  std::sort(result.warnings.begin(), result.warnings.end());
  result.warnings.erase(std::unique(result.warnings.begin(), result.warnings.end()),
                        result.warnings.end());
  return result;
}

std::vector<std::uint8_t> threshold_labels(const std::vector<double>& membership,
                                           double threshold) {
  std::vector<std::uint8_t> labels(membership.size());
  for (std::size_t i = 0; i < membership.size(); ++i) {
    labels[i] = membership[i] >= threshold ? 1 : 0;
  }
  return labels;
}

namespace {

Prediction predict_with_weights(const Document& doc, const ModelParams& params,
                                const Matrix<double>& log_weights,
                                const TrainConfig& cfg, double threshold) {
  if (doc.words.empty() || doc.length() == 0) {
    throw std::invalid_argument("predict: document '" + doc.id + "' has no words");
  }
  Document view;
  view.id = doc.id;
  view.true_labels.assign(params.classes, kUnknownLabel);
  view.words.reserve(doc.words.size());
  for (const auto& w : doc.words) {
    if (w.index >= params.vocab) {
      throw std::invalid_argument("predict: document '" + doc.id +
                                  "' has word index outside the vocabulary");
    }
    bool seen = false;
    for (std::size_t t = 0; t < params.topics && !seen; ++t) {
      seen = log_weights(t, w.index) > kNegInf;
    }
    if (seen) view.words.push_back(w);
  }
  DocVariational state = init_doc_variational(view, params, LabelEvidence::none);
  e_step_document(view, params, log_weights, LabelEvidence::none, cfg, state);
  Prediction p;
  p.membership = state.membership;
  p.labels = threshold_labels(p.membership, threshold);
  return p;
}

}  // namespace

Prediction predict(const Document& doc, const ModelParams& params,
                   const SmoothedTopicState* topics, const TrainConfig& cfg,
                   double threshold) {
  return predict_with_weights(doc, params, topic_log_weights(params, topics), cfg,
                              threshold);
}

std::vector<Prediction> predict_corpus(const Corpus& corpus,
                                       const ModelParams& params,
                                       const SmoothedTopicState* topics,
                                       const TrainConfig& cfg, double threshold) {
  const Matrix<double> log_weights = topic_log_weights(params, topics);
  std::vector<Prediction> out(corpus.size());
  parallel_for(corpus.size(), cfg.threads, [&](std::size_t d) {
    out[d] = predict_with_weights(corpus[d], params, log_weights, cfg, threshold);
  });
  return out;
}

}  // namespace mlpa
