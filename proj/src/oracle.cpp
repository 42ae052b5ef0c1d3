#include "mlpa/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mlpa/numerics.hpp"

namespace mlpa::oracle {

namespace {

// log of the probability of a particular draw sequence with category
// counts n under a Dirichlet(prior)-multinomial.
double log_dirichlet_multinomial(std::span<const double> prior,
                                 std::span<const int> counts) {
  double sum_prior = 0.0;
  int total = 0;
  double out = 0.0;
  for (std::size_t t = 0; t < prior.size(); ++t) {
    sum_prior += prior[t];
    total += counts[t];
    if (counts[t] > 0) out += std::lgamma(prior[t] + counts[t]) - std::lgamma(prior[t]);
  }
  if (total > 0) out += std::lgamma(sum_prior) - std::lgamma(sum_prior + total);
  return out;
}

std::vector<std::size_t> tokens_of(const Document& doc) {
  std::vector<std::size_t> tokens;
  for (const auto& w : doc.words) {
    for (std::uint32_t c = 0; c < w.count; ++c) tokens.push_back(w.index);
  }
  return tokens;
}

bool label_pattern_allowed(const TinyInstance& inst, unsigned mask) {
  if (inst.evidence != LabelEvidence::observed) return true;
  for (std::size_t i = 0; i < inst.params.classes; ++i) {
    const int on = (mask >> i) & 1u;
    if (inst.doc.true_labels.at(i) != on) return false;
  }
  return true;
}

// log p(words, labels, lambda = mask | params), summed over u and z.
double log_joint_for_labels(const TinyInstance& inst,
                            const std::vector<std::size_t>& tokens,
                            unsigned mask) {
  const auto& p = inst.params;
  const std::size_t C = p.classes;
  const std::size_t T = p.topics;
  const std::size_t V = p.vocab;
  const std::size_t N = tokens.size();

  double log_labels = 0.0;
  for (std::size_t i = 0; i < C; ++i) {
    const bool on = (mask >> i) & 1u;
    log_labels += std::log(on ? p.class_prior[i] : 1.0 - p.class_prior[i]);
  }
  if (inst.evidence == LabelEvidence::crowd) {
    const std::size_t K = p.annotators();
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t i = 0; i < C; ++i) {
        const auto y = inst.doc.crowd_label(k, i);
        if (y == kUnknownLabel) continue;
        const int on = (mask >> i) & 1u;
        const double q = p.annotator_quality[k];
        log_labels += std::log(y == on ? q : 1.0 - q);
      }
    }
  }

  std::vector<std::size_t> u(N, 0), z(N, 0);
  std::vector<int> theta_counts(C * T);
  std::vector<int> word_counts(T * V);
  std::vector<double> terms;
  const double log_uniform = -static_cast<double>(N) * std::log(static_cast<double>(C));

  for (;;) {
    std::fill(theta_counts.begin(), theta_counts.end(), 0);
    std::fill(word_counts.begin(), word_counts.end(), 0);
    double term = log_uniform;
    for (std::size_t n = 0; n < N; ++n) {
      ++theta_counts[u[n] * T + z[n]];
      if (p.smoothing) {
        ++word_counts[z[n] * V + tokens[n]];
      } else {
        term += std::log(p.topic_word(z[n], tokens[n]));
      }
    }
    for (std::size_t i = 0; i < C; ++i) {
      const int on = (mask >> i) & 1u;
      term += log_dirichlet_multinomial(p.theta_prior_row(i, on),
                                        {theta_counts.data() + i * T, T});
    }
    if (p.smoothing) {
      for (std::size_t t = 0; t < T; ++t) {
        term += log_dirichlet_multinomial(p.topic_word_prior.row(t),
                                          {word_counts.data() + t * V, V});
      }
    }
    terms.push_back(term);

    // Odometer over (u_0, z_0, u_1, z_1, ...).
    std::size_t n = 0;
    for (; n < N; ++n) {
      if (++z[n] < T) break;
      z[n] = 0;
      if (++u[n] < C) break;
      u[n] = 0;
    }
    if (n == N) break;
  }
  return log_labels + log_sum_exp(terms);
}

std::vector<double> per_label_pattern(const TinyInstance& inst) {
  const double count = configuration_count(inst);
  if (count > kMaxConfigurations) {
    throw std::invalid_argument("oracle: " + std::to_string(count) +
                                " configurations exceed the enumeration bound");
  }
  const auto tokens = tokens_of(inst.doc);
  const unsigned patterns = 1u << inst.params.classes;
  std::vector<double> out(patterns, -std::numeric_limits<double>::infinity());
  for (unsigned mask = 0; mask < patterns; ++mask) {
    if (label_pattern_allowed(inst, mask)) {
      out[mask] = log_joint_for_labels(inst, tokens, mask);
    }
  }
  return out;
}

}  // namespace

double configuration_count(const TinyInstance& inst) {
  const double C = static_cast<double>(inst.params.classes);
  const double T = static_cast<double>(inst.params.topics);
  const double N = static_cast<double>(inst.doc.length());
  const double labels =
      inst.evidence == LabelEvidence::observed ? 1.0 : std::pow(2.0, C);
  return labels * std::pow(C, N) * std::pow(T, N);
}

double exact_log_marginal(const TinyInstance& inst) {
  return log_sum_exp(per_label_pattern(inst));
}

std::vector<double> exact_posterior_lambda(const TinyInstance& inst) {
  const auto joint = per_label_pattern(inst);
  const double total = log_sum_exp(joint);
  std::vector<double> posterior(inst.params.classes, 0.0);
  for (unsigned mask = 0; mask < joint.size(); ++mask) {
    const double w = std::exp(joint[mask] - total);
    for (std::size_t i = 0; i < posterior.size(); ++i) {
      if ((mask >> i) & 1u) posterior[i] += w;
    }
  }
  return posterior;
}

}  // namespace mlpa::oracle
