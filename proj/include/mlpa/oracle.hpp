#pragma once

#include <vector>

#include "mlpa/model.hpp"

namespace mlpa::oracle {

// Brute-force ground truth for tiny problems. Every assignment of class
// memberships, per-token classes and per-token topics is enumerated; the
// Dirichlet-distributed theta (and beta, when smoothing) are integrated out
// in closed form with log-gamma ratios. No digamma anywhere on this path.
struct TinyInstance {
  Document doc;
  ModelParams params;
  // observed: true labels fixed; crowd: annotator labels enter the
  // likelihood; none: words only.
  LabelEvidence evidence = LabelEvidence::none;
};

inline constexpr double kMaxConfigurations = 1e5;

/// Number of configurations 2^C * C^N * T^N enumerated for `inst`.
double configuration_count(const TinyInstance& inst);

/// log p(words [, labels] | params). Throws std::invalid_argument when the
/// enumeration would exceed kMaxConfigurations.
double exact_log_marginal(const TinyInstance& inst);

/// p(lambda_i = 1 | words [, labels], params) for every class.
std::vector<double> exact_posterior_lambda(const TinyInstance& inst);

}  // namespace mlpa::oracle
