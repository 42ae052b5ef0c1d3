#pragma once

#include <cstdint>

#include "mlpa/model.hpp"

namespace mlpa::synthetic {

/// Ground-truth parameters with well separated classes: every class owns a
/// "present" topic and an "absent" topic (its own when T >= 2C, otherwise
/// shared); topics put most of their mass on disjoint vocabulary blocks.
ModelParams separated_params(std::size_t classes, std::size_t topics,
                             std::size_t vocab, std::uint64_t seed);

/// Documents drawn from the generative process under `truth`, with true
/// labels set and no crowd labels. Lengths are 1 + Poisson(mean_length - 1).
Corpus generate_corpus(const ModelParams& truth, std::size_t docs,
                       double mean_length, std::uint64_t seed);

}  // namespace mlpa::synthetic
