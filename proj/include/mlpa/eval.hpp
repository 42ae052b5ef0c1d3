#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>

#include "mlpa/matrix.hpp"
#include "mlpa/model.hpp"

namespace mlpa {

/// D x C matrix of 0/1 labels.
using LabelMatrix = Matrix<std::uint8_t>;

/// Fraction of the D*C entries where prediction and truth agree.
double average_accuracy(const LabelMatrix& predicted, const LabelMatrix& truth);

/// 2TP / (2TP + FP + FN) pooled over all entries; 1.0 when there are no
/// positives on either side.
double micro_f1(const LabelMatrix& predicted, const LabelMatrix& truth);

/// Mean Bernoulli log-likelihood of the truth under the predicted
/// memberships, which are clamped to [1e-9, 1 - 1e-9] first.
double avg_class_log_likelihood(const Matrix<double>& membership,
                                const LabelMatrix& truth);

struct MetricsReport {
  double avg_accuracy = 0.0;
  double micro_f1 = 0.0;
  double avg_class_log_likelihood = 0.0;
  std::optional<double> ann_rmse;
};

MetricsReport evaluate(const Matrix<double>& membership,
                       const LabelMatrix& predicted, const LabelMatrix& truth);

/// `metric,value` rows.
void write_metrics_csv(std::ostream& out, const MetricsReport& report);

/// Truth matrix of a fully labelled corpus.
LabelMatrix truth_matrix(const Corpus& corpus);

}  // namespace mlpa
