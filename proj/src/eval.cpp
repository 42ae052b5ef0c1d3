#include "mlpa/eval.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace mlpa {

namespace {

void require_same_shape(std::size_t r1, std::size_t c1, std::size_t r2,
                        std::size_t c2, const char* what) {
  if (r1 != r2 || c1 != c2) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

double average_accuracy(const LabelMatrix& predicted, const LabelMatrix& truth) {
  require_same_shape(predicted.rows(), predicted.cols(), truth.rows(), truth.cols(),
                     "average_accuracy");
  if (truth.empty()) throw std::invalid_argument("average_accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    correct += predicted.values()[k] == truth.values()[k];
  }
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

double micro_f1(const LabelMatrix& predicted, const LabelMatrix& truth) {
  require_same_shape(predicted.rows(), predicted.cols(), truth.rows(), truth.cols(),
                     "micro_f1");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const bool p = predicted.values()[k] != 0;
    const bool t = truth.values()[k] != 0;
    tp += p && t;
    fp += p && !t;
    fn += !p && t;
  }
  if (tp + fp + fn == 0) return 1.0;
  return 2.0 * tp / (2.0 * tp + fp + fn);
}

double avg_class_log_likelihood(const Matrix<double>& membership,
                                const LabelMatrix& truth) {
  require_same_shape(membership.rows(), membership.cols(), truth.rows(), truth.cols(),
                     "avg_class_log_likelihood");
  if (truth.empty()) {
    throw std::invalid_argument("avg_class_log_likelihood: empty input");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double p = clamp_probability(membership.values()[k], kMembershipClamp);
    total += truth.values()[k] ? std::log(p) : std::log1p(-p);
  }
  return total / static_cast<double>(truth.size());
}

MetricsReport evaluate(const Matrix<double>& membership, const LabelMatrix& predicted,
                       const LabelMatrix& truth) {
  MetricsReport r;
  r.avg_accuracy = average_accuracy(predicted, truth);
  r.micro_f1 = micro_f1(predicted, truth);
  r.avg_class_log_likelihood = avg_class_log_likelihood(membership, truth);
  return r;
}

void write_metrics_csv(std::ostream& out, const MetricsReport& report) {
  char buf[64];
  auto row = [&](const char* name, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << name << ',' << buf << '\n';
  };
  out << "metric,value\n";
  row("avg_accuracy", report.avg_accuracy);
  row("micro_f1", report.micro_f1);
  row("avg_class_loglik", report.avg_class_log_likelihood);
  if (report.ann_rmse) row("ann_rmse", *report.ann_rmse);
}

LabelMatrix truth_matrix(const Corpus& corpus) {
  if (corpus.empty()) return {};
  const std::size_t C = corpus.front().num_classes();
  LabelMatrix m(corpus.size(), C);
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& doc = corpus[d];
    if (doc.num_classes() != C || !doc.labels_known()) {
      throw std::invalid_argument("document '" + doc.id + "' lacks true labels");
    }
    for (std::size_t i = 0; i < C; ++i) m(d, i) = static_cast<std::uint8_t>(doc.true_labels[i]);
  }
  return m;
}

}  // namespace mlpa
