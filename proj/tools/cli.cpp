#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "mlpa/crowd.hpp"
#include "mlpa/data.hpp"
#include "mlpa/errors.hpp"
#include "mlpa/eval.hpp"
#include "mlpa/inference.hpp"
#include "mlpa/model.hpp"

namespace mlpa::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string corpus, crowd, vocab, model_in, model_out, trace;
  std::string predictions, metrics_out, pool_in, pool_out, crowd_out;
  std::string corpus_out, features, disc_in, disc_out, sweep_out;

  std::size_t topics = 20;
  int max_iters = TrainConfig{}.max_em_iters;
  double tol = TrainConfig{}.em_rel_tol;
  int max_estep_iters = TrainConfig{}.max_estep_iters;
  double estep_tol = TrainConfig{}.estep_tol;
  std::uint64_t seed = TrainConfig{}.seed;
  std::string smoothing = "off";
  std::string mode = "nocrowd";
  double quality_init = kDefaultQualityInit;
  double threshold = kDefaultThreshold;
  unsigned threads = 1;
  bool deterministic = false;

  std::string buckets = "default";
  std::optional<std::size_t> per_doc;
  double mask = 0.0;

  std::size_t vocab_size = 0;

  std::string fractions = "0.1,0.3,0.5,0.7,1.0";
  std::string topic_grid = "20";
  int repeats = 1;
  double test_fraction = 0.2;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

void require(const std::string& value, const std::string& flag,
             const std::string& command) {
  if (value.empty()) throw UsageError(command + ": " + flag + " is required");
}

TrainConfig train_config(const Options& o) {
  TrainConfig cfg;
  cfg.max_em_iters = o.max_iters;
  cfg.em_rel_tol = o.tol;
  cfg.max_estep_iters = o.max_estep_iters;
  cfg.estep_tol = o.estep_tol;
  cfg.mode = parse_mode(o.mode);
  cfg.smoothing = o.smoothing == "on";
  cfg.seed = o.seed;
  cfg.quality_init = o.quality_init;
  cfg.threads = o.deterministic ? 1 : std::max(1u, o.threads);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

void erase_true_labels(Corpus& corpus) {
  for (auto& doc : corpus) {
    std::fill(doc.true_labels.begin(), doc.true_labels.end(), kUnknownLabel);
  }
}

void check_vocab(const Options& o, std::size_t V) {
  if (o.vocab.empty()) return;
  const Vocabulary vocab = load_vocabulary(o.vocab);
  if (vocab.size() != V) {
    throw std::runtime_error("vocabulary has " + std::to_string(vocab.size()) +
                             " terms but the corpus declares V=" + std::to_string(V));
  }
}

LabelMatrix labels_matrix(const std::vector<Prediction>& preds, std::size_t C) {
  LabelMatrix m(preds.size(), C);
  for (std::size_t d = 0; d < preds.size(); ++d) {
    std::copy(preds[d].labels.begin(), preds[d].labels.end(), m.row(d).begin());
  }
  return m;
}

Matrix<double> membership_matrix(const std::vector<Prediction>& preds, std::size_t C) {
  Matrix<double> m(preds.size(), C);
  for (std::size_t d = 0; d < preds.size(); ++d) {
    std::copy(preds[d].membership.begin(), preds[d].membership.end(), m.row(d).begin());
  }
  return m;
}

void write_predictions(std::ostream& out, const Corpus& corpus,
                       const std::vector<Prediction>& preds) {
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    out << corpus[d].id;
    for (double p : preds[d].membership) out << ' ' << fmt(p);
    out << ' ';
    for (auto b : preds[d].labels) out << (b ? '1' : '0');
    out << '\n';
  }
}

std::map<std::string, Prediction> read_predictions(std::istream& in,
                                                   const std::string& source,
                                                   std::size_t C) {
  std::map<std::string, Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream is(line);
    std::string id;
    if (!(is >> id)) continue;
    Prediction p;
    p.membership.resize(C);
    for (double& v : p.membership) {
      if (!(is >> v)) throw FormatError(source, lineno, "expected " + std::to_string(C) + " memberships");
    }
    std::string bits, extra;
    if (!(is >> bits) || bits.size() != C || (is >> extra)) {
      throw FormatError(source, lineno, "expected a " + std::to_string(C) + "-bit label string");
    }
    for (char c : bits) {
      if (c != '0' && c != '1') throw FormatError(source, lineno, "bad label bit");
      p.labels.push_back(c == '1' ? 1 : 0);
    }
    if (!out.emplace(id, std::move(p)).second) {
      throw FormatError(source, lineno, "duplicate doc_id '" + id + "'");
    }
  }
  return out;
}

AnnotatorPool pool_from_options(const Options& o, std::uint64_t seed) {
  if (!o.pool_in.empty()) {
    auto in = open_in(o.pool_in);
    AnnotatorPool pool = read_pool(in, o.pool_in);
    pool.per_doc = o.per_doc.value_or(std::min<std::size_t>(5, pool.size()));
    if (pool.per_doc < 1 || pool.per_doc > pool.size()) {
      throw UsageError("--per-doc must lie in [1, K]");
    }
    return pool;
  }
  std::vector<QualityBucket> buckets;
  if (o.buckets == "default") {
    buckets = default_buckets();
  } else if (o.buckets == "adversarial") {
    buckets = adversarial_buckets();
  } else {
    try {
      buckets = parse_buckets(o.buckets);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  std::size_t K = 0;
  for (const auto& b : buckets) K += b.count;
  const std::size_t per_doc = o.per_doc.value_or(std::min<std::size_t>(5, K));
  try {
    return sample_pool(buckets, per_doc, seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// --- commands --------------------------------------------------------------

int cmd_train(const Options& o, std::ostream& err) {
  require(o.corpus, "--corpus", "train");
  require(o.model_out, "--model-out", "train");
  const TrainConfig cfg = train_config(o);
  if (cfg.mode == Mode::crowd && o.crowd.empty()) {
    throw UsageError("train: crowd mode needs --crowd");
  }
  LoadedCorpus data = load_corpus(
      o.corpus, cfg.mode == Mode::crowd ? std::optional(o.crowd) : std::nullopt);
  check_vocab(o, data.dims.vocab);
  if (cfg.mode == Mode::crowd) erase_true_labels(data.docs);
  data.dims.topics = o.topics;

  const TrainResult result = train(data.docs, data.dims, cfg);
  save_model(o.model_out, result.params, result.topics_ptr());
  if (!o.trace.empty()) {
    auto out = open_out(o.trace);
    write_trace_csv(out, result.trace);
  }
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  if (!result.converged) {
    err << "train: no convergence after " << result.trace.size() << " iterations\n";
    return kNotConverged;
  }
  return kOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
  require(o.model_in, "--model-in", "predict");
  require(o.corpus, "--corpus", "predict");
  const TrainConfig cfg = train_config(o);
  const LoadedModel model = load_model(o.model_in);
  const LoadedCorpus data = load_corpus(o.corpus);
  check_vocab(o, data.dims.vocab);
  if (data.dims.classes != model.params.classes || data.dims.vocab != model.params.vocab) {
    throw std::runtime_error("predict: corpus dimensions do not match the model");
  }
  const auto preds =
      predict_corpus(data.docs, model.params,
                     model.params.smoothing ? &model.topics : nullptr, cfg, o.threshold);
  if (o.predictions.empty()) {
    write_predictions(out, data.docs, preds);
  } else {
    auto file = open_out(o.predictions);
    write_predictions(file, data.docs, preds);
  }
  return kOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  require(o.corpus, "--corpus", "evaluate");
  if (o.predictions.empty() == o.model_in.empty()) {
    throw UsageError("evaluate: give exactly one of --predictions and --model-in");
  }
  const LoadedCorpus data = load_corpus(o.corpus);
  const std::size_t C = data.dims.classes;
  for (const auto& doc : data.docs) {
    if (!doc.labels_known()) {
      throw std::runtime_error("evaluate: document '" + doc.id + "' has unknown labels");
    }
  }
  std::vector<Prediction> preds;
  std::optional<LoadedModel> model;
  if (!o.model_in.empty()) {
    model = load_model(o.model_in);
    if (model->params.classes != C || model->params.vocab != data.dims.vocab) {
      throw std::runtime_error("evaluate: corpus dimensions do not match the model");
    }
    preds = predict_corpus(data.docs, model->params,
                           model->params.smoothing ? &model->topics : nullptr,
                           train_config(o), o.threshold);
  } else {
    auto in = open_in(o.predictions);
    auto by_id = read_predictions(in, o.predictions, C);
    for (const auto& doc : data.docs) {
      auto it = by_id.find(doc.id);
      if (it == by_id.end()) {
        throw std::runtime_error("evaluate: no prediction for document '" + doc.id + "'");
      }
      preds.push_back(it->second);
    }
  }
  MetricsReport report = evaluate(membership_matrix(preds, C), labels_matrix(preds, C),
                                  truth_matrix(data.docs));
  if (!o.pool_in.empty()) {
    if (!model || model->params.mode != Mode::crowd) {
      throw UsageError("evaluate: --pool-in needs a crowd-mode --model-in");
    }
    auto in = open_in(o.pool_in);
    const AnnotatorPool pool = read_pool(in, o.pool_in);
    report.ann_rmse = ann_rmse(model->params.annotator_quality, pool.qualities);
  }
  if (o.metrics_out.empty()) {
    write_metrics_csv(out, report);
  } else {
    auto file = open_out(o.metrics_out);
    write_metrics_csv(file, report);
  }
  return kOk;
}

int cmd_simulate_crowd(const Options& o) {
  require(o.corpus, "--corpus", "simulate-crowd");
  require(o.crowd_out, "--crowd-out", "simulate-crowd");
  if (!(o.mask >= 0.0 && o.mask < 1.0)) throw UsageError("--mask must lie in [0,1)");
  const LoadedCorpus data = load_corpus(o.corpus);
  const AnnotatorPool pool = pool_from_options(o, o.seed);
  const AnnotatedCorpus annotated = annotate_corpus(data.docs, pool, o.seed + 1, o.mask);
  {
    auto out = open_out(o.crowd_out);
    write_crowd(out, annotated.docs, pool.size());
  }
  if (!o.pool_out.empty()) {
    auto out = open_out(o.pool_out);
    write_pool(out, pool);
  }
  if (!o.corpus_out.empty()) {
    auto out = open_out(o.corpus_out);
    write_corpus(out, annotated.docs, data.dims.vocab);
  }
  return kOk;
}

int cmd_discretize(const Options& o, std::ostream& err) {
  require(o.features, "--features", "discretize");
  require(o.corpus_out, "--corpus-out", "discretize");
  auto in = open_in(o.features);
  const auto instances = read_real_corpus(in, o.features);
  Discretizer disc;
  if (!o.disc_in.empty()) {
    auto din = open_in(o.disc_in);
    disc = read_discretizer(din, o.disc_in);
  } else {
    if (o.vocab_size == 0) throw UsageError("discretize: --vocab-size or --disc-in is required");
    std::vector<double> pooled;
    for (const auto& inst : instances) {
      pooled.insert(pooled.end(), inst.features.begin(), inst.features.end());
    }
    DiscretizerFit fit = fit_discretizer(pooled, o.vocab_size, o.seed);
    for (const auto& w : fit.warnings) err << "warning: " << w << '\n';
    disc = std::move(fit.discretizer);
  }
  Corpus corpus;
  for (const auto& inst : instances) {
    Document doc;
    doc.id = inst.id;
    doc.true_labels = inst.labels;
    doc.words = discretize_instance(inst.features, disc);
    corpus.push_back(std::move(doc));
  }
  {
    auto out = open_out(o.corpus_out);
    write_corpus(out, corpus, disc.size());
  }
  if (!o.disc_out.empty()) {
    auto out = open_out(o.disc_out);
    write_discretizer(out, disc);
  }
  return kOk;
}

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const bool percent = !item.empty() && item.back() == '%';
    if (percent) item.pop_back();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw UsageError("bad fraction '" + item + "'");
    if (percent) v /= 100.0;
    if (!(v > 0.0 && v <= 1.0)) {
      throw UsageError("training fractions must lie in (0, 1] (or (0%, 100%])");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--fractions is empty");
  return out;
}

std::vector<std::size_t> parse_topic_grid(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v < 1) {
      throw UsageError("bad topic count '" + item + "'");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw UsageError("--topic-grid is empty");
  return out;
}

struct SweepRow {
  double fraction;
  std::size_t topics;
  MetricsReport metrics;
};

void write_sweep_row(std::ostream& out, const SweepRow& r, const char* kind) {
  out << fmt_short(r.fraction) << ',' << r.topics << ',' << fmt(r.metrics.avg_accuracy)
      << ',' << fmt(r.metrics.micro_f1) << ',' << fmt(r.metrics.avg_class_log_likelihood)
      << ',' << (r.metrics.ann_rmse ? fmt(*r.metrics.ann_rmse) : "") << ',' << kind
      << '\n';
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  require(o.corpus, "--corpus", "sweep");
  if (o.repeats < 1) throw UsageError("--repeats must be >= 1");
  if (!(o.test_fraction > 0.0 && o.test_fraction < 1.0)) {
    throw UsageError("--test-fraction must lie in (0,1)");
  }
  const auto fractions = parse_fractions(o.fractions);
  const auto grid = parse_topic_grid(o.topic_grid);
  const TrainConfig base = train_config(o);
  const bool crowd = base.mode == Mode::crowd;

  LoadedCorpus data = load_corpus(
      o.corpus, crowd && !o.crowd.empty() ? std::optional(o.crowd) : std::nullopt);
  for (const auto& doc : data.docs) {
    if (!doc.labels_known()) {
      throw std::runtime_error("sweep: document '" + doc.id + "' has unknown labels");
    }
  }
  std::optional<AnnotatorPool> file_pool;
  if (crowd && !o.crowd.empty() && !o.pool_in.empty()) {
    auto in = open_in(o.pool_in);
    file_pool = read_pool(in, o.pool_in);
  }

  std::ofstream file;
  if (!o.sweep_out.empty()) file = open_out(o.sweep_out);
  std::ostream& csv = o.sweep_out.empty() ? out : file;
  csv << "train_fraction,topics,avg_accuracy,micro_f1,avg_class_loglik,ann_rmse,row\n";

  for (double fraction : fractions) {
    for (std::size_t T : grid) {
      std::vector<SweepRow> runs;
      for (int r = 0; r < o.repeats; ++r) {
        const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(r);
        const CorpusSplit split = split_corpus(data.docs, 1.0 - o.test_fraction, seed);
        Corpus train_docs = split.train;
        std::optional<std::vector<double>> true_quality;
        Dimensions dims = data.dims;
        dims.topics = T;
        if (crowd && o.crowd.empty()) {
          const AnnotatorPool pool = pool_from_options(o, seed);
          train_docs = annotate_corpus(train_docs, pool, seed + 1, o.mask).docs;
          dims.annotators = pool.size();
          true_quality = pool.qualities;
        } else if (crowd) {
          erase_true_labels(train_docs);
          if (file_pool) true_quality = file_pool->qualities;
        }
        const std::size_t n = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::ceil(fraction * train_docs.size())), 1,
            train_docs.size());
        train_docs.resize(n);

        TrainConfig cfg = base;
        cfg.seed = seed;
        const TrainResult model = train(train_docs, dims, cfg);
        if (!model.converged) {
          err << "sweep: fraction " << fmt_short(fraction) << ", T=" << T << ", seed "
              << seed << " did not converge\n";
        }
        const auto preds = predict_corpus(split.test, model.params, model.topics_ptr(),
                                          cfg, o.threshold);
        SweepRow row{fraction, T,
                     evaluate(membership_matrix(preds, dims.classes),
                              labels_matrix(preds, dims.classes),
                              truth_matrix(split.test))};
        if (true_quality) {
          row.metrics.ann_rmse = ann_rmse(model.params.annotator_quality, *true_quality);
        }
        write_sweep_row(csv, row, "run");
        runs.push_back(row);
      }
      SweepRow mean{fraction, T, {}};
      double rmse = 0.0;
      for (const auto& r : runs) {
        mean.metrics.avg_accuracy += r.metrics.avg_accuracy / runs.size();
        mean.metrics.micro_f1 += r.metrics.micro_f1 / runs.size();
        mean.metrics.avg_class_log_likelihood +=
            r.metrics.avg_class_log_likelihood / runs.size();
        if (r.metrics.ann_rmse) rmse += *r.metrics.ann_rmse / runs.size();
      }
      if (runs.front().metrics.ann_rmse) mean.metrics.ann_rmse = rmse;
      write_sweep_row(csv, mean, "mean");
    }
  }
  return kOk;
}

void add_train_flags(CLI::App& cmd, Options& o) {
  cmd.add_option("--topics", o.topics, "Number of topics T")->check(CLI::PositiveNumber);
  cmd.add_option("--max-iters", o.max_iters, "Maximum EM iterations");
  cmd.add_option("--tol", o.tol, "Relative ELBO change for EM convergence");
  cmd.add_option("--max-estep-iters", o.max_estep_iters, "Maximum E-step cycles per document");
  cmd.add_option("--estep-tol", o.estep_tol, "E-step convergence tolerance");
  cmd.add_option("--seed", o.seed, "Random seed");
  cmd.add_option("--smoothing", o.smoothing, "Dirichlet prior on topic-word distributions")
      ->check(CLI::IsMember({"on", "off"}));
  cmd.add_option("--mode", o.mode, "Label source for training")
      ->check(CLI::IsMember({"crowd", "nocrowd"}));
  cmd.add_option("--quality-init", o.quality_init, "Initial annotator quality");
  cmd.add_option("--threads", o.threads, "Worker threads for the E-step");
  cmd.add_flag("--deterministic", o.deterministic,
               "Run single-threaded (results are reproducible either way)");
}

void add_pool_flags(CLI::App& cmd, Options& o) {
  cmd.add_option("--buckets", o.buckets,
                 "Annotator quality buckets: default, adversarial or count:low:high,...");
  cmd.add_option("--per-doc", o.per_doc, "Annotators sampled per document");
  cmd.add_option("--mask", o.mask, "Probability of dropping each judgment");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-label presence-absence topic model with crowd annotators", "mlpa"};
  app.require_subcommand(1);
  Options o;

  auto* train_cmd = app.add_subcommand("train", "Fit a model with variational EM");
  train_cmd->add_option("--corpus", o.corpus, "Corpus file (.mlc)");
  train_cmd->add_option("--crowd", o.crowd, "Crowd label file (crowd mode)");
  train_cmd->add_option("--vocab", o.vocab, "Vocabulary file, checked against V");
  train_cmd->add_option("--model-out", o.model_out, "Where to write the model");
  train_cmd->add_option("--trace", o.trace, "Where to write the ELBO trace CSV");
  add_train_flags(*train_cmd, o);

  auto* predict_cmd = app.add_subcommand("predict", "Predict class memberships");
  predict_cmd->add_option("--model-in", o.model_in, "Model file");
  predict_cmd->add_option("--corpus", o.corpus, "Corpus file (.mlc); labels are ignored");
  predict_cmd->add_option("--vocab", o.vocab, "Vocabulary file, checked against V");
  predict_cmd->add_option("--predictions", o.predictions, "Output file (default stdout)");
  predict_cmd->add_option("--threshold", o.threshold, "Membership threshold")
      ->check(CLI::Range(0.0, 1.0));
  add_train_flags(*predict_cmd, o);

  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against true labels");
  eval_cmd->add_option("--corpus", o.corpus, "Corpus with true labels");
  eval_cmd->add_option("--predictions", o.predictions, "Predictions file");
  eval_cmd->add_option("--model-in", o.model_in, "Model file, to predict inline");
  eval_cmd->add_option("--pool-in", o.pool_in, "True annotator pool, for Ann RMSE");
  eval_cmd->add_option("--metrics-out", o.metrics_out, "Output CSV (default stdout)");
  eval_cmd->add_option("--threshold", o.threshold, "Membership threshold")
      ->check(CLI::Range(0.0, 1.0));
  add_train_flags(*eval_cmd, o);

  auto* sim_cmd = app.add_subcommand("simulate-crowd", "Simulate annotators on a labelled corpus");
  sim_cmd->add_option("--corpus", o.corpus, "Corpus with true labels");
  sim_cmd->add_option("--pool-in", o.pool_in, "Use this annotator pool instead of sampling");
  sim_cmd->add_option("--crowd-out", o.crowd_out, "Crowd label file to write");
  sim_cmd->add_option("--pool-out", o.pool_out, "Where to write the true pool");
  sim_cmd->add_option("--corpus-out", o.corpus_out, "Copy of the corpus with labels erased");
  sim_cmd->add_option("--seed", o.seed, "Random seed");
  add_pool_flags(*sim_cmd, o);

  auto* disc_cmd = app.add_subcommand("discretize", "Turn real-valued features into words");
  disc_cmd->add_option("--features", o.features, "Feature file (.mlr)");
  disc_cmd->add_option("--vocab-size", o.vocab_size, "Number of k-means centers V");
  disc_cmd->add_option("--disc-in", o.disc_in, "Apply an existing discretizer");
  disc_cmd->add_option("--disc-out", o.disc_out, "Where to write the discretizer");
  disc_cmd->add_option("--corpus-out", o.corpus_out, "Corpus file to write");
  disc_cmd->add_option("--seed", o.seed, "Random seed");

  auto* sweep_cmd = app.add_subcommand("sweep", "Train/test runs over data sizes and topic counts");
  sweep_cmd->add_option("--corpus", o.corpus, "Corpus with true labels");
  sweep_cmd->add_option("--crowd", o.crowd, "Crowd labels to use instead of simulating");
  sweep_cmd->add_option("--pool-in", o.pool_in, "True pool for --crowd, for Ann RMSE");
  sweep_cmd->add_option("--fractions", o.fractions,
                        "Comma-separated training fractions, e.g. 0.1,0.5 or 10%,50%");
  sweep_cmd->add_option("--topic-grid", o.topic_grid, "Comma-separated topic counts");
  sweep_cmd->add_option("--repeats", o.repeats, "Runs per cell, seeds seed..seed+repeats-1");
  sweep_cmd->add_option("--test-fraction", o.test_fraction, "Held-out share of the corpus");
  sweep_cmd->add_option("--threshold", o.threshold, "Membership threshold")
      ->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--sweep-out", o.sweep_out, "Output CSV (default stdout)");
  add_train_flags(*sweep_cmd, o);
  add_pool_flags(*sweep_cmd, o);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(o, err);
    if (predict_cmd->parsed()) return cmd_predict(o, out);
    if (eval_cmd->parsed()) return cmd_evaluate(o, out);
    if (sim_cmd->parsed()) return cmd_simulate_crowd(o);
    if (disc_cmd->parsed()) return cmd_discretize(o, err);
    if (sweep_cmd->parsed()) return cmd_sweep(o, out, err);
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace mlpa::cli
