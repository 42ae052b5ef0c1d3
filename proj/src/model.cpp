#include "mlpa/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mlpa/errors.hpp"
#include "mlpa/random.hpp"

namespace mlpa {

std::string to_string(Mode mode) {
  return mode == Mode::crowd ? "crowd" : "nocrowd";
}

Mode parse_mode(const std::string& text) {
  if (text == "crowd") return Mode::crowd;
  if (text == "nocrowd" || text == "no-crowd") return Mode::no_crowd;
  throw std::invalid_argument("unknown mode '" + text + "'");
}

void Dimensions::validate() const {
  if (docs == 0 || classes == 0 || topics == 0 || vocab == 0) {
    throw std::invalid_argument(
        "dimensions: documents, classes, topics and vocabulary must be > 0");
  }
}

std::size_t Document::length() const {
  std::size_t n = 0;
  for (const auto& w : words) n += w.count;
  return n;
}

std::size_t Document::num_annotators() const {
  return true_labels.empty() ? 0 : crowd_labels.size() / true_labels.size();
}

bool Document::labels_known() const {
  return std::none_of(true_labels.begin(), true_labels.end(),
                      [](std::int8_t l) { return l == kUnknownLabel; });
}

void Document::validate(const Dimensions& dims) const {
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("document '" + id + "': " + what);
  };
  if (words.empty() || length() == 0) fail("no words");
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (words[w].index >= dims.vocab) fail("word index out of range");
    if (words[w].count == 0) fail("zero word count");
    if (w > 0 && words[w].index <= words[w - 1].index) {
      fail("word indices not strictly increasing");
    }
  }
  if (true_labels.size() != dims.classes) fail("label vector length != C");
  for (auto l : true_labels) {
    if (l != 0 && l != 1 && l != kUnknownLabel) fail("label outside {0,1,-1}");
  }
  if (crowd_labels.size() != dims.annotators * dims.classes) {
    fail("crowd label array is not K x C");
  }
  for (auto y : crowd_labels) {
    if (y != 0 && y != 1 && y != kUnknownLabel) {
      fail("crowd label outside {0,1,-1}");
    }
  }
}

double clamp_probability(double p, double margin) {
  return std::clamp(p, margin, 1.0 - margin);
}

Dimensions ModelParams::dims(std::size_t docs) const {
  return Dimensions{docs, classes, topics, vocab, annotators()};
}

ModelParams init_params(const Dimensions& dims, Mode mode, bool smoothing,
                        std::uint64_t seed, double quality_init) {
  dims.validate();
  if (mode == Mode::crowd && dims.annotators == 0) {
    throw std::invalid_argument("crowd mode requires at least one annotator");
  }
  ModelParams p;
  p.mode = mode;
  p.smoothing = smoothing;
  p.classes = dims.classes;
  p.topics = dims.topics;
  p.vocab = dims.vocab;
  p.theta_prior = Matrix<double>(2 * dims.classes, dims.topics, 1.0);
  p.class_prior.assign(dims.classes, 0.5);
  if (mode == Mode::crowd) {
    p.annotator_quality.assign(dims.annotators,
                               clamp_probability(quality_init, kParamClamp));
  }
  if (smoothing) {
    p.topic_word_prior = Matrix<double>(dims.topics, dims.vocab, 1.0);
  } else {
    Rng rng(seed);
    const std::vector<double> flat(dims.vocab, 1.0);
    p.topic_word = Matrix<double>(dims.topics, dims.vocab);
    for (std::size_t t = 0; t < dims.topics; ++t) {
      auto row = sample_dirichlet(flat, rng);
      std::copy(row.begin(), row.end(), p.topic_word.row(t).begin());
    }
  }
  return p;
}

void update_theta_posterior(const Document& doc, const ModelParams& params,
                            DocVariational& state) {
  const std::size_t C = params.classes;
  const std::size_t T = params.topics;
  // counts[i][t] = sum_w cnt_w * delta_wi * phi_wt
  Matrix<double> counts(C, T, 0.0);
  for (std::size_t w = 0; w < doc.words.size(); ++w) {
    const double cnt = doc.words[w].count;
    const auto delta = state.word_class.row(w);
    const auto phi = state.word_topic.row(w);
    for (std::size_t i = 0; i < C; ++i) {
      const double weight = cnt * delta[i];
      for (std::size_t t = 0; t < T; ++t) counts(i, t) += weight * phi[t];
    }
  }
  for (std::size_t i = 0; i < C; ++i) {
    const double present = state.membership[i];
    for (int j = 0; j < 2; ++j) {
      const double share = j == 1 ? present : 1.0 - present;
      const auto prior = params.theta_prior_row(i, j);
      auto post = state.theta_posterior.row(2 * i + j);
      for (std::size_t t = 0; t < T; ++t) {
        post[t] = prior[t] + share * counts(i, t);
      }
    }
  }
}

DocVariational init_doc_variational(const Document& doc,
                                    const ModelParams& params,
                                    LabelEvidence evidence) {
  const std::size_t C = params.classes;
  const std::size_t T = params.topics;
  const std::size_t U = doc.words.size();
  DocVariational s;
  s.word_class = Matrix<double>(U, C, 1.0 / C);
  s.word_topic = Matrix<double>(U, T, 1.0 / T);
  s.theta_posterior = Matrix<double>(2 * C, T);
  s.membership.resize(C);

  switch (evidence) {
    case LabelEvidence::observed:
      if (!doc.labels_known()) {
        throw std::invalid_argument("document '" + doc.id +
                                    "': observed-label mode needs every label");
      }
      s.labels_observed = true;
      for (std::size_t i = 0; i < C; ++i) s.membership[i] = doc.true_labels[i];
      break;
    case LabelEvidence::crowd: {
      const std::size_t K = std::min(params.annotators(), doc.num_annotators());
      for (std::size_t i = 0; i < C; ++i) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t k = 0; k < K; ++k) {
          const auto y = doc.crowd_label(k, i);
          if (y == kUnknownLabel) continue;
          const double q = params.annotator_quality[k];
          sum += y == 1 ? q : 1.0 - q;
          ++n;
        }
        const double p = n > 0 ? sum / n : params.class_prior[i];
        s.membership[i] = clamp_probability(p, kMembershipClamp);
      }
      break;
    }
    case LabelEvidence::none:
      for (std::size_t i = 0; i < C; ++i) {
        s.membership[i] = clamp_probability(params.class_prior[i], kMembershipClamp);
      }
      break;
  }
  update_theta_posterior(doc, params, s);
  return s;
}

namespace {

bool row_stochastic(std::span<const double> row) {
  double sum = 0.0;
  for (double x : row) {
    if (!(x >= 0.0)) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= kStochasticTolerance;
}

bool in_clamped_range(double p, double margin) {
  // Small slack for the last-bit error of 1 - margin.
  return p >= margin * (1 - 1e-12) && p <= 1.0 - margin * (1 - 1e-9);
}

}  // namespace

std::vector<std::string> validate(const ModelParams& params,
                                  const DocVariational* state,
                                  const SmoothedTopicState* topics) {
  std::vector<std::string> out;
  const std::size_t C = params.classes;
  const std::size_t T = params.topics;
  const std::size_t V = params.vocab;

  if (params.theta_prior.rows() != 2 * C || params.theta_prior.cols() != T) {
    out.emplace_back("alpha shape");
  } else if (std::any_of(params.theta_prior.values().begin(),
                         params.theta_prior.values().end(),
                         [](double a) { return !(a > 0.0); })) {
    out.emplace_back("alpha positivity");
  }
  if (params.class_prior.size() != C) {
    out.emplace_back("xi shape");
  } else if (std::any_of(params.class_prior.begin(), params.class_prior.end(),
                         [](double p) { return !in_clamped_range(p, kParamClamp); })) {
    out.emplace_back("xi range");
  }
  if (params.mode == Mode::crowd && params.annotator_quality.empty()) {
    out.emplace_back("rho missing in crowd mode");
  }
  if (params.mode == Mode::no_crowd && !params.annotator_quality.empty()) {
    out.emplace_back("rho present outside crowd mode");
  }
  if (std::any_of(params.annotator_quality.begin(), params.annotator_quality.end(),
                  [](double p) { return !in_clamped_range(p, kParamClamp); })) {
    out.emplace_back("rho range");
  }
  if (params.smoothing) {
    if (params.topic_word_prior.rows() != T || params.topic_word_prior.cols() != V) {
      out.emplace_back("eta shape");
    } else if (std::any_of(params.topic_word_prior.values().begin(),
                           params.topic_word_prior.values().end(),
                           [](double a) { return !(a > 0.0); })) {
      out.emplace_back("eta positivity");
    }
  } else {
    if (params.topic_word.rows() != T || params.topic_word.cols() != V) {
      out.emplace_back("beta shape");
    } else {
      for (std::size_t t = 0; t < T; ++t) {
        if (!row_stochastic(params.topic_word.row(t))) {
          out.emplace_back("beta row not stochastic");
          break;
        }
      }
    }
  }

  if (state != nullptr) {
    const auto& s = *state;
    if (s.word_class.cols() != C || s.word_topic.cols() != T ||
        s.word_class.rows() != s.word_topic.rows() ||
        s.membership.size() != C || s.theta_posterior.rows() != 2 * C ||
        s.theta_posterior.cols() != T) {
      out.emplace_back("variational state shape");
      return out;
    }
    for (std::size_t w = 0; w < s.word_class.rows(); ++w) {
      if (!row_stochastic(s.word_class.row(w))) {
        out.emplace_back("delta row not stochastic");
        break;
      }
    }
    for (std::size_t w = 0; w < s.word_topic.rows(); ++w) {
      if (!row_stochastic(s.word_topic.row(w))) {
        out.emplace_back("phi row not stochastic");
        break;
      }
    }
    for (double m : s.membership) {
      const bool ok = s.labels_observed ? (m == 0.0 || m == 1.0)
                                        : in_clamped_range(m, kMembershipClamp);
      if (!ok) {
        out.emplace_back("Delta range");
        break;
      }
    }
    if (params.theta_prior.rows() == 2 * C && params.theta_prior.cols() == T) {
      for (std::size_t r = 0; r < 2 * C; ++r) {
        for (std::size_t t = 0; t < T; ++t) {
          if (!(s.theta_posterior(r, t) >= params.theta_prior(r, t) - 1e-12)) {
            out.emplace_back("gamma below alpha");
            r = 2 * C;
            break;
          }
        }
      }
    }
  }

  if (topics != nullptr && params.smoothing) {
    const auto& chi = topics->topic_word_posterior;
    if (chi.rows() != T || chi.cols() != V) {
      out.emplace_back("chi shape");
    } else if (params.topic_word_prior.rows() == T &&
               params.topic_word_prior.cols() == V) {
      for (std::size_t k = 0; k < chi.size(); ++k) {
        if (!(chi.values()[k] >= params.topic_word_prior.values()[k] - 1e-12)) {
          out.emplace_back("chi below eta");
          break;
        }
      }
    }
  }
  return out;
}

namespace {

constexpr const char* kModelHeader = "mlpa-model v1";

void write_array(std::ostream& out, const char* name,
                 const std::vector<double>& values) {
  out << name << ' ' << values.size() << '\n';
  char buf[32];
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", values[k]);
    if (k) out << ' ';
    out << buf;
  }
  out << '\n';
}

std::vector<double> read_array(std::istream& in, const char* name,
                               std::size_t expected) {
  std::string key;
  std::size_t n = 0;
  if (!(in >> key >> n) || key != name) {
    throw FormatError("model", 0, std::string("expected section '") + name + "'");
  }
  if (n != expected) {
    throw FormatError("model", 0, std::string("section '") + name +
                                      "' has " + std::to_string(n) +
                                      " values, expected " +
                                      std::to_string(expected));
  }
  std::vector<double> values(n);
  for (auto& v : values) {
    std::string tok;
    if (!(in >> tok)) {
      throw FormatError("model", 0, std::string("truncated section '") + name + "'");
    }
    char* end = nullptr;
    v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
      throw FormatError("model", 0, "bad number '" + tok + "'");
    }
  }
  return values;
}

std::size_t read_size(std::istream& in, const char* name) {
  std::string key;
  std::size_t n = 0;
  if (!(in >> key >> n) || key != name) {
    throw FormatError("model", 0, std::string("expected '") + name + "'");
  }
  return n;
}

std::string read_word(std::istream& in, const char* name) {
  std::string key, value;
  if (!(in >> key >> value) || key != name) {
    throw FormatError("model", 0, std::string("expected '") + name + "'");
  }
  return value;
}

Matrix<double> to_matrix(std::vector<double> values, std::size_t rows,
                         std::size_t cols) {
  Matrix<double> m(rows, cols);
  m.values() = std::move(values);
  return m;
}

}  // namespace

void write_model(std::ostream& out, const ModelParams& params,
                 const SmoothedTopicState* topics) {
  out << kModelHeader << '\n';
  out << "classes " << params.classes << '\n';
  out << "topics " << params.topics << '\n';
  out << "vocab " << params.vocab << '\n';
  out << "annotators " << params.annotators() << '\n';
  out << "mode " << to_string(params.mode) << '\n';
  out << "smoothing " << (params.smoothing ? "on" : "off") << '\n';
  write_array(out, "alpha", params.theta_prior.values());
  write_array(out, "xi", params.class_prior);
  write_array(out, "rho", params.annotator_quality);
  if (params.smoothing) {
    if (topics == nullptr) {
      throw std::invalid_argument("write_model: smoothed model needs chi");
    }
    write_array(out, "eta", params.topic_word_prior.values());
    write_array(out, "chi", topics->topic_word_posterior.values());
  } else {
    write_array(out, "beta", params.topic_word.values());
  }
}

LoadedModel read_model(std::istream& in) {
  std::string header;
  std::getline(in, header);
  if (header != kModelHeader) {
    throw FormatError("model", 1, "expected header '" + std::string(kModelHeader) + "'");
  }
  LoadedModel m;
  auto& p = m.params;
  p.classes = read_size(in, "classes");
  p.topics = read_size(in, "topics");
  p.vocab = read_size(in, "vocab");
  const std::size_t K = read_size(in, "annotators");
  p.mode = parse_mode(read_word(in, "mode"));
  const std::string smoothing = read_word(in, "smoothing");
  if (smoothing != "on" && smoothing != "off") {
    throw FormatError("model", 0, "smoothing must be on|off");
  }
  p.smoothing = smoothing == "on";
  const std::size_t C = p.classes, T = p.topics, V = p.vocab;
  p.theta_prior = to_matrix(read_array(in, "alpha", 2 * C * T), 2 * C, T);
  p.class_prior = read_array(in, "xi", C);
  p.annotator_quality = read_array(in, "rho", K);
  if (p.smoothing) {
    p.topic_word_prior = to_matrix(read_array(in, "eta", T * V), T, V);
    m.topics.topic_word_posterior = to_matrix(read_array(in, "chi", T * V), T, V);
  } else {
    p.topic_word = to_matrix(read_array(in, "beta", T * V), T, V);
  }
  auto problems = validate(p, nullptr, p.smoothing ? &m.topics : nullptr);
  if (!problems.empty()) {
    throw FormatError("model", 0, "invalid parameters: " + problems.front());
  }
  return m;
}

void save_model(const std::string& path, const ModelParams& params,
                const SmoothedTopicState* topics) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_model(out, params, topics);
  if (!out) throw std::runtime_error("write failed: " + path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_model(in);
}

}  // namespace mlpa
