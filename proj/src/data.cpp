#include "mlpa/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mlpa/errors.hpp"
#include "mlpa/random.hpp"

namespace mlpa {

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    if (!index_.emplace(terms_[k], k).second) {
      throw std::invalid_argument("duplicate vocabulary term '" + terms_[k] + "'");
    }
  }
}

std::optional<std::size_t> Vocabulary::index_of(const std::string& term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary read_vocabulary(std::istream& in, const std::string& source) {
  std::vector<std::string> terms;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw FormatError(source, lineno, "empty term");
    terms.push_back(line);
  }
  try {
    return Vocabulary(std::move(terms));
  } catch (const std::invalid_argument& e) {
    throw FormatError(source, 0, e.what());
  }
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_vocabulary(in, path);
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

template <typename Int>
bool parse_int(const std::string& s, Int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

// Parses "#<tag> v1 A=<int> B=<int> ..." into the requested keys.
std::map<std::string, std::size_t> parse_header(const std::string& line,
                                                const std::string& tag,
                                                const std::vector<std::string>& keys,
                                                const std::string& source) {
  const auto toks = split_ws(line);
  if (toks.size() != keys.size() + 2 || toks[0] != "#" + tag || toks[1] != "v1") {
    std::string expected = "#" + tag + " v1";
    for (const auto& k : keys) expected += " " + k + "=<int>";
    throw FormatError(source, 1, "expected header '" + expected + "'");
  }
  std::map<std::string, std::size_t> out;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const auto& tok = toks[k + 2];
    const auto eq = tok.find('=');
    std::size_t value = 0;
    if (eq == std::string::npos || tok.substr(0, eq) != keys[k] ||
        !parse_int(tok.substr(eq + 1), value)) {
      throw FormatError(source, 1, "bad header field '" + tok + "'");
    }
    out[keys[k]] = value;
  }
  return out;
}

struct LabeledLine {
  std::string id;
  std::vector<std::int8_t> labels;
  std::vector<std::string> payload;
};

LabeledLine parse_labeled_line(const std::string& line, std::size_t classes,
                               const std::string& source, std::size_t lineno) {
  const auto bar1 = line.find('|');
  const auto bar2 = bar1 == std::string::npos ? bar1 : line.find('|', bar1 + 1);
  if (bar2 == std::string::npos || line.find('|', bar2 + 1) != std::string::npos) {
    throw FormatError(source, lineno, "expected '<doc_id> | <labels> | <items>'");
  }
  LabeledLine out;
  const auto id_toks = split_ws(line.substr(0, bar1));
  if (id_toks.size() != 1) throw FormatError(source, lineno, "bad document id");
  out.id = id_toks[0];
  const auto label_toks = split_ws(line.substr(bar1 + 1, bar2 - bar1 - 1));
  if (label_toks.size() != classes) {
    throw FormatError(source, lineno, "expected " + std::to_string(classes) + " labels");
  }
  for (const auto& tok : label_toks) {
    int v = 0;
    if (!parse_int(tok, v) || (v != 0 && v != 1 && v != -1)) {
      throw FormatError(source, lineno, "label '" + tok + "' not in {0,1,-1}");
    }
    out.labels.push_back(static_cast<std::int8_t>(v));
  }
  out.payload = split_ws(line.substr(bar2 + 1));
  return out;
}

}  // namespace

LoadedCorpus read_corpus(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(source, 1, "empty file");
  const auto header = parse_header(line, "mlc", {"D", "V", "C"}, source);
  LoadedCorpus out;
  out.dims.docs = header.at("D");
  out.dims.vocab = header.at("V");
  out.dims.classes = header.at("C");
  if (out.dims.vocab == 0 || out.dims.classes == 0) {
    throw FormatError(source, 1, "V and C must be positive");
  }
  std::set<std::string> ids;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto parsed = parse_labeled_line(line, out.dims.classes, source, lineno);
    if (!ids.insert(parsed.id).second) {
      throw FormatError(source, lineno, "duplicate doc_id '" + parsed.id + "'");
    }
    Document doc;
    doc.id = parsed.id;
    doc.true_labels = std::move(parsed.labels);
    for (const auto& tok : parsed.payload) {
      const auto colon = tok.find(':');
      WordCount wc;
      if (colon == std::string::npos || !parse_int(tok.substr(0, colon), wc.index) ||
          !parse_int(tok.substr(colon + 1), wc.count)) {
        throw FormatError(source, lineno, "bad word entry '" + tok + "'");
      }
      if (wc.index >= out.dims.vocab) {
        throw FormatError(source, lineno, "word index " + std::to_string(wc.index) +
                                              " out of range (V=" +
                                              std::to_string(out.dims.vocab) + ")");
      }
      if (wc.count < 1) throw FormatError(source, lineno, "word count must be >= 1");
      doc.words.push_back(wc);
    }
    if (doc.words.empty()) throw FormatError(source, lineno, "document has no words");
    std::sort(doc.words.begin(), doc.words.end(),
              [](const WordCount& a, const WordCount& b) { return a.index < b.index; });
    for (std::size_t w = 1; w < doc.words.size(); ++w) {
      if (doc.words[w].index == doc.words[w - 1].index) {
        throw FormatError(source, lineno, "word index repeated within a document");
      }
    }
    out.docs.push_back(std::move(doc));
  }
  if (out.docs.size() != out.dims.docs) {
    throw FormatError(source, 0, "header says D=" + std::to_string(out.dims.docs) +
                                     " but found " + std::to_string(out.docs.size()) +
                                     " documents");
  }
  return out;
}

void write_corpus(std::ostream& out, const Corpus& corpus, std::size_t vocab) {
  const std::size_t C = corpus.empty() ? 0 : corpus.front().num_classes();
  out << "#mlc v1 D=" << corpus.size() << " V=" << vocab << " C=" << C << '\n';
  for (const auto& doc : corpus) {
    out << doc.id << " |";
    for (auto l : doc.true_labels) out << ' ' << static_cast<int>(l);
    out << " |";
    for (const auto& w : doc.words) out << ' ' << w.index << ':' << w.count;
    out << '\n';
  }
}

void read_crowd(std::istream& in, LoadedCorpus& corpus, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(source, 1, "empty file");
  const auto header = parse_header(line, "crowd", {"K", "C"}, source);
  const std::size_t K = header.at("K");
  const std::size_t C = header.at("C");
  if (C != corpus.dims.classes) {
    throw FormatError(source, 1, "C=" + std::to_string(C) +
                                     " does not match the corpus (C=" +
                                     std::to_string(corpus.dims.classes) + ")");
  }
  if (K == 0) throw FormatError(source, 1, "K must be positive");
  std::map<std::string, std::size_t> by_id;
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) by_id[corpus.docs[d].id] = d;
  for (auto& doc : corpus.docs) doc.crowd_labels.assign(K * C, kUnknownLabel);

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto toks = split_ws(line);
    std::size_t k = 0, i = 0;
    int y = 0;
    if (toks.size() != 4 || !parse_int(toks[1], k) || !parse_int(toks[2], i) ||
        !parse_int(toks[3], y)) {
      throw FormatError(source, lineno,
                        "expected '<doc_id> <annotator_idx> <class_idx> <0|1>'");
    }
    auto it = by_id.find(toks[0]);
    if (it == by_id.end()) {
      throw FormatError(source, lineno, "unknown doc_id '" + toks[0] + "'");
    }
    if (k >= K) throw FormatError(source, lineno, "annotator index out of range");
    if (i >= C) throw FormatError(source, lineno, "class index out of range");
    if (y != 0 && y != 1) throw FormatError(source, lineno, "judgment must be 0 or 1");
    auto& slot = corpus.docs[it->second].crowd_labels[k * C + i];
    if (slot != kUnknownLabel) throw FormatError(source, lineno, "duplicate judgment");
    slot = static_cast<std::int8_t>(y);
  }
  corpus.dims.annotators = K;
}

void write_crowd(std::ostream& out, const Corpus& corpus, std::size_t annotators) {
  const std::size_t C = corpus.empty() ? 0 : corpus.front().num_classes();
  out << "#crowd v1 K=" << annotators << " C=" << C << '\n';
  for (const auto& doc : corpus) {
    if (doc.crowd_labels.empty()) continue;
    for (std::size_t k = 0; k < annotators; ++k) {
      for (std::size_t i = 0; i < C; ++i) {
        const auto y = doc.crowd_label(k, i);
        if (y == kUnknownLabel) continue;
        out << doc.id << ' ' << k << ' ' << i << ' ' << static_cast<int>(y) << '\n';
      }
    }
  }
}

LoadedCorpus load_corpus(const std::string& corpus_path,
                         const std::optional<std::string>& crowd_path) {
  std::ifstream in(corpus_path);
  if (!in) throw std::runtime_error("cannot open " + corpus_path);
  LoadedCorpus corpus = read_corpus(in, corpus_path);
  if (crowd_path) {
    std::ifstream cin(*crowd_path);
    if (!cin) throw std::runtime_error("cannot open " + *crowd_path);
    read_crowd(cin, corpus, *crowd_path);
  }
  return corpus;
}

std::vector<RealInstance> read_real_corpus(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(source, 1, "empty file");
  const auto header = parse_header(line, "mlr", {"D", "F", "C"}, source);
  const std::size_t F = header.at("F");
  const std::size_t C = header.at("C");
  std::vector<RealInstance> out;
  std::set<std::string> ids;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto parsed = parse_labeled_line(line, C, source, lineno);
    if (!ids.insert(parsed.id).second) {
      throw FormatError(source, lineno, "duplicate doc_id '" + parsed.id + "'");
    }
    if (parsed.payload.size() != F) {
      throw FormatError(source, lineno, "expected " + std::to_string(F) + " features");
    }
    RealInstance inst{parsed.id, std::move(parsed.labels), {}};
    for (const auto& tok : parsed.payload) {
      double v = 0.0;
      if (!parse_double(tok, v)) throw FormatError(source, lineno, "bad feature '" + tok + "'");
      inst.features.push_back(v);
    }
    out.push_back(std::move(inst));
  }
  if (out.size() != header.at("D")) {
    throw FormatError(source, 0, "document count does not match header");
  }
  return out;
}

void write_real_corpus(std::ostream& out, const std::vector<RealInstance>& data) {
  const std::size_t F = data.empty() ? 0 : data.front().features.size();
  const std::size_t C = data.empty() ? 0 : data.front().labels.size();
  out << "#mlr v1 D=" << data.size() << " F=" << F << " C=" << C << '\n';
  char buf[32];
  for (const auto& inst : data) {
    out << inst.id << " |";
    for (auto l : inst.labels) out << ' ' << static_cast<int>(l);
    out << " |";
    for (double f : inst.features) {
      std::snprintf(buf, sizeof buf, "%.17g", f);
      out << ' ' << buf;
    }
    out << '\n';
  }
}

namespace {

struct WeightedPoints {
  std::vector<double> value;  // sorted distinct values
  std::vector<double> weight;
};

WeightedPoints distinct_points(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  WeightedPoints pts;
  for (double v : sorted) {
    if (!pts.value.empty() && pts.value.back() == v) {
      pts.weight.back() += 1.0;
    } else {
      pts.value.push_back(v);
      pts.weight.push_back(1.0);
    }
  }
  return pts;
}

std::size_t nearest_sorted(double x, const std::vector<double>& centers) {
  auto it = std::lower_bound(centers.begin(), centers.end(), x);
  if (it == centers.end()) return centers.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - centers.begin());
  if (hi == 0) return 0;
  const double dlo = x - centers[hi - 1];
  const double dhi = centers[hi] - x;
  return dhi < dlo ? hi : hi - 1;
}

}  // namespace

DiscretizerFit fit_discretizer(std::span<const double> values, std::size_t vocab,
                               std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("fit_discretizer: no values");
  if (vocab < 1) throw std::invalid_argument("fit_discretizer: V must be >= 1");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("fit_discretizer: non-finite value");
  }
  DiscretizerFit fit;
  fit.discretizer.seed = seed;
  const WeightedPoints pts = distinct_points(values);
  const std::size_t n = pts.value.size();
  if (vocab >= n) {
    if (vocab > n) {
      fit.warnings.push_back("requested V=" + std::to_string(vocab) + " but only " +
                             std::to_string(n) + " distinct values; using V=" +
                             std::to_string(n));
    }
    fit.discretizer.centers = pts.value;
    fit.objective_trace.push_back(0.0);
    return fit;
  }

  // k-means++ seeding on the weighted distinct values.
  Rng rng(seed);
  std::vector<double> centers;
  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> chosen(n, 0);
  {
    std::discrete_distribution<std::size_t> first(pts.weight.begin(), pts.weight.end());
    const std::size_t c = first(rng);
    centers.push_back(pts.value[c]);
    chosen[c] = 1;
  }
  while (centers.size() < vocab) {
    std::vector<double> score(n);
    for (std::size_t p = 0; p < n; ++p) {
      const double d = pts.value[p] - centers.back();
      dist2[p] = std::min(dist2[p], d * d);
      score[p] = chosen[p] ? 0.0 : pts.weight[p] * dist2[p];
    }
    std::discrete_distribution<std::size_t> next(score.begin(), score.end());
    const std::size_t c = next(rng);
    centers.push_back(pts.value[c]);
    chosen[c] = 1;
  }
  std::sort(centers.begin(), centers.end());

  std::vector<std::size_t> assign(n);
  std::vector<double> sum(vocab), mass(vocab);
  for (int iter = 0; iter < kKMeansMaxIters; ++iter) {
    for (std::size_t p = 0; p < n; ++p) assign[p] = nearest_sorted(pts.value[p], centers);

    // Re-seed empty clusters at the point farthest from its center.
    std::fill(mass.begin(), mass.end(), 0.0);
    for (std::size_t p = 0; p < n; ++p) mass[assign[p]] += pts.weight[p];
    for (std::size_t c = 0; c < vocab; ++c) {
      if (mass[c] > 0.0) continue;
      std::size_t far = 0;
      double best = -1.0;
      for (std::size_t p = 0; p < n; ++p) {
        const double d = std::abs(pts.value[p] - centers[assign[p]]);
        if (mass[assign[p]] > pts.weight[p] && d > best) {
          best = d;
          far = p;
        }
      }
      mass[assign[far]] -= pts.weight[far];
      centers[c] = pts.value[far];
      assign[far] = c;
      mass[c] = pts.weight[far];
    }

    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t p = 0; p < n; ++p) sum[assign[p]] += pts.weight[p] * pts.value[p];
    double movement = 0.0;
    std::vector<double> updated(vocab);
    for (std::size_t c = 0; c < vocab; ++c) {
      updated[c] = sum[c] / mass[c];
      movement = std::max(movement, std::abs(updated[c] - centers[c]));
    }
    double sse = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double d = pts.value[p] - updated[assign[p]];
      sse += pts.weight[p] * d * d;
    }
    fit.objective_trace.push_back(sse);
    centers = std::move(updated);
    std::sort(centers.begin(), centers.end());
    fit.iterations = iter + 1;
    if (movement < kKMeansTol) break;
  }
  centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
  if (centers.size() < vocab) {
    fit.warnings.push_back("k-means produced coincident centers; V reduced to " +
                           std::to_string(centers.size()));
  }
  fit.discretizer.centers = std::move(centers);
  return fit;
}

std::size_t nearest_center(double value, const Discretizer& disc) {
  if (disc.centers.empty()) throw std::invalid_argument("discretizer has no centers");
  return nearest_sorted(value, disc.centers);
}

std::vector<WordCount> discretize_instance(std::span<const double> features,
                                           const Discretizer& disc) {
  std::map<std::uint32_t, std::uint32_t> counts;
  for (double f : features) ++counts[static_cast<std::uint32_t>(nearest_center(f, disc))];
  std::vector<WordCount> words;
  words.reserve(counts.size());
  for (const auto& [index, count] : counts) words.push_back({index, count});
  return words;
}

void write_discretizer(std::ostream& out, const Discretizer& disc) {
  out << "#disc v1 V=" << disc.centers.size() << '\n';
  char buf[32];
  for (double c : disc.centers) {
    std::snprintf(buf, sizeof buf, "%.17g", c);
    out << buf << '\n';
  }
}

Discretizer read_discretizer(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(source, 1, "empty file");
  const auto header = parse_header(line, "disc", {"V"}, source);
  Discretizer disc;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto toks = split_ws(line);
    double v = 0.0;
    if (toks.size() != 1 || !parse_double(toks[0], v)) {
      throw FormatError(source, lineno, "expected one center per line");
    }
    if (!disc.centers.empty() && v <= disc.centers.back()) {
      throw FormatError(source, lineno, "centers must be strictly increasing");
    }
    disc.centers.push_back(v);
  }
  if (disc.centers.size() != header.at("V") || disc.centers.empty()) {
    throw FormatError(source, 0, "center count does not match header");
  }
  return disc;
}

CorpusSplit split_corpus(const Corpus& corpus, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split fraction must lie in (0,1)");
  }
  if (corpus.size() < 2) {
    throw std::invalid_argument("split needs at least two documents");
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t D = corpus.size();
  std::size_t n_train = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(D)));
  n_train = std::clamp<std::size_t>(n_train, 1, D - 1);
  CorpusSplit split;
  for (std::size_t k = 0; k < D; ++k) {
    (k < n_train ? split.train : split.test).push_back(corpus[order[k]]);
  }
  return split;
}

}  // namespace mlpa
