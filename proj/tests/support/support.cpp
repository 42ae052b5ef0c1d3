#include "support.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <stdlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mlpa/numerics.hpp"

namespace mlpa::testing {

std::string data_path(const std::string& name) {
  return std::string(MLPA_TEST_DATA_DIR) + "/" + name;
}

TempDir::TempDir() {
  std::string pattern =
      (std::filesystem::temp_directory_path() / "mlpa-test-XXXXXX").string();
  if (mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

double psi(double x, Digamma which) {
  return which == Digamma::boost ? boost::math::digamma(x) : mlpa::digamma(x);
}

double elog_theta(const Matrix<double>& gamma, std::size_t row, std::size_t t,
                  Digamma which) {
  double sum = 0.0;
  for (std::size_t s = 0; s < gamma.cols(); ++s) sum += gamma(row, s);
  return psi(gamma(row, t), which) - psi(sum, which);
}

void normalize_exp(std::vector<double>& logs) {
  const double top = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double& x : logs) {
    x = std::exp(x - top);
    sum += x;
  }
  for (double& x : logs) x /= sum;
}

}  // namespace

LiteralState literal_estep(const Document& doc, const ModelParams& params,
                           LabelEvidence evidence,
                           const std::vector<double>& initial_Delta, int cycles,
                           Digamma which) {
  const std::size_t C = params.classes;
  const std::size_t T = params.topics;
  std::vector<std::size_t> w;
  for (const auto& wc : doc.words) {
    for (std::uint32_t c = 0; c < wc.count; ++c) w.push_back(wc.index);
  }
  const std::size_t N = w.size();

  LiteralState s;
  s.delta = Matrix<double>(N, C, 1.0 / C);
  s.phi = Matrix<double>(N, T, 1.0 / T);
  s.Delta = initial_Delta;
  s.gamma = Matrix<double>(2 * C, T);

  auto update_gamma = [&] {
    for (std::size_t i = 0; i < C; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double weight = j == 1 ? s.Delta[i] : 1.0 - s.Delta[i];
        for (std::size_t t = 0; t < T; ++t) {
          double sum = 0.0;
          for (std::size_t n = 0; n < N; ++n) sum += s.delta(n, i) * s.phi(n, t);
          s.gamma(2 * i + j, t) = params.theta_prior(2 * i + j, t) + weight * sum;
        }
      }
    }
  };

  for (int cycle = 0; cycle < cycles; ++cycle) {
    update_gamma();

    // phi_nt propto beta_{t, w_n} exp(sum_i delta_ni [Delta_i E log theta_i1t
    //                                  + (1 - Delta_i) E log theta_i0t])
    for (std::size_t n = 0; n < N; ++n) {
      std::vector<double> logs(T);
      for (std::size_t t = 0; t < T; ++t) {
        double a = std::log(params.topic_word(t, w[n]));
        for (std::size_t i = 0; i < C; ++i) {
          a += s.delta(n, i) * (s.Delta[i] * elog_theta(s.gamma, 2 * i + 1, t, which) +
                                (1.0 - s.Delta[i]) * elog_theta(s.gamma, 2 * i, t, which));
        }
        logs[t] = a;
      }
      normalize_exp(logs);
      for (std::size_t t = 0; t < T; ++t) s.phi(n, t) = logs[t];
    }

    // delta_ni propto (1/C) exp(sum_t phi_nt [same bracket])
    for (std::size_t n = 0; n < N; ++n) {
      std::vector<double> logs(C);
      for (std::size_t i = 0; i < C; ++i) {
        double a = std::log(1.0 / C);
        for (std::size_t t = 0; t < T; ++t) {
          a += s.phi(n, t) * (s.Delta[i] * elog_theta(s.gamma, 2 * i + 1, t, which) +
                              (1.0 - s.Delta[i]) * elog_theta(s.gamma, 2 * i, t, which));
        }
        logs[i] = a;
      }
      normalize_exp(logs);
      for (std::size_t i = 0; i < C; ++i) s.delta(n, i) = logs[i];
    }

    // log Delta_i     = log xi_i + sum_j [y=1] log rho_j + [y=0] log(1-rho_j)
    //                   + sum_n sum_t delta_ni phi_nt E log theta_i1t
    // log (1-Delta_i) = log(1-xi_i) + sum_j [y=0] log rho_j + [y=1] log(1-rho_j)
    //                   + sum_n sum_t delta_ni phi_nt E log theta_i0t
    if (evidence != LabelEvidence::observed) {
      for (std::size_t i = 0; i < C; ++i) {
        double on = std::log(params.class_prior[i]);
        double off = std::log(1.0 - params.class_prior[i]);
        if (evidence == LabelEvidence::crowd) {
          for (std::size_t k = 0; k < params.annotators(); ++k) {
            const auto y = doc.crowd_label(k, i);
            const double rho = params.annotator_quality[k];
            if (y == 1) {
              on += std::log(rho);
              off += std::log(1.0 - rho);
            } else if (y == 0) {
              on += std::log(1.0 - rho);
              off += std::log(rho);
            }
          }
        }
        for (std::size_t n = 0; n < N; ++n) {
          for (std::size_t t = 0; t < T; ++t) {
            on += s.delta(n, i) * s.phi(n, t) * elog_theta(s.gamma, 2 * i + 1, t, which);
            off += s.delta(n, i) * s.phi(n, t) * elog_theta(s.gamma, 2 * i, t, which);
          }
        }
        const double p = 1.0 / (1.0 + std::exp(off - on));
        s.Delta[i] = std::clamp(p, 1e-9, 1.0 - 1e-9);
      }
    }
  }
  update_gamma();
  return s;
}

oracle::TinyInstance random_tiny_instance(Rng& rng) {
  std::uniform_int_distribution<int> one_two(1, 2);
  std::uniform_int_distribution<int> zero_two(0, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t C = one_two(rng);
  const std::size_t T = one_two(rng);
  const std::size_t V = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
  const bool smoothing = unit(rng) < 0.3;
  const int evidence_kind = zero_two(rng);
  const LabelEvidence evidence = evidence_kind == 0   ? LabelEvidence::observed
                                 : evidence_kind == 1 ? LabelEvidence::crowd
                                                      : LabelEvidence::none;
  const std::size_t K = evidence == LabelEvidence::crowd ? one_two(rng) : 0;

  // Keep 2^C C^N T^N within the enumeration bound; with C, T <= 2 and
  // N <= 4 the worst case is 4 * 256 = 1024.
  std::size_t N = std::uniform_int_distribution<std::size_t>(1, 4)(rng);

  oracle::TinyInstance inst;
  inst.evidence = evidence;
  ModelParams& p = inst.params;
  p.mode = K > 0 ? Mode::crowd : Mode::no_crowd;
  p.smoothing = smoothing;
  p.classes = C;
  p.topics = T;
  p.vocab = V;
  p.theta_prior = Matrix<double>(2 * C, T);
  for (double& a : p.theta_prior.values()) a = 0.3 + 2.7 * unit(rng);
  for (std::size_t i = 0; i < C; ++i) p.class_prior.push_back(0.1 + 0.8 * unit(rng));
  for (std::size_t k = 0; k < K; ++k) p.annotator_quality.push_back(0.1 + 0.85 * unit(rng));
  if (smoothing) {
    p.topic_word_prior = Matrix<double>(T, V);
    for (double& e : p.topic_word_prior.values()) e = 0.3 + 2.7 * unit(rng);
  } else {
    p.topic_word = Matrix<double>(T, V);
    const std::vector<double> flat(V, 1.0);
    for (std::size_t t = 0; t < T; ++t) {
      auto row = sample_dirichlet(flat, rng);
      // Keep every entry away from zero so log beta stays finite.
      double sum = 0.0;
      for (double& b : row) sum += (b += 0.05);
      for (std::size_t v = 0; v < V; ++v) p.topic_word(t, v) = row[v] / sum;
    }
  }

  Document& doc = inst.doc;
  doc.id = "tiny";
  std::uniform_int_distribution<std::uint32_t> pick_word(0, static_cast<std::uint32_t>(V - 1));
  std::vector<std::uint32_t> counts(V, 0);
  for (std::size_t n = 0; n < N; ++n) ++counts[pick_word(rng)];
  for (std::uint32_t v = 0; v < V; ++v) {
    if (counts[v] > 0) doc.words.push_back({v, counts[v]});
  }
  doc.true_labels.assign(C, kUnknownLabel);
  if (evidence == LabelEvidence::observed) {
    for (auto& l : doc.true_labels) l = unit(rng) < 0.5 ? 1 : 0;
  }
  doc.crowd_labels.assign(K * C, kUnknownLabel);
  for (auto& y : doc.crowd_labels) y = static_cast<std::int8_t>(zero_two(rng) - 1);
  return inst;
}

std::vector<double> gradient_ascent_dirichlet(const std::vector<double>& stats,
                                              int scale, std::vector<double> start) {
  const std::size_t n = start.size();
  auto objective = [&](const std::vector<double>& a) {
    double sum = 0.0, value = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      sum += a[r];
      value += -scale * std::lgamma(a[r]) + a[r] * stats[r];
    }
    return value + scale * std::lgamma(sum);
  };
  std::vector<double> b(n);
  for (std::size_t r = 0; r < n; ++r) b[r] = std::log(start[r]);
  auto point = [&](const std::vector<double>& logs) {
    std::vector<double> a(n);
    for (std::size_t r = 0; r < n; ++r) a[r] = std::exp(logs[r]);
    return a;
  };
  double step = 1e-2;
  for (int iter = 0; iter < 2000000; ++iter) {
    const auto a = point(b);
    double sum = 0.0;
    for (double x : a) sum += x;
    std::vector<double> grad(n);
    double norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double g = scale * (boost::math::digamma(sum) - boost::math::digamma(a[r])) + stats[r];
      grad[r] = a[r] * g;  // chain rule through a = exp(b)
      norm = std::max(norm, std::abs(g));
    }
    if (norm < 1e-11) break;
    const double f0 = objective(a);
    for (;;) {
      std::vector<double> trial(n);
      for (std::size_t r = 0; r < n; ++r) trial[r] = b[r] + step * grad[r];
      if (objective(point(trial)) >= f0) {
        b = trial;
        step *= 1.5;
        break;
      }
      step *= 0.5;
      if (step < 1e-300) return a;
    }
  }
  return point(b);
}

double central_difference(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x, std::size_t k, double h) {
  const double x0 = x[k];
  x[k] = x0 + h;
  const double up = f(x);
  x[k] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace mlpa::testing
