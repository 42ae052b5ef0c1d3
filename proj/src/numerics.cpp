#include "mlpa/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mlpa {

namespace {

constexpr double kAsymptoticCutoff = 6.0;

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || std::isnan(x)) {
    throw DomainError(std::string(what) + ": argument must be > 0, got " +
                      std::to_string(x));
  }
}

}  // namespace

double digamma(double x) {
  require_positive(x, "digamma");
  // psi(x) = psi(x + k) - sum_{m<k} 1/(x + m). Small terms are summed first.
  double shift[8];
  int k = 0;
  while (x < kAsymptoticCutoff) {
    shift[k++] = 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 -
                                              inv2 * (691.0 / 32760 -
                                                      inv2 * (1.0 / 12 -
                                                              inv2 * 3617.0 /
                                                                  8160)))))));
  double result = std::log(x) - 0.5 * inv - series;
  while (k > 0) result -= shift[--k];
  return result;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double shift[8];
  int k = 0;
  while (x < kAsymptoticCutoff) {
    shift[k++] = 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // 1/x + 1/(2x^2) + sum_k B_2k / x^(2k+1)
  const double series =
      inv * inv2 *
      (1.0 / 6 -
       inv2 * (1.0 / 30 -
               inv2 * (1.0 / 42 -
                       inv2 * (1.0 / 30 -
                               inv2 * (5.0 / 66 -
                                       inv2 * (691.0 / 2730 -
                                               inv2 * (7.0 / 6 -
                                                       inv2 * 3617.0 /
                                                           510)))))));
  double result = inv + 0.5 * inv2 + series;
  while (k > 0) result += shift[--k];
  return result;
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  const double top = *std::max_element(v.begin(), v.end());
  if (top == -std::numeric_limits<double>::infinity()) return top;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - top);
  return top + std::log(sum);
}

void dirichlet_expected_log(std::span<const double> gamma,
                            std::span<double> out) {
  double total = 0.0;
  for (double g : gamma) {
    require_positive(g, "dirichlet_expected_log");
    total += g;
  }
  const double psi_total = digamma(total);
  for (std::size_t t = 0; t < gamma.size(); ++t) {
    out[t] = digamma(gamma[t]) - psi_total;
  }
}

std::vector<double> dirichlet_expected_log(std::span<const double> gamma) {
  std::vector<double> out(gamma.size());
  dirichlet_expected_log(gamma, out);
  return out;
}

void DirichletNewtonProblem::validate() const {
  if (current.empty()) {
    throw std::invalid_argument("DirichletNewtonProblem: empty point");
  }
  if (stats.size() != current.size()) {
    throw std::invalid_argument(
        "DirichletNewtonProblem: stats length differs from point length");
  }
  if (scale < 1) {
    throw std::invalid_argument("DirichletNewtonProblem: scale must be >= 1");
  }
  for (double a : current) {
    if (!(a > 0.0)) {
      throw DomainError("DirichletNewtonProblem: non-positive component");
    }
  }
}

double dirichlet_objective(std::span<const double> point,
                           std::span<const double> stats, int scale) {
  double total = 0.0;
  double lg = 0.0;
  double linear = 0.0;
  for (std::size_t r = 0; r < point.size(); ++r) {
    total += point[r];
    lg += std::lgamma(point[r]);
    linear += point[r] * stats[r];
  }
  return scale * (std::lgamma(total) - lg) + linear;
}

std::vector<double> dirichlet_gradient(std::span<const double> point,
                                       std::span<const double> stats,
                                       int scale) {
  const double total = std::accumulate(point.begin(), point.end(), 0.0);
  const double psi_total = digamma(total);
  std::vector<double> g(point.size());
  for (std::size_t r = 0; r < point.size(); ++r) {
    g[r] = scale * (psi_total - digamma(point[r])) + stats[r];
  }
  return g;
}

NewtonStepResult newton_dirichlet_step(const DirichletNewtonProblem& problem) {
  problem.validate();
  const auto& a = problem.current;
  const std::size_t n = a.size();
  const double scale = problem.scale;

  const std::vector<double> g = dirichlet_gradient(a, problem.stats, problem.scale);
  const double total = std::accumulate(a.begin(), a.end(), 0.0);
  const double z = scale * trigamma(total);

  std::vector<double> h(n);
  double g_over_h = 0.0;
  double inv_h = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    h[r] = -scale * trigamma(a[r]);
    g_over_h += g[r] / h[r];
    inv_h += 1.0 / h[r];
  }
  const double c = g_over_h / (1.0 / z + inv_h);

  NewtonStepResult result;
  std::vector<double> step(n);
  for (std::size_t r = 0; r < n; ++r) {
    step[r] = (g[r] - c) / h[r];
    result.residual = std::max(result.residual, std::abs(g[r] - c));
  }

  const double f0 = dirichlet_objective(a, problem.stats, problem.scale);
  const double floor = f0 - kNewtonObjectiveSlack * (1.0 + std::abs(f0));
  std::vector<double> candidate(n);
  double factor = 1.0;
  for (int attempt = 0; attempt <= kNewtonMaxHalvings; ++attempt) {
    bool positive = true;
    for (std::size_t r = 0; r < n; ++r) {
      candidate[r] = a[r] - factor * step[r];
      if (!(candidate[r] > kNewtonPositivityFloor)) positive = false;
    }
    if (positive &&
        dirichlet_objective(candidate, problem.stats, problem.scale) >= floor) {
      result.values = candidate;
      return result;
    }
    factor *= 0.5;
  }
  result.values = a;
  result.stalled = true;
  return result;
}

NewtonSolveResult newton_dirichlet_solve(DirichletNewtonProblem problem,
                                         int max_iters, double tol) {
  NewtonSolveResult out;
  for (int it = 0; it < max_iters; ++it) {
    NewtonStepResult step = newton_dirichlet_step(problem);
    if (step.residual < tol) {
      out.converged = true;
      break;
    }
    if (step.stalled) {
      out.stalled = true;
      break;
    }
    problem.current = std::move(step.values);
    ++out.iterations;
  }
  out.values = std::move(problem.current);
  return out;
}

}  // namespace mlpa
