#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlpa {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Digamma function psi(x) for x > 0.
///
/// Shifts x upward with psi(x) = psi(x + 1) - 1/x until x >= 6, then sums
/// eight terms of the asymptotic expansion.
double digamma(double x);

/// Trigamma function psi'(x) for x > 0, same scheme as digamma().
double trigamma(double x);

/// log(sum(exp(v))). Entries equal to -inf are absorbed; the result is -inf
/// only when every entry is. Throws std::invalid_argument on an empty input.
double log_sum_exp(std::span<const double> v);

/// E[log theta_t] under Dir(gamma): psi(gamma_t) - psi(sum gamma).
std::vector<double> dirichlet_expected_log(std::span<const double> gamma);
void dirichlet_expected_log(std::span<const double> gamma,
                            std::span<double> out);

// Maximization of
//
//   f(a) = scale * (lgamma(sum a) - sum_r lgamma(a_r)) + sum_r a_r * stats_r
//
// over a > 0. This is the Dirichlet-parameter part of the bound: for the
// per-document topic priors `stats` holds sum_d E[log theta^d] and `scale`
// is the document count; for the topic-word prior `stats` holds E[log beta_t]
// and `scale` is 1.
struct DirichletNewtonProblem {
  std::vector<double> current;
  std::vector<double> stats;
  int scale = 1;

  void validate() const;
};

double dirichlet_objective(std::span<const double> point,
                           std::span<const double> stats, int scale);
std::vector<double> dirichlet_gradient(std::span<const double> point,
                                       std::span<const double> stats,
                                       int scale);

struct NewtonStepResult {
  std::vector<double> values;
  bool stalled = false;
  // max_r |g_r - c| at the input point.
  double residual = 0.0;
};

inline constexpr double kNewtonPositivityFloor = 1e-10;
inline constexpr int kNewtonMaxHalvings = 30;
// Relative amount by which a step may lower the objective and still count as
// "not decreasing". Close to the optimum the objective cannot resolve the
// gain of a full step and rounding alone would reject it.
inline constexpr double kNewtonObjectiveSlack = 1e-12;

/// One damped Newton step exploiting the diagonal-plus-rank-one Hessian.
/// The step is halved until every component stays above the positivity
/// floor and the objective does not decrease (up to kNewtonObjectiveSlack
/// relative). After kNewtonMaxHalvings failed attempts the input is
/// returned with `stalled` set.
NewtonStepResult newton_dirichlet_step(const DirichletNewtonProblem& problem);

struct NewtonSolveResult {
  std::vector<double> values;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
};

/// Repeats newton_dirichlet_step until max_r |g_r - c| < tol, a stall, or
/// max_iters steps.
NewtonSolveResult newton_dirichlet_solve(DirichletNewtonProblem problem,
                                         int max_iters = 50,
                                         double tol = 1e-8);

}  // namespace mlpa
