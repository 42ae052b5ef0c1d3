#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mlpa/matrix.hpp"
#include "mlpa/model.hpp"
#include "mlpa/oracle.hpp"
#include "mlpa/random.hpp"

namespace mlpa::testing {

std::string data_path(const std::string& name);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

std::string slurp(const std::string& path);

// Token-level E-step written straight from the update equations, one loop
// per symbol, with no sharing of code with the library. Rows of delta and
// phi are per token (n = 0..N-1), not per unique word.
struct LiteralState {
  Matrix<double> delta;        // N x C
  Matrix<double> phi;          // N x T
  std::vector<double> Delta;   // C
  Matrix<double> gamma;        // 2C x T, row 2i+j
};

enum class Digamma { boost, library };

/// Runs `cycles` rounds of gamma -> phi -> delta -> Delta and a closing
/// gamma update, starting from uniform delta/phi and `initial_Delta`.
/// Unsmoothed parameters only.
LiteralState literal_estep(const Document& doc, const ModelParams& params,
                           LabelEvidence evidence,
                           const std::vector<double>& initial_Delta, int cycles,
                           Digamma which = Digamma::boost);

/// Random instance within the oracle's enumeration bound.
oracle::TinyInstance random_tiny_instance(Rng& rng);

/// Maximizes scale*(lgamma(sum a) - sum lgamma(a)) + a.stats by gradient
/// ascent on log a with backtracking, using boost's digamma.
std::vector<double> gradient_ascent_dirichlet(const std::vector<double>& stats,
                                              int scale, std::vector<double> start);

/// Central difference of f along coordinate k.
double central_difference(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x, std::size_t k, double h);

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace mlpa::testing
