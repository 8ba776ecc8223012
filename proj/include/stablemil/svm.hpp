#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stablemil/canonical_json.hpp"
#include "stablemil/kernel.hpp"

namespace stablemil {

struct SmoParams {
  double C = 1.0;
  double tol = 1e-3;
  /// Hard iteration cap; 0 picks max(10'000'000, 100 * m).
  std::size_t max_iter = 0;
  /// Record the dual objective after every iteration (O(m) per step).
  bool record_trace = false;
};

struct SVMModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> alphas_times_labels;
  double bias = 0.0;
  KernelSpec kernel;
  double C = 1.0;
  /// Collapsed primal weights, filled for the linear kernel only.
  std::vector<double> linear_weights;
  bool converged = true;

  std::size_t dim() const noexcept;
  /// Signed decision value; predicted label is (decision >= 0).
  double decision(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return decision(x) >= 0.0 ? 1 : 0; }

  Json to_json() const;
  static SVMModel from_json(const Json& j);
};

/// Solution of the box-constrained SVM dual for a Gram matrix.
struct DualSolution {
  std::vector<double> alphas;
  double bias = 0.0;
  double dual_objective = 0.0;  // sum(alpha) - 1/2 alpha' Q alpha
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
  bool converged = true;
};

/// SMO with maximal-violating-pair working set selection on a dense
/// row-major m x m Gram matrix. `labels` are +1 / -1.
DualSolution smo_solve(std::span<const double> gram, std::span<const int> labels, const SmoParams& params);

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double svm_dual_objective(std::span<const double> gram, std::span<const int> labels,
                          std::span<const double> alphas);

/// Trains a kernel SVM. `labels` are +1 / -1. Throws kSingleClass if only one
/// class is present. A run that hits the iteration cap returns its last
/// iterate with converged == false.
SVMModel smo_train(const std::vector<std::vector<double>>& points, std::span<const int> labels,
                   const KernelSpec& kernel, const SmoParams& params = {});

double svm_decision(const SVMModel& model, std::span<const double> x);

std::vector<double> gram_matrix(const std::vector<std::vector<double>>& points, const KernelSpec& kernel);

/// Median heuristic: 1 / median of nonzero pairwise squared distances
/// (1.0 when every pair coincides).
double median_gamma(const std::vector<std::vector<double>>& points);

struct GridSearchConfig {
  std::vector<double> C_values{0.1, 1.0, 10.0, 100.0};
  /// gamma = median_gamma * 2^k for each exponent; ignored for linear kernels.
  std::vector<int> gamma_exponents{-2, -1, 0, 1, 2};
  std::size_t folds = 5;
  double tol = 1e-3;
};

struct GridSearchResult {
  SVMModel model;
  double best_C = 1.0;
  double best_gamma = 0.0;
  double cv_accuracy = 0.0;
};

/// Seeded stratified k-fold grid search over (C, gamma), then a final fit on
/// all points with the best pair. Ties go to the earliest grid entry.
GridSearchResult grid_search_train(const std::vector<std::vector<double>>& points, std::span<const int> labels,
                                   KernelKind kind, const GridSearchConfig& grid, std::uint64_t seed);

}  // namespace stablemil
