#include "stablemil/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stablemil/mil_core.hpp"
#include "stablemil/rng.hpp"

namespace stablemil {

namespace {

constexpr double kTau = 1e-12;

void check_labels(std::span<const int> labels) {
  bool pos = false;
  bool neg = false;
  for (int y : labels) {
    if (y == 1)
      pos = true;
    else if (y == -1)
      neg = true;
    else
      throw Error(ErrorCode::kInvalidArgument, "SVM labels must be +1 or -1");
  }
  if (!pos || !neg) throw Error(ErrorCode::kSingleClass, "SVM training needs both classes");
}

}  // namespace

double svm_dual_objective(std::span<const double> gram, std::span<const int> labels,
                          std::span<const double> alphas) {
  const std::size_t m = labels.size();
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    linear += alphas[i];
    if (alphas[i] == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j)
      quad += alphas[i] * alphas[j] * labels[i] * labels[j] * gram[i * m + j];
  }
  return linear - 0.5 * quad;
}

DualSolution smo_solve(std::span<const double> gram, std::span<const int> labels, const SmoParams& params) {
  const std::size_t m = labels.size();
  if (gram.size() != m * m) throw Error(ErrorCode::kDimMismatch, "Gram matrix size does not match labels");
  if (!(params.C > 0.0) || !(params.tol > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "SMO needs C > 0 and tol > 0");
  check_labels(labels);

  const double C = params.C;
  const std::size_t max_iter = params.max_iter ? params.max_iter : std::max<std::size_t>(10'000'000, 100 * m);
  const std::size_t stall_limit = 10 * m;

  auto Q = [&](std::size_t i, std::size_t j) { return labels[i] * labels[j] * gram[i * m + j]; };

  DualSolution sol;
  std::vector<double>& alpha = sol.alphas;
  alpha.assign(m, 0.0);
  // Gradient of f(alpha) = 1/2 alpha' Q alpha - sum(alpha); the dual objective is -f.
  std::vector<double> grad(m, -1.0);
  double f_value = 0.0;
  std::size_t stalled = 0;

  auto in_up = [&](std::size_t t) { return (labels[t] == 1 && alpha[t] < C) || (labels[t] == -1 && alpha[t] > 0.0); };
  auto in_low = [&](std::size_t t) { return (labels[t] == 1 && alpha[t] > 0.0) || (labels[t] == -1 && alpha[t] < C); };

  if (params.record_trace) sol.objective_trace.push_back(0.0);

  std::size_t iter = 0;
  sol.converged = false;
  for (; iter < max_iter; ++iter) {
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    std::size_t i = m;
    std::size_t j = m;
    for (std::size_t t = 0; t < m; ++t) {
      const double v = -labels[t] * grad[t];
      if (in_up(t) && v > g_max) {
        g_max = v;
        i = t;
      }
      if (in_low(t) && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    if (i == m || j == m || g_max - g_min < params.tol) {
      sol.converged = true;
      break;
    }

    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    if (labels[i] != labels[j]) {
      double quad = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_ai;
    const double dj = alpha[j] - old_aj;
    const double df = grad[i] * di + grad[j] * dj +
                      0.5 * (Q(i, i) * di * di + Q(j, j) * dj * dj + 2.0 * Q(i, j) * di * dj);
    f_value += df;
    for (std::size_t t = 0; t < m; ++t) grad[t] += Q(i, t) * di + Q(j, t) * dj;

    stalled = (df < -1e-15 * std::max(1.0, std::abs(f_value))) ? 0 : stalled + 1;
    if (params.record_trace) sol.objective_trace.push_back(svm_dual_objective(gram, labels, alpha));
    if (stalled > stall_limit) break;
  }
  sol.iterations = iter;

  // Bias from free vectors; midpoint of the feasible interval otherwise.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < m; ++t) {
    const double yg = labels[t] * grad[t];
    if (alpha[t] >= C) {
      if (labels[t] == -1)
        ub = std::min(ub, yg);
      else
        lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (labels[t] == 1)
        ub = std::min(ub, yg);
      else
        lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  sol.bias = -rho;
  sol.dual_objective = svm_dual_objective(gram, labels, alpha);
  return sol;
}

std::vector<double> gram_matrix(const std::vector<std::vector<double>>& points, const KernelSpec& kernel) {
  const std::size_t m = points.size();
  std::vector<double> gram(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) gram[i * m + j] = gram[j * m + i] = kernel(points[i], points[j]);
  return gram;
}

namespace {

SVMModel model_from_solution(const std::vector<std::vector<double>>& points, std::span<const int> labels,
                             const KernelSpec& kernel, double C, const DualSolution& sol) {
  SVMModel model;
  model.kernel = kernel;
  model.C = C;
  model.bias = sol.bias;
  model.converged = sol.converged;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (sol.alphas[i] <= 0.0) continue;
    model.support_vectors.push_back(points[i]);
    model.alphas_times_labels.push_back(sol.alphas[i] * labels[i]);
  }
  if (kernel.kind == KernelKind::kLinear) {
    model.linear_weights.assign(points.empty() ? 0 : points.front().size(), 0.0);
    for (std::size_t s = 0; s < model.support_vectors.size(); ++s)
      for (std::size_t k = 0; k < model.linear_weights.size(); ++k)
        model.linear_weights[k] += model.alphas_times_labels[s] * model.support_vectors[s][k];
  }
  return model;
}

}  // namespace

SVMModel smo_train(const std::vector<std::vector<double>>& points, std::span<const int> labels,
                   const KernelSpec& kernel, const SmoParams& params) {
  if (points.size() != labels.size()) throw Error(ErrorCode::kDimMismatch, "points and labels differ in length");
  check_labels(labels);
  for (const auto& p : points) {
    if (p.size() != points.front().size()) throw Error(ErrorCode::kDimMismatch, "ragged SVM training points");
    for (double v : p)
      if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite SVM training feature");
  }
  const auto gram = gram_matrix(points, kernel);
  const auto sol = smo_solve(gram, labels, params);
  return model_from_solution(points, labels, kernel, params.C, sol);
}

std::size_t SVMModel::dim() const noexcept {
  if (!linear_weights.empty()) return linear_weights.size();
  return support_vectors.empty() ? 0 : support_vectors.front().size();
}

double SVMModel::decision(std::span<const double> x) const {
  if (kernel.kind == KernelKind::kLinear && !linear_weights.empty()) return dot(linear_weights, x) + bias;
  double f = bias;
  for (std::size_t s = 0; s < support_vectors.size(); ++s) f += alphas_times_labels[s] * kernel(support_vectors[s], x);
  return f;
}

double svm_decision(const SVMModel& model, std::span<const double> x) {
  if (model.dim() != 0 && x.size() != model.dim())
    throw Error(ErrorCode::kDimMismatch, "decision input has dim " + std::to_string(x.size()) + ", model expects " +
                                             std::to_string(model.dim()));
  return model.decision(x);
}

Json SVMModel::to_json() const {
  Json j = Json::object();
  j["kernel"] = std::string(to_string(kernel.kind));
  j["gamma"] = kernel.gamma;
  j["C"] = C;
  j["bias"] = bias;
  j["converged"] = converged;
  j["alphas_times_labels"] = alphas_times_labels;
  j["support_vectors"] = support_vectors;
  return j;
}

SVMModel SVMModel::from_json(const Json& j) {
  try {
    SVMModel model;
    model.kernel.kind = parse_kernel_kind(j.at("kernel").get<std::string>());
    model.kernel.gamma = j.at("gamma").get<double>();
    model.C = j.at("C").get<double>();
    model.bias = j.at("bias").get<double>();
    model.converged = j.at("converged").get<bool>();
    model.alphas_times_labels = j.at("alphas_times_labels").get<std::vector<double>>();
    model.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    if (model.alphas_times_labels.size() != model.support_vectors.size())
      throw Error(ErrorCode::kParseError, "SVM model coefficient count differs from support vector count");
    if (model.kernel.kind == KernelKind::kLinear && !model.support_vectors.empty()) {
      model.linear_weights.assign(model.support_vectors.front().size(), 0.0);
      for (std::size_t s = 0; s < model.support_vectors.size(); ++s)
        for (std::size_t k = 0; k < model.linear_weights.size(); ++k)
          model.linear_weights[k] += model.alphas_times_labels[s] * model.support_vectors[s][k];
    }
    return model;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("SVM model: ") + e.what());
  }
}

double median_gamma(const std::vector<std::vector<double>>& points) {
  std::vector<double> d2;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double v = squared_distance(points[i], points[j]);
      if (v > 0.0) d2.push_back(v);
    }
  if (d2.empty()) return 1.0;
  const auto mid = d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2);
  std::nth_element(d2.begin(), mid, d2.end());
  double median = *mid;
  if (d2.size() % 2 == 0) median = 0.5 * (median + *std::max_element(d2.begin(), mid));
  return 1.0 / median;
}

GridSearchResult grid_search_train(const std::vector<std::vector<double>>& points, std::span<const int> labels,
                                   KernelKind kind, const GridSearchConfig& grid, std::uint64_t seed) {
  if (points.size() != labels.size()) throw Error(ErrorCode::kDimMismatch, "points and labels differ in length");
  check_labels(labels);
  const std::size_t m = points.size();

  // Stratified fold assignment.
  const std::size_t folds = std::max<std::size_t>(2, std::min(grid.folds, m));
  std::vector<std::size_t> fold_of(m);
  Rng rng(seed);
  for (int cls : {1, -1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < m; ++i)
      if (labels[i] == cls) idx.push_back(i);
    seeded_shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t r = 0; r < idx.size(); ++r) fold_of[idx[r]] = r % folds;
  }

  std::vector<double> gammas;
  if (kind == KernelKind::kLinear) {
    gammas.push_back(0.0);
  } else {
    const double base = median_gamma(points);
    for (int k : grid.gamma_exponents) gammas.push_back(base * std::ldexp(1.0, k));
  }

  // Squared distances are shared across gammas.
  std::vector<double> base_matrix(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j)
      base_matrix[i * m + j] = base_matrix[j * m + i] =
          kind == KernelKind::kLinear ? dot(points[i], points[j]) : squared_distance(points[i], points[j]);

  GridSearchResult best;
  double best_acc = -1.0;
  std::vector<double> gram(m * m);
  for (double gamma : gammas) {
    for (std::size_t t = 0; t < m * m; ++t)
      gram[t] = kind == KernelKind::kLinear ? base_matrix[t] : rbf_from_squared(gamma, base_matrix[t]);
    for (double C : grid.C_values) {
      std::size_t correct = 0;
      for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> tr;
        std::vector<std::size_t> va;
        for (std::size_t i = 0; i < m; ++i) (fold_of[i] == f ? va : tr).push_back(i);
        if (va.empty()) continue;
        std::vector<int> ytr;
        for (auto i : tr) ytr.push_back(labels[i]);
        const bool has_pos = std::count(ytr.begin(), ytr.end(), 1) > 0;
        const bool has_neg = std::count(ytr.begin(), ytr.end(), -1) > 0;
        if (!has_pos || !has_neg) {
          const int only = has_pos ? 1 : -1;
          for (auto i : va) correct += labels[i] == only;
          continue;
        }
        std::vector<double> sub(tr.size() * tr.size());
        for (std::size_t a = 0; a < tr.size(); ++a)
          for (std::size_t b = 0; b < tr.size(); ++b) sub[a * tr.size() + b] = gram[tr[a] * m + tr[b]];
        SmoParams p;
        p.C = C;
        p.tol = grid.tol;
        const auto sol = smo_solve(sub, ytr, p);
        for (auto i : va) {
          double f = sol.bias;
          for (std::size_t a = 0; a < tr.size(); ++a)
            if (sol.alphas[a] > 0.0) f += sol.alphas[a] * ytr[a] * gram[tr[a] * m + i];
          correct += (f >= 0.0 ? 1 : -1) == labels[i];
        }
      }
      const double acc = static_cast<double>(correct) / static_cast<double>(m);
      if (acc > best_acc) {
        best_acc = acc;
        best.best_C = C;
        best.best_gamma = gamma;
      }
    }
  }

  KernelSpec kernel{kind, kind == KernelKind::kLinear ? 1.0 : best.best_gamma};
  if (kind == KernelKind::kLinear) {
    gram = base_matrix;
  } else {
    for (std::size_t t = 0; t < m * m; ++t) gram[t] = rbf_from_squared(best.best_gamma, base_matrix[t]);
  }
  SmoParams p;
  p.C = best.best_C;
  p.tol = grid.tol;
  const auto sol = smo_solve(gram, labels, p);
  best.model = model_from_solution(points, labels, kernel, best.best_C, sol);
  best.cv_accuracy = best_acc;
  return best;
}

}  // namespace stablemil
