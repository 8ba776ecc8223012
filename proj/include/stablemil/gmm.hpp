#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stablemil/canonical_json.hpp"

namespace stablemil {

struct GmmParams {
  std::size_t components = 5;
  std::uint64_t seed = 0;
  std::size_t max_iter = 100;
  double rel_tol = 1e-6;
  std::size_t restarts = 1;
};

/// Diagonal-covariance Gaussian mixture.
class GMMModel {
 public:
  GMMModel() = default;
  GMMModel(std::vector<double> weights, std::vector<std::vector<double>> means,
           std::vector<std::vector<double>> variances);

  std::size_t components() const noexcept { return weights_.size(); }
  std::size_t dim() const noexcept { return means_.empty() ? 0 : means_.front().size(); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<std::vector<double>>& means() const noexcept { return means_; }
  const std::vector<std::vector<double>>& variances() const noexcept { return variances_; }

  /// Per-iteration total log-likelihood recorded during fitting.
  const std::vector<double>& log_likelihood_trace() const noexcept { return trace_; }
  /// Per-dimension variance floor used during fitting (empty for loaded models).
  const std::vector<double>& var_floor() const noexcept { return var_floor_; }

  /// log(w_k) + log N(x | mu_k, diag(var_k)) for every component.
  void joint_log_densities(std::span<const double> x, std::span<double> out) const;
  /// Component posteriors via log-sum-exp; returns log p(x).
  double posteriors(std::span<const double> x, std::span<double> out) const;
  std::vector<double> posteriors(std::span<const double> x) const;
  double log_likelihood(std::span<const double> x) const;

  Json to_json() const;
  static GMMModel from_json(const Json& j);

 private:
  friend GMMModel gmm_fit(const std::vector<std::vector<double>>&, const GmmParams&);
  void refresh_constants();

  std::vector<double> weights_;
  std::vector<std::vector<double>> means_;
  std::vector<std::vector<double>> variances_;
  std::vector<std::vector<double>> inv_variances_;
  std::vector<double> log_norm_;  // log w_k - 1/2 sum_d log(2 pi var_kd)
  std::vector<double> trace_;
  std::vector<double> var_floor_;
};

/// EM fit with k-means++ seeding. The variance floor is 1e-6 times the
/// per-dimension data variance, never below 1e-10. Throws kTooFewPoints if
/// fewer points than components.
GMMModel gmm_fit(const std::vector<std::vector<double>>& points, const GmmParams& params);

std::vector<double> gmm_posteriors(const GMMModel& model, std::span<const double> x);

}  // namespace stablemil
