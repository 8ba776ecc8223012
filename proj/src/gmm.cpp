#include "stablemil/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stablemil/mil_core.hpp"
#include "stablemil/rng.hpp"

namespace stablemil {

GMMModel::GMMModel(std::vector<double> weights, std::vector<std::vector<double>> means,
                   std::vector<std::vector<double>> variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
  if (weights_.empty() || weights_.size() != means_.size() || means_.size() != variances_.size())
    throw Error(ErrorCode::kInvalidArgument, "GMM parameter lists differ in length");
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (means_[k].size() != means_.front().size() || variances_[k].size() != means_.front().size())
      throw Error(ErrorCode::kDimMismatch, "GMM component dims differ");
    for (double v : variances_[k])
      if (!(v > 0.0)) throw Error(ErrorCode::kInvalidArgument, "GMM variances must be positive");
  }
  refresh_constants();
}

void GMMModel::refresh_constants() {
  const std::size_t K = weights_.size();
  inv_variances_.assign(K, {});
  log_norm_.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    double c = std::log(weights_[k]);
    inv_variances_[k].resize(variances_[k].size());
    for (std::size_t d = 0; d < variances_[k].size(); ++d) {
      inv_variances_[k][d] = 1.0 / variances_[k][d];
      c -= 0.5 * std::log(2.0 * std::numbers::pi * variances_[k][d]);
    }
    log_norm_[k] = c;
  }
}

void GMMModel::joint_log_densities(std::span<const double> x, std::span<double> out) const {
  if (x.size() != dim())
    throw Error(ErrorCode::kDimMismatch,
                "GMM input has dim " + std::to_string(x.size()) + ", model expects " + std::to_string(dim()));
  for (std::size_t k = 0; k < components(); ++k) {
    const auto& mu = means_[k];
    const auto& iv = inv_variances_[k];
    double q = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double diff = x[d] - mu[d];
      q += diff * diff * iv[d];
    }
    out[k] = log_norm_[k] - 0.5 * q;
  }
}

double GMMModel::posteriors(std::span<const double> x, std::span<double> out) const {
  joint_log_densities(x, out);
  const double peak = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return peak + std::log(sum);
}

std::vector<double> GMMModel::posteriors(std::span<const double> x) const {
  std::vector<double> out(components());
  posteriors(x, out);
  return out;
}

double GMMModel::log_likelihood(std::span<const double> x) const {
  std::vector<double> out(components());
  return posteriors(x, out);
}

std::vector<double> gmm_posteriors(const GMMModel& model, std::span<const double> x) { return model.posteriors(x); }

Json GMMModel::to_json() const {
  Json j = Json::object();
  j["weights"] = weights_;
  j["means"] = means_;
  j["variances"] = variances_;
  return j;
}

GMMModel GMMModel::from_json(const Json& j) {
  try {
    return GMMModel(j.at("weights").get<std::vector<double>>(),
                    j.at("means").get<std::vector<std::vector<double>>>(),
                    j.at("variances").get<std::vector<std::vector<double>>>());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("GMM model: ") + e.what());
  }
}

namespace {

std::vector<std::size_t> kmeans_plus_plus(const std::vector<std::vector<double>>& points, std::size_t K, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<std::size_t> centers{static_cast<std::size_t>(uniform_index(rng, n))};
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (centers.size() < K) {
    const auto& c = points[centers.back()];
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], c));
      total += d2[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(uniform_index(rng, n));
    }
    centers.push_back(pick);
  }
  return centers;
}

struct FitState {
  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> variances;
};

}  // namespace

GMMModel gmm_fit(const std::vector<std::vector<double>>& points, const GmmParams& params) {
  const std::size_t K = params.components;
  if (K == 0) throw Error(ErrorCode::kInvalidArgument, "GMM needs at least one component");
  if (points.size() < K)
    throw Error(ErrorCode::kTooFewPoints,
                std::to_string(points.size()) + " points for " + std::to_string(K) + " components");
  const std::size_t n = points.size();
  const std::size_t dim = points.front().size();
  for (const auto& p : points)
    if (p.size() != dim) throw Error(ErrorCode::kDimMismatch, "ragged GMM training points");

  std::vector<double> data_mean(dim, 0.0);
  std::vector<double> data_var(dim, 0.0);
  for (const auto& p : points)
    for (std::size_t d = 0; d < dim; ++d) data_mean[d] += p[d];
  for (double& v : data_mean) v /= static_cast<double>(n);
  for (const auto& p : points)
    for (std::size_t d = 0; d < dim; ++d) data_var[d] += (p[d] - data_mean[d]) * (p[d] - data_mean[d]);
  std::vector<double> floor(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    data_var[d] /= static_cast<double>(n);
    floor[d] = std::max(1e-6 * data_var[d], 1e-10);
  }

  GMMModel best;
  double best_ll = -std::numeric_limits<double>::infinity();
  const std::size_t restarts = std::max<std::size_t>(1, params.restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(substream_seed(params.seed, "gmm-restart", r));
    FitState st;
    st.weights.assign(K, 1.0 / static_cast<double>(K));
    for (auto c : kmeans_plus_plus(points, K, rng)) st.means.push_back(points[c]);
    st.variances.assign(K, data_var);
    for (auto& var : st.variances)
      for (std::size_t d = 0; d < dim; ++d) var[d] = std::max(var[d], floor[d]);

    GMMModel model(st.weights, st.means, st.variances);
    std::vector<double> resp(n * K);
    std::vector<double> trace;
    for (std::size_t iter = 0;; ++iter) {
      // E step; the recorded log-likelihood belongs to the current parameters.
      double ll = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        ll += model.posteriors(points[i], std::span<double>(resp.data() + i * K, K));
      trace.push_back(ll);
      if (iter >= params.max_iter) break;
      if (trace.size() >= 2) {
        const double prev = trace[trace.size() - 2];
        if (ll - prev <= params.rel_tol * std::abs(prev)) break;
      }

      // M step
      for (std::size_t k = 0; k < K; ++k) {
        double nk = 0.0;
        std::vector<double> mean(dim, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const double g = resp[i * K + k];
          nk += g;
          for (std::size_t d = 0; d < dim; ++d) mean[d] += g * points[i][d];
        }
        if (nk <= 1e-12 * static_cast<double>(n)) {
          // Empty component: keep its mean and variance, give it negligible weight.
          st.weights[k] = 1e-12;
          continue;
        }
        for (double& v : mean) v /= nk;
        std::vector<double> var(dim, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const double g = resp[i * K + k];
          for (std::size_t d = 0; d < dim; ++d) {
            const double diff = points[i][d] - mean[d];
            var[d] += g * diff * diff;
          }
        }
        for (std::size_t d = 0; d < dim; ++d) var[d] = std::max(var[d] / nk, floor[d]);
        st.weights[k] = nk / static_cast<double>(n);
        st.means[k] = std::move(mean);
        st.variances[k] = std::move(var);
      }
      double wsum = 0.0;
      for (double w : st.weights) wsum += w;
      for (double& w : st.weights) w /= wsum;
      model = GMMModel(st.weights, st.means, st.variances);
    }
    model.trace_ = std::move(trace);
    model.var_floor_ = floor;
    if (model.trace_.back() > best_ll) {
      best_ll = model.trace_.back();
      best = std::move(model);
    }
  }
  return best;
}

}  // namespace stablemil
