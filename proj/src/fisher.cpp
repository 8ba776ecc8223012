#include "stablemil/fisher.hpp"

#include <cmath>

namespace stablemil {

FisherEncoder::FisherEncoder(GMMModel gmm, FisherNorm norm) : gmm_(std::move(gmm)), norm_(norm) {
  const std::size_t K = gmm_.components();
  const std::size_t d = gmm_.dim();
  inv_sigma_.resize(K * d);
  mean_scale_.resize(K);
  var_scale_.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < d; ++j) inv_sigma_[k * d + j] = 1.0 / std::sqrt(gmm_.variances()[k][j]);
    mean_scale_[k] = 1.0 / std::sqrt(gmm_.weights()[k]);
    var_scale_[k] = 1.0 / std::sqrt(2.0 * gmm_.weights()[k]);
  }
}

void FisherEncoder::instance_statistics(std::span<const double> x, std::span<double> out) const {
  const std::size_t K = gmm_.components();
  const std::size_t d = gmm_.dim();
  std::vector<double> post(K);
  gmm_.posteriors(x, post);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& mu = gmm_.means()[k];
    const double g = post[k];
    for (std::size_t j = 0; j < d; ++j) {
      const double z = (x[j] - mu[j]) * inv_sigma_[k * d + j];
      out[k * d + j] = g * z;
      out[(K + k) * d + j] = g * (z * z - 1.0);
    }
  }
}

std::vector<double> FisherEncoder::instance_statistics(std::span<const double> x) const {
  std::vector<double> out(encoding_dim());
  instance_statistics(x, out);
  return out;
}

std::vector<double> FisherEncoder::accumulate(const Bag& bag) const {
  if (bag.dim() != input_dim())
    throw Error(ErrorCode::kDimMismatch, "bag '" + bag.id + "' has dim " + std::to_string(bag.dim()) +
                                             ", encoder expects " + std::to_string(input_dim()));
  std::vector<double> acc(encoding_dim(), 0.0);
  std::vector<double> stats(encoding_dim());
  for (const auto& inst : bag.instances) {
    instance_statistics(inst.features, stats);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += stats[i];
  }
  return acc;
}

void FisherEncoder::finalize_into(std::span<const double> accumulated, std::size_t count,
                                  std::span<double> out) const {
  const std::size_t K = gmm_.components();
  const std::size_t d = gmm_.dim();
  const double inv_n = 1.0 / static_cast<double>(count);
  for (std::size_t k = 0; k < K; ++k) {
    const double ms = mean_scale_[k] * inv_n;
    const double vs = var_scale_[k] * inv_n;
    for (std::size_t j = 0; j < d; ++j) {
      out[k * d + j] = accumulated[k * d + j] * ms;
      out[(K + k) * d + j] = accumulated[(K + k) * d + j] * vs;
    }
  }
  if (norm_.power_norm)
    for (double& v : out) v = std::copysign(std::sqrt(std::abs(v)), v);
  if (norm_.l2_norm) {
    double sq = 0.0;
    for (double v : out) sq += v * v;
    if (sq > 0.0) {
      const double inv = 1.0 / std::sqrt(sq);
      for (double& v : out) v *= inv;
    }
  }
}

std::vector<double> FisherEncoder::finalize(std::span<const double> accumulated, std::size_t count) const {
  std::vector<double> out(encoding_dim());
  finalize_into(accumulated, count, out);
  return out;
}

std::vector<double> FisherEncoder::encode(const Bag& bag) const { return finalize(accumulate(bag), bag.size()); }

std::vector<double> FisherEncoder::encode_unnormalized(const Bag& bag) const {
  FisherEncoder raw = *this;
  raw.norm_ = FisherNorm{false, false};
  return raw.encode(bag);
}

std::vector<double> fisher_encode(const Bag& bag, const FisherEncoder& encoder) { return encoder.encode(bag); }

}  // namespace stablemil
