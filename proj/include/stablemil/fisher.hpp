#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stablemil/gmm.hpp"
#include "stablemil/mil_core.hpp"

namespace stablemil {

struct FisherNorm {
  bool power_norm = true;
  bool l2_norm = true;
};

/// Fisher-vector bag encoder over a diagonal GMM.
///
/// Layout: K mean-gradient blocks followed by K variance-gradient blocks,
/// each of length d, so the encoding has 2dK entries. For a bag of N
/// instances with posteriors g_k(x):
///
///   mean block k     = 1/(N sqrt(w_k))   * sum_x g_k(x) (x - mu_k) / sigma_k
///   variance block k = 1/(N sqrt(2 w_k)) * sum_x g_k(x) ((x - mu_k)^2 / sigma_k^2 - 1)
///
/// followed by the optional signed square root and unit L2 normalization.
/// The weight-gradient block is not part of the encoding.
///
/// Encoding is split into accumulate (a per-instance sum in instance order)
/// and finalize so a bag with one appended instance can be encoded from the
/// cached sum of its base bag with bit-identical results.
class FisherEncoder {
 public:
  FisherEncoder() = default;
  FisherEncoder(GMMModel gmm, FisherNorm norm);

  const GMMModel& gmm() const noexcept { return gmm_; }
  const FisherNorm& norm() const noexcept { return norm_; }
  std::size_t input_dim() const noexcept { return gmm_.dim(); }
  std::size_t encoding_dim() const noexcept { return 2 * gmm_.dim() * gmm_.components(); }

  /// Per-instance statistics (the summand above, before the 1/N scaling).
  void instance_statistics(std::span<const double> x, std::span<double> out) const;
  std::vector<double> instance_statistics(std::span<const double> x) const;

  /// Sum of instance statistics over the bag, in instance order.
  std::vector<double> accumulate(const Bag& bag) const;
  /// Scales an accumulated sum for `count` instances and applies normalization.
  std::vector<double> finalize(std::span<const double> accumulated, std::size_t count) const;
  void finalize_into(std::span<const double> accumulated, std::size_t count, std::span<double> out) const;

  std::vector<double> encode(const Bag& bag) const;
  /// Encoding before power / L2 normalization.
  std::vector<double> encode_unnormalized(const Bag& bag) const;

 private:
  GMMModel gmm_;
  FisherNorm norm_;
  std::vector<double> inv_sigma_;    // K*d
  std::vector<double> mean_scale_;   // K
  std::vector<double> var_scale_;    // K
};

std::vector<double> fisher_encode(const Bag& bag, const FisherEncoder& encoder);

}  // namespace stablemil
