#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string_view>

namespace stablemil {

enum class KernelKind { kRbf, kLinear };

std::string_view to_string(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view text);

struct KernelSpec {
  KernelKind kind = KernelKind::kRbf;
  double gamma = 1.0;  // unused by the linear kernel

  double operator()(std::span<const double> x, std::span<const double> y) const;
  bool operator==(const KernelSpec&) const = default;
};

/// exp(-gamma * d2) kept at or above the smallest positive double, so the
/// kernel value never underflows to 0.
inline double rbf_from_squared(double gamma, double d2) {
  return std::max(std::exp(-gamma * d2), std::numeric_limits<double>::denorm_min());
}

/// exp(-gamma * ||x - y||^2). Throws kDimMismatch / kInvalidArgument.
double rbf(std::span<const double> x, std::span<const double> y, double gamma);
double dot(std::span<const double> x, std::span<const double> y);

}  // namespace stablemil
