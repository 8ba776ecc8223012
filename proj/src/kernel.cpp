#include "stablemil/kernel.hpp"

#include <cmath>
#include <string>

#include "stablemil/mil_core.hpp"

namespace stablemil {

std::string_view to_string(KernelKind kind) { return kind == KernelKind::kRbf ? "rbf" : "linear"; }

KernelKind parse_kernel_kind(std::string_view text) {
  if (text == "rbf") return KernelKind::kRbf;
  if (text == "linear") return KernelKind::kLinear;
  throw Error(ErrorCode::kParseError, "unknown kernel '" + std::string(text) + "'");
}

double rbf(std::span<const double> x, std::span<const double> y, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rbf gamma must be positive");
  return rbf_from_squared(gamma, squared_distance(x, y));
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(ErrorCode::kDimMismatch,
                "vectors of dim " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double KernelSpec::operator()(std::span<const double> x, std::span<const double> y) const {
  return kind == KernelKind::kRbf ? rbf(x, y, gamma) : dot(x, y);
}

}  // namespace stablemil
