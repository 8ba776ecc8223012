#pragma once

#include <span>

namespace stablemil {

double mean(std::span<const double> values);
/// Sample standard deviation (n - 1 denominator); 0 for a single value.
double sample_std(std::span<const double> values);

struct TTestResult {
  double mean_difference = 0.0;  // mean(a - b)
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // two-sided
};

/// Paired Student t-test on a - b. Zero-variance differences give t = 0,
/// p = 1 when the mean difference is 0 and t = +-inf, p = 0 otherwise.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct RankSumResult {
  double w = 0.0;  // rank sum of sample a (average ranks for ties)
  double z = 0.0;
  double p_value = 1.0;  // two-sided, normal approximation with tie correction
};

RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);

}  // namespace stablemil
