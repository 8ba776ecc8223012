#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "stablemil/stable_select.hpp"

namespace stablemil {

struct PRPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct PRReport {
  /// One point per distinct score, thresholds descending, recall non-decreasing.
  std::vector<PRPoint> points;
  /// Step integration: sum over points of (recall_k - recall_{k-1}) * precision_k.
  double average_precision = 0.0;
  std::size_t positives = 0;

  /// CSV "threshold,precision,recall".
  void write_csv(std::ostream& out) const;
};

/// Instance-identification PR curve; a candidate counts as relevant iff its
/// truth is causal. Throws kUnknownTruth. With no causal candidate every
/// recall is 0 and AP is 0.
PRReport pr_curve(std::span<const double> scores, std::span<const InstanceRole> truths);
PRReport pr_curve(const std::vector<ScoredCandidate>& scored);

}  // namespace stablemil
