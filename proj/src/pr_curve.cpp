#include "stablemil/pr_curve.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "stablemil/canonical_json.hpp"

namespace stablemil {

PRReport pr_curve(std::span<const double> scores, std::span<const InstanceRole> truths) {
  if (scores.size() != truths.size()) throw Error(ErrorCode::kInvalidArgument, "scores and truths differ in length");
  for (auto t : truths)
    if (t == InstanceRole::kUnknown) throw Error(ErrorCode::kUnknownTruth, "PR curve needs every candidate truth");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  PRReport report;
  report.positives = static_cast<std::size_t>(std::count(truths.begin(), truths.end(), InstanceRole::kCausal));
  std::size_t tp = 0;
  std::size_t taken = 0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == threshold) {
      tp += truths[order[j]] == InstanceRole::kCausal;
      ++j;
    }
    taken = j;
    PRPoint p;
    p.threshold = threshold;
    p.precision = static_cast<double>(tp) / static_cast<double>(taken);
    p.recall = report.positives ? static_cast<double>(tp) / static_cast<double>(report.positives) : 0.0;
    report.average_precision += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
    report.points.push_back(p);
    i = j;
  }
  return report;
}

PRReport pr_curve(const std::vector<ScoredCandidate>& scored) {
  std::vector<double> scores;
  std::vector<InstanceRole> truths;
  for (const auto& c : scored) {
    scores.push_back(c.score);
    truths.push_back(c.instance.truth);
  }
  return pr_curve(scores, truths);
}

void PRReport::write_csv(std::ostream& out) const {
  out << "threshold,precision,recall\n";
  for (const auto& p : points)
    out << format_double(p.threshold) << ',' << format_double(p.precision) << ',' << format_double(p.recall) << '\n';
}

}  // namespace stablemil
