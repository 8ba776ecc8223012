#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "stablemil/mil_core.hpp"

namespace stablemil {

/// Concept slots: P (causal), N1 (noisy background), N2 and N3 (negative
/// backgrounds).
enum class Concept { kP = 0, kN1 = 1, kN2 = 2, kN3 = 3 };

std::string_view concept_name(Concept c);
InstanceRole concept_role(Concept c);

struct ConceptSpec {
  std::vector<double> mean;
  std::vector<double> variance;
};

struct ShiftConfig {
  std::array<ConceptSpec, 4> concepts;
  std::size_t bags_total = 400;
  std::size_t instances_per_bag = 20;
  double positive_fraction = 0.5;
  std::size_t positive_causal_count = 1;
  double a_lo = 0.65;
  double a_hi = 0.95;
  /// Background concept probabilities: positives over {N1, N2}, negatives
  /// over {N1, N2, N3}.
  std::array<double, 2> positive_background{0.5, 0.5};
  std::array<double, 3> negative_background{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  std::uint64_t seed = 0;

  std::size_t dim() const noexcept { return concepts[0].mean.size(); }
  /// Throws kInvalidConfig.
  void check() const;
  /// Documented key = value text form; parse(to_text()) reproduces the config.
  std::string to_text() const;
  static ShiftConfig parse(std::string_view text);
  static ShiftConfig load(const std::string& path);
  std::string hash() const;
};

/// Concepts at +-distance on the first two axes with a shared isotropic
/// variance: P = +s e1, N1 = +s e2, N2 = -s e1, N3 = -s e2.
ShiftConfig axis_config(std::size_t dim, double distance, double variance);
/// Pinned benchmark settings: 1 is distance 3 / variance 1, 2 is distance 2 /
/// variance 1.5, both d = 10 with 200 + 200 bags of 20 instances.
ShiftConfig pinned_setting(int setting);

/// Bags carry full truths and a background tag ("N1", "N2", "N3"). Labels
/// follow the standard MI rule by construction. Deterministic per seed.
MILDataset generate_population(const ShiftConfig& config);

struct ShiftSplit {
  MILDataset train;
  MILDataset test;
  double a_used = 0.0;
  std::map<std::string, std::vector<InstanceRole>> truth_index;
};

/// Probability that a bag enters the training set under sampling ratio a.
double selection_probability(int label, std::string_view background, double a);

/// Independent seeded coin flip per bag with the biased selection rules.
/// Throws kInvalidArgument for a outside [0.5, 1] and kMissingBackgroundTag.
ShiftSplit biased_split(const MILDataset& population, double a, std::uint64_t seed);

/// Uniform draw from [lo, hi].
double draw_a(double lo, double hi, std::uint64_t seed);

}  // namespace stablemil
