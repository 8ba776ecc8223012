#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stablemil/bag_classifier.hpp"

namespace stablemil {

/// A negative bag with one candidate instance appended (multiset append).
struct TreatedBag {
  std::string base_id;
  Instance candidate;
  Bag bag;
};

/// Throws kNotNegativeBag / kDimMismatch. The base bag is not modified.
TreatedBag construct_treated_bag(const Instance& candidate, const Bag& negative, std::string_view candidate_tag = "x");

struct ScoredCandidate {
  Instance instance;
  std::string source_bag;
  std::size_t index = 0;  // position inside the source bag
  /// Fraction of treated bags predicted positive; always flips / negatives.
  double score = 0.0;
  std::size_t flips = 0;

  std::string tag() const { return source_bag + ":" + std::to_string(index); }
};

struct StablePool {
  std::vector<ScoredCandidate> members;
  double tau = 0.0;
  std::vector<ScoredCandidate> all_scores;
  /// Set when no candidate reached tau and the top-scoring fraction was used.
  bool fallback = false;
  std::size_t negatives_used = 0;

  std::size_t size() const noexcept { return members.size(); }
  Json to_json() const;
  static StablePool from_json(const Json& j);
};

struct SelectionOptions {
  /// Worker threads for candidate scoring; results do not depend on it.
  std::size_t jobs = 1;
  /// Score against at most this many negatives (0 = all of them).
  std::size_t negative_subsample = 0;
  std::uint64_t subsample_seed = 0;
  double fallback_fraction = 0.05;
};

/// Mean predicted label over the treated bags x + X_i^- (i over negatives).
/// Throws kEmptyNegatives / kNotNegativeBag. Independent of negatives order.
double score_instance(const Instance& candidate, const std::vector<Bag>& negatives, const BagClassifier& classifier,
                      std::string_view candidate_tag = "x");
std::size_t count_flips(const Instance& candidate, std::span<const Bag* const> negatives,
                        const BagClassifier& classifier, std::string_view candidate_tag = "x");

/// Linear interpolation between order statistics at (n-1) q, zero-indexed.
double quantile_linear(std::vector<double> values, double q);
inline double third_quartile(std::vector<double> values) { return quantile_linear(std::move(values), 0.75); }

struct NegativeSplit {
  std::vector<std::size_t> first;   // floor(n/2) bags whose instances are scored
  std::vector<std::size_t> second;  // ceil(n/2) bags that receive the treatment
};

/// Seeded uniform shuffle of 0..n-1 cut into floor / ceil halves.
NegativeSplit split_negatives(std::size_t count, std::uint64_t seed);

struct ThresholdResult {
  double tau = 0.0;
  std::vector<double> negative_scores;
  NegativeSplit split;
};

/// Scores every instance of the first half of the negatives against the
/// second half and returns the third quartile. Throws kTooFewNegatives.
ThresholdResult select_threshold_detailed(const std::vector<Bag>& negatives, const BagClassifier& classifier,
                                          std::uint64_t seed, std::size_t jobs = 1);
double select_threshold(const std::vector<Bag>& negatives, const BagClassifier& classifier, std::uint64_t seed);

/// Candidate pool = instances of positive bags (exact duplicates scored
/// once), each scored against the negatives; members have score >= tau.
/// Throws kMissingClass.
StablePool learn_stable_instances(const MILDataset& train, const BagClassifier& classifier, double tau,
                                  const SelectionOptions& options = {});

/// Exhaustive potential-outcome computation of the treatment effect of x
/// under the oracle labeler, with the decomposition
///   tau(x) = P(Y=0) E[Y*|Y=0,T=1] + p P(Y=1).
struct EffectDecomposition {
  double tau = 0.0;              // E[Y*|T=1] - E[Y*|T=0]
  double treated_mean = 0.0;     // E[Y*|T=1]
  double control_mean = 0.0;     // E[Y*|T=0]
  double p_negative = 0.0;       // P(Y=0)
  double p_positive = 0.0;       // P(Y=1)
  double treated_given_negative = 0.0;  // E[Y*|Y=0,T=1]
  double p_unique = 0.0;         // share of positive bags whose only causal content is x
  double decomposition = 0.0;    // right-hand side
};

/// Throws kUnknownTruth, kEmptyDataset; throws std::logic_error if the
/// identity fails by more than 1e-12.
EffectDecomposition brute_force_effect(const Instance& candidate, const std::vector<Bag>& population);

std::vector<Bag> negative_bags(const MILDataset& dataset);

}  // namespace stablemil
