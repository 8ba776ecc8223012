#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stablemil/error.hpp"

namespace stablemil {

/// Ground-truth role of an instance. Only synthetic data carries anything
/// other than kUnknown.
enum class InstanceRole { kCausal, kNoisy, kNegative, kUnknown };

std::string_view to_string(InstanceRole role);
InstanceRole parse_role(std::string_view text);

struct Instance {
  std::vector<double> features;
  InstanceRole truth = InstanceRole::kUnknown;

  std::size_t dim() const noexcept { return features.size(); }
  bool operator==(const Instance&) const = default;
};

/// A labeled multiset of instances. `background` is the concept tag used by
/// the biased sampler ("N1", "N2", "N3"); it is empty for real data.
struct Bag {
  std::string id;
  std::vector<Instance> instances;
  int label = 0;
  std::string background;

  std::size_t size() const noexcept { return instances.size(); }
  std::size_t dim() const noexcept { return instances.empty() ? 0 : instances.front().dim(); }
  bool all_truths_known() const;
  bool operator==(const Bag&) const = default;
};

struct MILDataset {
  std::vector<Bag> bags;
  std::size_t dim = 0;
  /// Provenance that round-trips through the file (seed, generator hash, a_used).
  std::map<std::string, std::string> meta;
  /// Path the dataset was loaded from. Never serialized.
  std::string source;

  std::size_t size() const noexcept { return bags.size(); }
  std::size_t positive_count() const;
  std::size_t negative_count() const;
  std::vector<const Bag*> positives() const;
  std::vector<const Bag*> negatives() const;
  std::size_t total_instances() const;

  /// Structural equality: bags, dim and meta. `source` is ignored.
  bool structurally_equal(const MILDataset& other) const;
};

/// Throws kDimMismatch / kEmptyDataset / kInvalidArgument if the dataset
/// breaks a data-model invariant (finite features, equal dims, nonempty bags,
/// binary labels).
void validate(const MILDataset& dataset);
MILDataset make_dataset(std::vector<Bag> bags, std::map<std::string, std::string> meta = {});

/// Standard multi-instance rule: positive iff some instance is causal.
/// An empty role list is negative.
int oracle_label(std::span<const InstanceRole> truths);
int oracle_label(const Bag& bag);

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace stablemil
