#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stablemil/stable_select.hpp"
#include "stablemil/svm.hpp"

namespace stablemil {

/// Embedding basis: pool member features plus one bandwidth per member (or a
/// single global one).
struct EmbeddingSpec {
  std::vector<std::vector<double>> members;
  std::vector<double> lambdas;

  std::size_t q() const noexcept { return members.size(); }
  double lambda(std::size_t j) const { return lambdas.size() == 1 ? lambdas.front() : lambdas.at(j); }
  /// Throws kEmptyPool / kInvalidArgument on a broken spec.
  void check() const;
  std::string hash() const;
  Json to_json() const;
  static EmbeddingSpec from_json(const Json& j);
};

EmbeddingSpec make_embedding_spec(const StablePool& pool, std::vector<double> lambdas);

/// Local scaling: sigma_j is the distance from member j to its k-th nearest
/// reference (exact copies of the member excluded) and lambda_j = 1/sigma_j^2.
/// Members with sigma_j = 0 (or fewer than k distinct references) get the
/// median of the positive lambdas (1.0 if there are none).
/// Throws kTooFewReferences unless |references| > k >= 1.
std::vector<double> local_scale(const std::vector<std::vector<double>>& members,
                                const std::vector<std::vector<double>>& references, std::size_t k);
std::vector<double> local_scale(const StablePool& pool, const std::vector<std::vector<double>>& references,
                                std::size_t k);

/// max over bag instances of exp(-lambda ||x_ij - x||^2), clamped below at the
/// smallest positive double so the value stays in (0, 1].
double similarity(const Bag& bag, std::span<const double> x, double lambda);

std::vector<double> embed_bag(const Bag& bag, const EmbeddingSpec& spec);

struct EmbeddedDataset {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> vectors;
  std::vector<int> labels;
  std::string spec_hash;

  /// CSV "bag_id,z_1,...,z_q,label".
  void write_csv(std::ostream& out) const;
};

EmbeddedDataset embed_dataset(const MILDataset& dataset, const EmbeddingSpec& spec, std::size_t jobs = 1);

/// Classifier on embedded vectors: an RBF SVM, or a majority-label rule when
/// every training embedding is identical.
struct EmbeddedModel {
  bool majority = false;
  int majority_label = 0;
  SVMModel svm;
  double C = 0.0;
  double gamma = 0.0;
  double cv_accuracy = 0.0;
  /// Set when the embedding carried no information (SingleFeatureDegenerate).
  bool degenerate_warning = false;

  int predict(std::span<const double> z) const;
};

struct FinalModel {
  EmbeddingSpec spec;
  EmbeddedModel model;

  int predict(const Bag& bag) const;
  Json to_json() const;
};

/// Embeds every training bag, runs the seeded grid search and fits an RBF SVM.
/// Throws kSingleClass.
FinalModel train_embedded_classifier(const MILDataset& train, const EmbeddingSpec& spec,
                                     const GridSearchConfig& grid, std::uint64_t seed, std::size_t jobs = 1);

std::vector<std::vector<double>> all_instances(const MILDataset& dataset);

}  // namespace stablemil
