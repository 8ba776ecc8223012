#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stablemil/fisher.hpp"
#include "stablemil/svm.hpp"

namespace stablemil {

enum class ClassifierKind { kMifv, kOracle, kStub };

std::string_view to_string(ClassifierKind kind);

struct MifvParams {
  std::size_t components = 5;
  std::size_t gmm_max_iter = 100;
  double gmm_rel_tol = 1e-6;
  std::size_t gmm_restarts = 1;
  FisherNorm norm;
  /// Linear SVM: only C_values, folds and tol are used.
  GridSearchConfig svm_grid;
};

/// A trained bag classifier. Immutable after construction; predict() is
/// const, pure and safe to call from any number of threads.
class BagClassifier {
 public:
  static BagClassifier mifv(FisherEncoder encoder, SVMModel linear_model);
  static BagClassifier oracle();
  /// Table lookup by bag id. Treated bags ("<base>+<tag>") fall back to the
  /// base id; anything else gets `default_label`.
  static BagClassifier stub(std::map<std::string, int> table, int default_label = 0);

  ClassifierKind kind() const noexcept { return kind_; }
  const std::optional<FisherEncoder>& encoder() const noexcept { return encoder_; }
  const std::optional<SVMModel>& linear_model() const noexcept { return linear_model_; }
  const std::map<std::string, int>& stub_table() const noexcept { return stub_table_; }

  int predict(const Bag& bag) const;

  // Treated-bag fast path. For the mifv kind the base bag's Fisher sum is
  // cached once and each candidate only adds its own statistics; the result
  // is bit-identical to predict() on the explicitly built treated bag.
  struct BaseCache {
    const Bag* bag = nullptr;
    std::vector<double> accumulated;
  };
  BaseCache cache_base(const Bag& base) const;
  /// Instance statistics for the mifv kind; empty otherwise.
  std::vector<double> candidate_statistics(const Instance& candidate) const;
  int predict_treated(const BaseCache& base, const Instance& candidate, std::span<const double> candidate_stats,
                      const std::string& treated_id) const;

  Json to_json() const;
  static BagClassifier from_json(const Json& j);

 private:
  int predict_encoding(std::span<const double> encoding) const;

  ClassifierKind kind_ = ClassifierKind::kOracle;
  std::optional<FisherEncoder> encoder_;
  std::optional<SVMModel> linear_model_;
  std::map<std::string, int> stub_table_;
  int stub_default_ = 0;
};

/// GMM over the pooled training instances, Fisher encoding per bag, and a
/// cross-validated linear SVM on the encodings. Throws kSingleClass.
BagClassifier train_bag_classifier(const MILDataset& train, const MifvParams& params, std::uint64_t seed);
BagClassifier train_bag_classifier(const MILDataset& train, std::size_t components, std::uint64_t seed);

int predict_bag(const BagClassifier& classifier, const Bag& bag);

/// Treated bag id convention shared with the stub classifier.
std::string treated_bag_id(std::string_view base_id, std::string_view candidate_tag);

}  // namespace stablemil
