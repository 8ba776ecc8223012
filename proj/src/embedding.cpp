#include "stablemil/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "stablemil/parallel.hpp"
#include "stablemil/rng.hpp"

namespace stablemil {

void EmbeddingSpec::check() const {
  if (members.empty()) throw Error(ErrorCode::kEmptyPool, "embedding needs at least one pool member");
  if (lambdas.size() != 1 && lambdas.size() != members.size())
    throw Error(ErrorCode::kInvalidArgument, "need one global lambda or one per pool member");
  for (double l : lambdas)
    if (!(l > 0.0) || !std::isfinite(l)) throw Error(ErrorCode::kInvalidArgument, "lambdas must be positive");
}

Json EmbeddingSpec::to_json() const {
  Json j = Json::object();
  j["members"] = members;
  j["lambdas"] = lambdas;
  return j;
}

EmbeddingSpec EmbeddingSpec::from_json(const Json& j) {
  try {
    EmbeddingSpec spec;
    spec.members = j.at("members").get<std::vector<std::vector<double>>>();
    spec.lambdas = j.at("lambdas").get<std::vector<double>>();
    spec.check();
    return spec;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("embedding spec: ") + e.what());
  }
}

std::string EmbeddingSpec::hash() const {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(to_canonical(to_json()))));
  return buf;
}

EmbeddingSpec make_embedding_spec(const StablePool& pool, std::vector<double> lambdas) {
  EmbeddingSpec spec;
  for (const auto& m : pool.members) spec.members.push_back(m.instance.features);
  spec.lambdas = std::move(lambdas);
  spec.check();
  return spec;
}

std::vector<double> local_scale(const std::vector<std::vector<double>>& members,
                                const std::vector<std::vector<double>>& references, std::size_t k) {
  if (k < 1 || references.size() <= k)
    throw Error(ErrorCode::kTooFewReferences, std::to_string(references.size()) + " references for k = " +
                                                  std::to_string(k));
  std::vector<double> lambdas(members.size(), 0.0);
  std::vector<double> d2;
  d2.reserve(references.size());
  for (std::size_t j = 0; j < members.size(); ++j) {
    d2.clear();
    for (const auto& r : references) {
      const double v = squared_distance(members[j], r);
      if (v > 0.0) d2.push_back(v);
    }
    if (d2.size() < k) continue;
    std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(k - 1), d2.end());
    lambdas[j] = 1.0 / d2[k - 1];  // sigma^2 = d2
  }
  std::vector<double> positive;
  for (double l : lambdas)
    if (l > 0.0 && std::isfinite(l)) positive.push_back(l);
  double fallback = 1.0;
  if (!positive.empty()) {
    std::sort(positive.begin(), positive.end());
    const std::size_t n = positive.size();
    fallback = n % 2 ? positive[n / 2] : 0.5 * (positive[n / 2 - 1] + positive[n / 2]);
  }
  for (double& l : lambdas)
    if (!(l > 0.0) || !std::isfinite(l)) l = fallback;
  return lambdas;
}

std::vector<double> local_scale(const StablePool& pool, const std::vector<std::vector<double>>& references,
                                std::size_t k) {
  std::vector<std::vector<double>> members;
  for (const auto& m : pool.members) members.push_back(m.instance.features);
  return local_scale(members, references, k);
}

double similarity(const Bag& bag, std::span<const double> x, double lambda) {
  if (bag.instances.empty()) throw Error(ErrorCode::kInvalidArgument, "similarity to an empty bag");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& inst : bag.instances) best = std::min(best, squared_distance(inst.features, x));
  return rbf_from_squared(lambda, best);
}

std::vector<double> embed_bag(const Bag& bag, const EmbeddingSpec& spec) {
  spec.check();
  std::vector<double> z(spec.q());
  for (std::size_t j = 0; j < spec.q(); ++j) z[j] = similarity(bag, spec.members[j], spec.lambda(j));
  return z;
}

EmbeddedDataset embed_dataset(const MILDataset& dataset, const EmbeddingSpec& spec, std::size_t jobs) {
  spec.check();
  EmbeddedDataset out;
  out.spec_hash = spec.hash();
  out.vectors.resize(dataset.size());
  for (const auto& b : dataset.bags) {
    out.ids.push_back(b.id);
    out.labels.push_back(b.label);
  }
  parallel_for(dataset.size(), jobs, [&](std::size_t i) { out.vectors[i] = embed_bag(dataset.bags[i], spec); });
  return out;
}

void EmbeddedDataset::write_csv(std::ostream& out) const {
  out << "bag_id";
  const std::size_t q = vectors.empty() ? 0 : vectors.front().size();
  for (std::size_t j = 1; j <= q; ++j) out << ",z_" << j;
  out << ",label\n";
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    out << ids[i];
    for (double v : vectors[i]) out << ',' << format_double(v);
    out << ',' << labels[i] << '\n';
  }
}

int EmbeddedModel::predict(std::span<const double> z) const {
  if (majority) return majority_label;
  return svm.decision(z) >= 0.0 ? 1 : 0;
}

int FinalModel::predict(const Bag& bag) const { return model.predict(embed_bag(bag, spec)); }

Json FinalModel::to_json() const {
  Json j = Json::object();
  j["spec"] = spec.to_json();
  j["majority"] = model.majority;
  j["majority_label"] = model.majority_label;
  j["C"] = model.C;
  j["gamma"] = model.gamma;
  j["cv_accuracy"] = model.cv_accuracy;
  j["degenerate_warning"] = model.degenerate_warning;
  if (!model.majority) j["svm"] = model.svm.to_json();
  return j;
}

FinalModel train_embedded_classifier(const MILDataset& train, const EmbeddingSpec& spec,
                                     const GridSearchConfig& grid, std::uint64_t seed, std::size_t jobs) {
  const std::size_t n_pos = train.positive_count();
  const std::size_t n_neg = train.negative_count();
  if (n_pos == 0 || n_neg == 0) throw Error(ErrorCode::kSingleClass, "embedded classifier needs both classes");

  FinalModel final_model;
  final_model.spec = spec;
  const auto embedded = embed_dataset(train, spec, jobs);

  const bool constant = std::all_of(embedded.vectors.begin(), embedded.vectors.end(),
                                    [&](const auto& z) { return z == embedded.vectors.front(); });
  if (constant) {
    final_model.model.majority = true;
    final_model.model.degenerate_warning = true;
    final_model.model.majority_label = n_pos > n_neg ? 1 : 0;
    return final_model;
  }

  std::vector<int> labels;
  for (int y : embedded.labels) labels.push_back(y == 1 ? 1 : -1);
  auto fit = grid_search_train(embedded.vectors, labels, KernelKind::kRbf, grid, substream_seed(seed, "svm-cv"));
  final_model.model.svm = std::move(fit.model);
  final_model.model.C = fit.best_C;
  final_model.model.gamma = fit.best_gamma;
  final_model.model.cv_accuracy = fit.cv_accuracy;
  return final_model;
}

std::vector<std::vector<double>> all_instances(const MILDataset& dataset) {
  std::vector<std::vector<double>> out;
  out.reserve(dataset.total_instances());
  for (const auto& b : dataset.bags)
    for (const auto& inst : b.instances) out.push_back(inst.features);
  return out;
}

}  // namespace stablemil
