#include "stablemil/bag_classifier.hpp"

#include "stablemil/rng.hpp"

namespace stablemil {

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kMifv: return "mifv";
    case ClassifierKind::kOracle: return "oracle";
    case ClassifierKind::kStub: return "stub";
  }
  return "oracle";
}

std::string treated_bag_id(std::string_view base_id, std::string_view candidate_tag) {
  std::string id(base_id);
  id += '+';
  id += candidate_tag;
  return id;
}

BagClassifier BagClassifier::mifv(FisherEncoder encoder, SVMModel linear_model) {
  if (linear_model.dim() != 0 && linear_model.dim() != encoder.encoding_dim())
    throw Error(ErrorCode::kDimMismatch, "linear model does not match the encoding dimension");
  BagClassifier c;
  c.kind_ = ClassifierKind::kMifv;
  c.encoder_ = std::move(encoder);
  c.linear_model_ = std::move(linear_model);
  return c;
}

BagClassifier BagClassifier::oracle() { return BagClassifier{}; }

BagClassifier BagClassifier::stub(std::map<std::string, int> table, int default_label) {
  BagClassifier c;
  c.kind_ = ClassifierKind::kStub;
  for (auto& [id, label] : table)
    if (label != 0 && label != 1) throw Error(ErrorCode::kInvalidArgument, "stub label for '" + id + "' is not binary");
  c.stub_table_ = std::move(table);
  c.stub_default_ = default_label != 0 ? 1 : 0;
  return c;
}

int BagClassifier::predict_encoding(std::span<const double> encoding) const {
  return linear_model_->decision(encoding) >= 0.0 ? 1 : 0;
}

int BagClassifier::predict(const Bag& bag) const {
  switch (kind_) {
    case ClassifierKind::kOracle:
      return oracle_label(bag);
    case ClassifierKind::kStub: {
      if (auto it = stub_table_.find(bag.id); it != stub_table_.end()) return it->second;
      if (auto plus = bag.id.rfind('+'); plus != std::string::npos)
        if (auto it = stub_table_.find(bag.id.substr(0, plus)); it != stub_table_.end()) return it->second;
      return stub_default_;
    }
    case ClassifierKind::kMifv:
      return predict_encoding(encoder_->encode(bag));
  }
  return 0;
}

BagClassifier::BaseCache BagClassifier::cache_base(const Bag& base) const {
  BaseCache cache;
  cache.bag = &base;
  if (kind_ == ClassifierKind::kMifv) cache.accumulated = encoder_->accumulate(base);
  return cache;
}

std::vector<double> BagClassifier::candidate_statistics(const Instance& candidate) const {
  if (kind_ != ClassifierKind::kMifv) return {};
  if (candidate.dim() != encoder_->input_dim())
    throw Error(ErrorCode::kDimMismatch, "candidate dim does not match the classifier");
  return encoder_->instance_statistics(candidate.features);
}

int BagClassifier::predict_treated(const BaseCache& base, const Instance& candidate,
                                   std::span<const double> candidate_stats, const std::string& treated_id) const {
  if (kind_ == ClassifierKind::kMifv) {
    thread_local std::vector<double> acc;
    thread_local std::vector<double> enc;
    acc.resize(base.accumulated.size());
    enc.resize(base.accumulated.size());
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = base.accumulated[i] + candidate_stats[i];
    encoder_->finalize_into(acc, base.bag->size() + 1, enc);
    return predict_encoding(enc);
  }
  if (kind_ == ClassifierKind::kOracle) {
    const int base_label = oracle_label(*base.bag);
    const InstanceRole role = candidate.truth;
    return oracle_label(std::span<const InstanceRole>(&role, 1)) | base_label;
  }
  Bag probe;
  probe.id = treated_id;
  return predict(probe);
}

Json BagClassifier::to_json() const {
  Json j = Json::object();
  j["kind"] = std::string(to_string(kind_));
  if (kind_ == ClassifierKind::kMifv) {
    j["power_norm"] = encoder_->norm().power_norm;
    j["l2_norm"] = encoder_->norm().l2_norm;
    j["gmm"] = encoder_->gmm().to_json();
    j["linear_model"] = linear_model_->to_json();
  } else if (kind_ == ClassifierKind::kStub) {
    Json table = Json::object();
    for (const auto& [id, label] : stub_table_) table[id] = label;
    j["table"] = std::move(table);
    j["default"] = stub_default_;
  }
  return j;
}

BagClassifier BagClassifier::from_json(const Json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "oracle") return oracle();
    if (kind == "stub") return stub(j.at("table").get<std::map<std::string, int>>(), j.value("default", 0));
    if (kind == "mifv") {
      FisherNorm norm{j.at("power_norm").get<bool>(), j.at("l2_norm").get<bool>()};
      return mifv(FisherEncoder(GMMModel::from_json(j.at("gmm")), norm), SVMModel::from_json(j.at("linear_model")));
    }
    throw Error(ErrorCode::kParseError, "unknown classifier kind '" + kind + "'");
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("classifier: ") + e.what());
  }
}

BagClassifier train_bag_classifier(const MILDataset& train, const MifvParams& params, std::uint64_t seed) {
  validate(train);
  if (train.positive_count() == 0 || train.negative_count() == 0)
    throw Error(ErrorCode::kSingleClass, "base classifier training needs positive and negative bags");

  std::vector<std::vector<double>> pooled;
  pooled.reserve(train.total_instances());
  for (const auto& bag : train.bags)
    for (const auto& inst : bag.instances) pooled.push_back(inst.features);

  GmmParams gp;
  gp.components = params.components;
  gp.seed = substream_seed(seed, "gmm");
  gp.max_iter = params.gmm_max_iter;
  gp.rel_tol = params.gmm_rel_tol;
  gp.restarts = params.gmm_restarts;
  FisherEncoder encoder(gmm_fit(pooled, gp), params.norm);

  std::vector<std::vector<double>> encodings;
  std::vector<int> labels;
  for (const auto& bag : train.bags) {
    encodings.push_back(encoder.encode(bag));
    labels.push_back(bag.label == 1 ? 1 : -1);
  }
  auto fit = grid_search_train(encodings, labels, KernelKind::kLinear, params.svm_grid, substream_seed(seed, "svm-cv"));
  return BagClassifier::mifv(std::move(encoder), std::move(fit.model));
}

BagClassifier train_bag_classifier(const MILDataset& train, std::size_t components, std::uint64_t seed) {
  MifvParams params;
  params.components = components;
  return train_bag_classifier(train, params, seed);
}

int predict_bag(const BagClassifier& classifier, const Bag& bag) {
  if (classifier.kind() == ClassifierKind::kMifv && bag.dim() != classifier.encoder()->input_dim())
    throw Error(ErrorCode::kDimMismatch, "bag '" + bag.id + "' has dim " + std::to_string(bag.dim()) +
                                             ", classifier expects " +
                                             std::to_string(classifier.encoder()->input_dim()));
  return classifier.predict(bag);
}

}  // namespace stablemil
