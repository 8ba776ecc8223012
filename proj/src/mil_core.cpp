#include "stablemil/mil_core.hpp"

#include <algorithm>
#include <cmath>

namespace stablemil {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownTruth: return "UnknownTruth";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kNotNegativeBag: return "NotNegativeBag";
    case ErrorCode::kEmptyNegatives: return "EmptyNegatives";
    case ErrorCode::kTooFewNegatives: return "TooFewNegatives";
    case ErrorCode::kMissingClass: return "MissingClass";
    case ErrorCode::kTooFewReferences: return "TooFewReferences";
    case ErrorCode::kEmptyPool: return "EmptyPool";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kMissingBackgroundTag: return "MissingBackgroundTag";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

bool is_config_error(ErrorCode code) {
  return code == ErrorCode::kInvalidConfig || code == ErrorCode::kInvalidArgument;
}

std::string_view to_string(InstanceRole role) {
  switch (role) {
    case InstanceRole::kCausal: return "causal";
    case InstanceRole::kNoisy: return "noisy";
    case InstanceRole::kNegative: return "negative";
    case InstanceRole::kUnknown: return "unknown";
  }
  return "unknown";
}

InstanceRole parse_role(std::string_view text) {
  if (text == "causal") return InstanceRole::kCausal;
  if (text == "noisy") return InstanceRole::kNoisy;
  if (text == "negative") return InstanceRole::kNegative;
  if (text == "unknown") return InstanceRole::kUnknown;
  throw Error(ErrorCode::kParseError, "unknown instance role '" + std::string(text) + "'");
}

bool Bag::all_truths_known() const {
  return std::none_of(instances.begin(), instances.end(),
                      [](const Instance& x) { return x.truth == InstanceRole::kUnknown; });
}

std::size_t MILDataset::positive_count() const {
  return static_cast<std::size_t>(
      std::count_if(bags.begin(), bags.end(), [](const Bag& b) { return b.label == 1; }));
}

std::size_t MILDataset::negative_count() const { return bags.size() - positive_count(); }

std::vector<const Bag*> MILDataset::positives() const {
  std::vector<const Bag*> out;
  for (const auto& b : bags)
    if (b.label == 1) out.push_back(&b);
  return out;
}

std::vector<const Bag*> MILDataset::negatives() const {
  std::vector<const Bag*> out;
  for (const auto& b : bags)
    if (b.label == 0) out.push_back(&b);
  return out;
}

std::size_t MILDataset::total_instances() const {
  std::size_t n = 0;
  for (const auto& b : bags) n += b.size();
  return n;
}

bool MILDataset::structurally_equal(const MILDataset& other) const {
  return dim == other.dim && meta == other.meta && bags == other.bags;
}

void validate(const MILDataset& dataset) {
  if (dataset.bags.empty()) throw Error(ErrorCode::kEmptyDataset, "dataset has no bags");
  if (dataset.dim == 0) throw Error(ErrorCode::kDimMismatch, "feature dimension must be positive");
  for (const auto& bag : dataset.bags) {
    if (bag.instances.empty())
      throw Error(ErrorCode::kInvalidArgument, "bag '" + bag.id + "' has no instances");
    if (bag.label != 0 && bag.label != 1)
      throw Error(ErrorCode::kInvalidArgument, "bag '" + bag.id + "' label is not binary");
    for (const auto& inst : bag.instances) {
      if (inst.dim() != dataset.dim)
        throw Error(ErrorCode::kDimMismatch, "bag '" + bag.id + "' has an instance of dim " +
                                                 std::to_string(inst.dim()) + ", expected " +
                                                 std::to_string(dataset.dim));
      for (double v : inst.features)
        if (!std::isfinite(v))
          throw Error(ErrorCode::kInvalidArgument, "bag '" + bag.id + "' has a non-finite feature");
    }
  }
}

MILDataset make_dataset(std::vector<Bag> bags, std::map<std::string, std::string> meta) {
  MILDataset ds;
  ds.bags = std::move(bags);
  ds.meta = std::move(meta);
  ds.dim = ds.bags.empty() ? 0 : ds.bags.front().dim();
  validate(ds);
  return ds;
}

int oracle_label(std::span<const InstanceRole> truths) {
  int label = 0;
  for (auto t : truths) {
    if (t == InstanceRole::kUnknown)
      throw Error(ErrorCode::kUnknownTruth, "oracle labeling needs every instance truth");
    if (t == InstanceRole::kCausal) label = 1;
  }
  return label;
}

int oracle_label(const Bag& bag) {
  std::vector<InstanceRole> truths;
  truths.reserve(bag.instances.size());
  for (const auto& x : bag.instances) truths.push_back(x.truth);
  try {
    return oracle_label(truths);
  } catch (const Error&) {
    throw Error(ErrorCode::kUnknownTruth, "bag '" + bag.id + "' has an instance with unknown truth");
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::kDimMismatch,
                "vectors of dim " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace stablemil
