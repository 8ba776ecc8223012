#include "stablemil/stable_select.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "stablemil/parallel.hpp"
#include "stablemil/rng.hpp"

namespace stablemil {

namespace {

void require_negative(const Bag& bag) {
  if (bag.label != 0) throw Error(ErrorCode::kNotNegativeBag, "bag '" + bag.id + "' is not negative");
}

std::vector<const Bag*> pointers(const std::vector<Bag>& bags) {
  std::vector<const Bag*> out;
  out.reserve(bags.size());
  for (const auto& b : bags) out.push_back(&b);
  return out;
}

struct NegativeCaches {
  std::vector<BagClassifier::BaseCache> caches;
};

NegativeCaches build_caches(std::span<const Bag* const> negatives, const BagClassifier& classifier, std::size_t dim,
                            std::size_t jobs) {
  NegativeCaches out;
  out.caches.resize(negatives.size());
  for (const Bag* b : negatives) {
    require_negative(*b);
    if (dim != 0 && b->dim() != dim)
      throw Error(ErrorCode::kDimMismatch, "negative bag '" + b->id + "' dim does not match the candidate");
  }
  parallel_for(negatives.size(), jobs, [&](std::size_t i) { out.caches[i] = classifier.cache_base(*negatives[i]); });
  return out;
}

std::size_t flips_against(const Instance& candidate, const std::string& tag, const NegativeCaches& negatives,
                          const BagClassifier& classifier) {
  const auto stats = classifier.candidate_statistics(candidate);
  std::size_t flips = 0;
  for (const auto& cache : negatives.caches)
    flips += static_cast<std::size_t>(
        classifier.predict_treated(cache, candidate, stats, treated_bag_id(cache.bag->id, tag)));
  return flips;
}

Json candidate_to_json(const ScoredCandidate& c, bool with_features) {
  Json j = Json::object();
  j["source"] = c.source_bag;
  j["index"] = c.index;
  j["score"] = c.score;
  j["flips"] = c.flips;
  j["truth"] = std::string(to_string(c.instance.truth));
  if (with_features) j["features"] = c.instance.features;
  return j;
}

ScoredCandidate candidate_from_json(const Json& j) {
  ScoredCandidate c;
  c.source_bag = j.at("source").get<std::string>();
  c.index = j.at("index").get<std::size_t>();
  c.score = j.at("score").get<double>();
  c.flips = j.at("flips").get<std::size_t>();
  c.instance.truth = parse_role(j.at("truth").get<std::string>());
  if (j.contains("features")) c.instance.features = j.at("features").get<std::vector<double>>();
  return c;
}

}  // namespace

TreatedBag construct_treated_bag(const Instance& candidate, const Bag& negative, std::string_view candidate_tag) {
  require_negative(negative);
  if (candidate.dim() != negative.dim())
    throw Error(ErrorCode::kDimMismatch, "candidate dim " + std::to_string(candidate.dim()) + " vs bag '" +
                                             negative.id + "' dim " + std::to_string(negative.dim()));
  TreatedBag t;
  t.base_id = negative.id;
  t.candidate = candidate;
  t.bag.id = treated_bag_id(negative.id, candidate_tag);
  t.bag.instances = negative.instances;
  t.bag.instances.push_back(candidate);
  // The true label of a treated bag is only known under full ground truth.
  t.bag.label = t.bag.all_truths_known() ? oracle_label(t.bag) : negative.label;
  t.bag.background = negative.background;
  return t;
}

std::size_t count_flips(const Instance& candidate, std::span<const Bag* const> negatives,
                        const BagClassifier& classifier, std::string_view candidate_tag) {
  if (negatives.empty()) throw Error(ErrorCode::kEmptyNegatives, "no negative bags to treat");
  const auto caches = build_caches(negatives, classifier, candidate.dim(), 1);
  return flips_against(candidate, std::string(candidate_tag), caches, classifier);
}

double score_instance(const Instance& candidate, const std::vector<Bag>& negatives, const BagClassifier& classifier,
                      std::string_view candidate_tag) {
  const auto ptrs = pointers(negatives);
  const auto flips = count_flips(candidate, ptrs, classifier, candidate_tag);
  return static_cast<double>(flips) / static_cast<double>(negatives.size());
}

double quantile_linear(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "quantile of an empty list");
  std::sort(values.begin(), values.end());
  const double pos = static_cast<double>(values.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

NegativeSplit split_negatives(std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(substream_seed(seed, "threshold-split"));
  seeded_shuffle(order.begin(), order.end(), rng);
  NegativeSplit split;
  const std::size_t half = count / 2;
  split.first.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
  split.second.assign(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
  return split;
}

ThresholdResult select_threshold_detailed(const std::vector<Bag>& negatives, const BagClassifier& classifier,
                                          std::uint64_t seed, std::size_t jobs) {
  if (negatives.size() < 2)
    throw Error(ErrorCode::kTooFewNegatives, "threshold selection needs at least 2 negative bags");
  for (const auto& b : negatives) require_negative(b);
  ThresholdResult result;
  result.split = split_negatives(negatives.size(), seed);

  std::vector<const Bag*> receivers;
  for (auto i : result.split.second) receivers.push_back(&negatives[i]);
  const auto caches = build_caches(receivers, classifier, negatives.front().dim(), jobs);

  struct Item {
    const Instance* instance;
    std::string tag;
  };
  std::vector<Item> items;
  for (auto i : result.split.first)
    for (std::size_t k = 0; k < negatives[i].size(); ++k)
      items.push_back({&negatives[i].instances[k], negatives[i].id + ":" + std::to_string(k)});

  result.negative_scores.resize(items.size());
  const double denom = static_cast<double>(receivers.size());
  parallel_for(items.size(), jobs, [&](std::size_t t) {
    result.negative_scores[t] =
        static_cast<double>(flips_against(*items[t].instance, items[t].tag, caches, classifier)) / denom;
  });
  result.tau = third_quartile(result.negative_scores);
  return result;
}

double select_threshold(const std::vector<Bag>& negatives, const BagClassifier& classifier, std::uint64_t seed) {
  return select_threshold_detailed(negatives, classifier, seed).tau;
}

StablePool learn_stable_instances(const MILDataset& train, const BagClassifier& classifier, double tau,
                                  const SelectionOptions& options) {
  const auto pos = train.positives();
  auto neg = train.negatives();
  if (pos.empty() || neg.empty())
    throw Error(ErrorCode::kMissingClass, "stable instance learning needs positive and negative bags");

  if (options.negative_subsample > 0 && options.negative_subsample < neg.size()) {
    Rng rng(substream_seed(options.subsample_seed, "negative-subsample"));
    seeded_shuffle(neg.begin(), neg.end(), rng);
    neg.resize(options.negative_subsample);
    // Keep dataset order so the result is order-stable.
    std::sort(neg.begin(), neg.end());
  }

  // Candidate pool: union of positive-bag instances, exact duplicates once.
  StablePool pool;
  pool.tau = tau;
  pool.negatives_used = neg.size();
  std::map<std::vector<double>, std::size_t> seen;
  for (const Bag* b : pos)
    for (std::size_t k = 0; k < b->size(); ++k) {
      if (!seen.emplace(b->instances[k].features, pool.all_scores.size()).second) continue;
      ScoredCandidate c;
      c.instance = b->instances[k];
      c.source_bag = b->id;
      c.index = k;
      pool.all_scores.push_back(std::move(c));
    }

  const auto caches = build_caches(neg, classifier, train.dim, options.jobs);
  const double denom = static_cast<double>(neg.size());
  parallel_for(pool.all_scores.size(), options.jobs, [&](std::size_t t) {
    auto& c = pool.all_scores[t];
    c.flips = flips_against(c.instance, c.tag(), caches, classifier);
    c.score = static_cast<double>(c.flips) / denom;
  });

  for (const auto& c : pool.all_scores)
    if (c.score >= tau) pool.members.push_back(c);

  if (pool.members.empty()) {
    pool.fallback = true;
    const auto take = static_cast<std::size_t>(
        std::ceil(options.fallback_fraction * static_cast<double>(pool.all_scores.size())));
    std::vector<std::size_t> order(pool.all_scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return pool.all_scores[a].score > pool.all_scores[b].score;
    });
    order.resize(std::max<std::size_t>(1, std::min(take, order.size())));
    std::sort(order.begin(), order.end());
    for (auto i : order) pool.members.push_back(pool.all_scores[i]);
  }
  return pool;
}

EffectDecomposition brute_force_effect(const Instance& candidate, const std::vector<Bag>& population) {
  if (population.empty()) throw Error(ErrorCode::kEmptyDataset, "empty population");
  if (candidate.truth == InstanceRole::kUnknown)
    throw Error(ErrorCode::kUnknownTruth, "candidate instance has unknown truth");

  std::size_t n_neg = 0;
  std::size_t n_pos = 0;
  std::size_t treated_pos = 0;
  std::size_t control_pos = 0;
  std::size_t treated_pos_given_neg = 0;
  std::size_t unique_positive = 0;
  for (const auto& bag : population) {
    std::vector<InstanceRole> observed;
    std::vector<InstanceRole> control;
    bool contains = false;
    for (const auto& inst : bag.instances) {
      observed.push_back(inst.truth);
      if (inst.features == candidate.features) {
        contains = true;
        continue;
      }
      control.push_back(inst.truth);
    }
    std::vector<InstanceRole> treated = observed;
    if (!contains) treated.push_back(candidate.truth);

    const int y = oracle_label(observed);
    const int y_treated = oracle_label(treated);
    const int y_control = oracle_label(control);
    treated_pos += static_cast<std::size_t>(y_treated);
    control_pos += static_cast<std::size_t>(y_control);
    if (y == 0) {
      ++n_neg;
      treated_pos_given_neg += static_cast<std::size_t>(y_treated);
    } else {
      ++n_pos;
      if (y_control == 0) ++unique_positive;
    }
  }

  const double n = static_cast<double>(population.size());
  EffectDecomposition e;
  e.treated_mean = static_cast<double>(treated_pos) / n;
  e.control_mean = static_cast<double>(control_pos) / n;
  e.tau = e.treated_mean - e.control_mean;
  e.p_negative = static_cast<double>(n_neg) / n;
  e.p_positive = static_cast<double>(n_pos) / n;
  e.treated_given_negative = n_neg ? static_cast<double>(treated_pos_given_neg) / static_cast<double>(n_neg) : 0.0;
  e.p_unique = n_pos ? static_cast<double>(unique_positive) / static_cast<double>(n_pos) : 0.0;
  e.decomposition = e.p_negative * e.treated_given_negative + e.p_unique * e.p_positive;
  if (std::abs(e.tau - e.decomposition) > 1e-12)
    throw std::logic_error("treatment-effect decomposition identity violated");
  return e;
}

std::vector<Bag> negative_bags(const MILDataset& dataset) {
  std::vector<Bag> out;
  for (const auto& b : dataset.bags)
    if (b.label == 0) out.push_back(b);
  return out;
}

Json StablePool::to_json() const {
  Json j = Json::object();
  j["tau"] = tau;
  j["fallback"] = fallback;
  j["negatives_used"] = negatives_used;
  j["size"] = members.size();
  Json m = Json::array();
  for (const auto& c : members) m.push_back(candidate_to_json(c, true));
  j["members"] = std::move(m);
  Json all = Json::array();
  for (const auto& c : all_scores) all.push_back(candidate_to_json(c, false));
  j["all_scores"] = std::move(all);
  return j;
}

StablePool StablePool::from_json(const Json& j) {
  try {
    StablePool pool;
    pool.tau = j.at("tau").get<double>();
    pool.fallback = j.at("fallback").get<bool>();
    pool.negatives_used = j.value("negatives_used", std::size_t{0});
    for (const auto& c : j.at("members")) pool.members.push_back(candidate_from_json(c));
    for (const auto& c : j.at("all_scores")) pool.all_scores.push_back(candidate_from_json(c));
    return pool;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("pool: ") + e.what());
  }
}

}  // namespace stablemil
