#pragma once

#include <random>
#include <string>
#include <vector>

#include "stablemil/mil_core.hpp"

namespace th {

using stablemil::Bag;
using stablemil::Instance;
using stablemil::InstanceRole;

inline Instance inst(std::vector<double> f, InstanceRole r = InstanceRole::kUnknown) { return Instance{std::move(f), r}; }

inline Bag bag(std::string id, std::vector<Instance> instances, int label) {
  Bag b;
  b.id = std::move(id);
  b.instances = std::move(instances);
  b.label = label;
  return b;
}

// Random dataset with ragged bags; truths optional.
inline stablemil::MILDataset random_dataset(std::mt19937_64& rng, bool truths) {
  std::uniform_int_distribution<int> nb(1, 6), ni(1, 5), dim(1, 4), role(0, 2);
  std::normal_distribution<double> g(0.0, 1e3);
  const int d = dim(rng);
  std::vector<Bag> bags;
  const int B = nb(rng);
  for (int b = 0; b < B; ++b) {
    Bag bag;
    bag.id = "bag" + std::to_string(b);
    const int n = ni(rng);
    for (int i = 0; i < n; ++i) {
      Instance x;
      for (int k = 0; k < d; ++k) x.features.push_back(g(rng) * std::ldexp(1.0, static_cast<int>(rng() % 40) - 20));
      x.truth = truths ? static_cast<InstanceRole>(role(rng)) : InstanceRole::kUnknown;
      bag.instances.push_back(std::move(x));
    }
    bag.label = truths ? stablemil::oracle_label(bag) : static_cast<int>(rng() % 2);
    if (rng() % 3 == 0) bag.background = "N" + std::to_string(1 + rng() % 3);
    bags.push_back(std::move(bag));
  }
  std::map<std::string, std::string> meta;
  if (rng() % 2) meta["seed"] = std::to_string(rng() % 1000);
  return stablemil::make_dataset(std::move(bags), meta);
}

}  // namespace th
