#include <cmath>
#include <map>

#include "doctest.h"
#include "stablemil/dataset_io.hpp"
#include "stablemil/shift_bench.hpp"

using namespace stablemil;

namespace {
ErrorCode code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error");
  return ErrorCode::kInvalidArgument;
}
}  // namespace

TEST_CASE("pinned settings") {
  const auto s1 = pinned_setting(1);
  CHECK(s1.dim() == 10);
  CHECK(s1.bags_total == 400);
  CHECK(s1.instances_per_bag == 20);
  CHECK(s1.concepts[0].mean[0] == 3.0);
  CHECK(s1.concepts[1].mean[1] == 3.0);
  CHECK(s1.concepts[2].mean[0] == -3.0);
  CHECK(s1.concepts[3].mean[1] == -3.0);
  CHECK(s1.concepts[0].variance[4] == 1.0);
  const auto s2 = pinned_setting(2);
  CHECK(s2.concepts[0].mean[0] == 2.0);
  CHECK(s2.concepts[3].variance[0] == 1.5);
  CHECK(code([] { pinned_setting(3); }) == ErrorCode::kInvalidConfig);
}

TEST_CASE("generated bags satisfy the composition and labeling rules") {
  auto cfg = pinned_setting(1);
  cfg.seed = 3;
  const auto pop = generate_population(cfg);
  CHECK(pop.size() == 400);
  CHECK(pop.positive_count() == 200);
  for (const auto& b : pop.bags) {
    CHECK(b.size() == 20);
    CHECK(oracle_label(b) == b.label);
    std::size_t causal = 0;
    std::map<InstanceRole, int> roles;
    for (const auto& x : b.instances) {
      causal += x.truth == InstanceRole::kCausal;
      ++roles[x.truth];
    }
    if (b.label == 1) {
      CHECK(causal == 1);
      CHECK((b.background == "N1" || b.background == "N2"));
    } else {
      CHECK(causal == 0);
      CHECK((b.background == "N1" || b.background == "N2" || b.background == "N3"));
    }
    // background fill comes from one concept only
    const auto bg_role = b.background == "N1" ? InstanceRole::kNoisy : InstanceRole::kNegative;
    CHECK(roles[bg_role] == static_cast<int>(20 - causal));
  }
  CHECK(pop.meta.count("config_hash") == 1);
}

TEST_CASE("generation is deterministic per seed") {
  auto cfg = pinned_setting(2);
  cfg.seed = 9;
  CHECK(dataset_to_string(generate_population(cfg)) == dataset_to_string(generate_population(cfg)));
  auto other = cfg;
  other.seed = 10;
  CHECK(dataset_to_string(generate_population(cfg)) != dataset_to_string(generate_population(other)));
}

TEST_CASE("empirical concept means") {
  auto cfg = pinned_setting(1);
  cfg.bags_total = 3200;
  cfg.seed = 4;
  const auto pop = generate_population(cfg);
  // at least 1e4 background instances per concept; compare all d coordinates
  std::map<std::string, std::vector<double>> sum;
  std::map<std::string, double> count;
  for (const auto& b : pop.bags)
    for (const auto& x : b.instances) {
      if (x.truth == InstanceRole::kCausal) continue;
      auto& s = sum[b.background];
      s.resize(10, 0.0);
      for (std::size_t d = 0; d < 10; ++d) s[d] += x.features[d];
      count[b.background] += 1;
    }
  const std::map<std::string, int> slot{{"N1", 1}, {"N2", 2}, {"N3", 3}};
  for (const auto& [name, s] : sum) {
    REQUIRE(count[name] >= 1e4);
    const auto& mu = cfg.concepts[static_cast<std::size_t>(slot.at(name))].mean;
    for (std::size_t d = 0; d < 10; ++d) CHECK(std::abs(s[d] / count[name] - mu[d]) < 3.0 / std::sqrt(count[name]));
  }
}

TEST_CASE("config text round trip, hashing and validation") {
  auto cfg = pinned_setting(2);
  cfg.seed = 77;
  const auto back = ShiftConfig::parse(cfg.to_text());
  CHECK(back.to_text() == cfg.to_text());
  CHECK(back.hash() == cfg.hash());
  auto changed = cfg;
  changed.a_hi = 0.9;
  CHECK(changed.hash() != cfg.hash());
  changed = cfg;
  changed.concepts[1].variance[3] = 2.0;
  CHECK(changed.hash() != cfg.hash());

  CHECK(code([] { ShiftConfig::parse("bogus_key = 1\n"); }) == ErrorCode::kInvalidConfig);
  CHECK(code([] { ShiftConfig::parse("dim = 2\na_range = 0.4 0.9\n"); }) == ErrorCode::kInvalidConfig);
  CHECK(code([] { ShiftConfig::parse("dim = 2\nconcept.P.variance = -1\n"); }) == ErrorCode::kInvalidConfig);
  const auto small = ShiftConfig::parse("# comment\ndim = 3\nbags_total = 10\nconcept.P.mean = 1\n");
  CHECK(small.dim() == 3);
  CHECK(small.concepts[0].mean == std::vector<double>{1, 1, 1});
  CHECK(code([] { ShiftConfig::load("/nonexistent.cfg"); }) == ErrorCode::kInvalidConfig);
}

TEST_CASE("selection probabilities") {
  CHECK(selection_probability(1, "N1", 0.8) == 0.8);
  CHECK(selection_probability(1, "N2", 0.8) == doctest::Approx(0.2));
  CHECK(selection_probability(0, "N1", 0.8) == doctest::Approx(0.2));
  CHECK(selection_probability(0, "N2", 0.8) == 0.8);
  CHECK(selection_probability(0, "N3", 0.8) == 0.8);
}

TEST_CASE("a = 1 is a deterministic split") {
  auto cfg = pinned_setting(1);
  cfg.seed = 5;
  const auto pop = generate_population(cfg);
  const auto s = biased_split(pop, 1.0, 5);
  CHECK(s.train.size() + s.test.size() == pop.size());
  for (const auto& b : s.train.bags) {
    if (b.label == 1) CHECK(b.background == "N1");
    else CHECK(b.background != "N1");
  }
  for (const auto& b : s.test.bags) {
    if (b.label == 1) CHECK(b.background == "N2");
    else CHECK(b.background == "N1");
  }
  CHECK(s.a_used == 1.0);
  CHECK(s.train.meta.at("a_used") == "1");
}

TEST_CASE("split partitions the population and is reproducible") {
  auto cfg = pinned_setting(1);
  cfg.seed = 6;
  const auto pop = generate_population(cfg);
  const auto a = biased_split(pop, 0.7, 11);
  const auto b = biased_split(pop, 0.7, 11);
  CHECK(dataset_to_string(a.train) == dataset_to_string(b.train));
  CHECK(a.train.size() + a.test.size() == pop.size());
  std::map<std::string, int> seen;
  for (const auto& bg : a.train.bags) ++seen[bg.id];
  for (const auto& bg : a.test.bags) ++seen[bg.id];
  CHECK(seen.size() == pop.size());
  for (const auto& [id, n] : seen) CHECK(n == 1);
  CHECK(a.truth_index.size() == pop.size());
  // over-representation of N1 among training positives
  auto frac = [](const MILDataset& ds, int label) {
    double n1 = 0, all = 0;
    for (const auto& bg : ds.bags)
      if (bg.label == label) {
        all += 1;
        n1 += bg.background == "N1";
      }
    return n1 / all;
  };
  CHECK(frac(a.train, 1) > frac(a.test, 1));
  CHECK(frac(a.train, 0) < frac(a.test, 0));
}

TEST_CASE("split errors") {
  auto cfg = pinned_setting(1);
  auto pop = generate_population(cfg);
  CHECK(code([&] { biased_split(pop, 0.3, 1); }) == ErrorCode::kInvalidArgument);
  pop.bags[0].background.clear();
  CHECK(code([&] { biased_split(pop, 0.8, 1); }) == ErrorCode::kMissingBackgroundTag);
}

TEST_CASE("draw_a") {
  CHECK(draw_a(0.8, 0.8, 3) == 0.8);
  double s = 0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const double a = draw_a(0.65, 0.95, i);
    CHECK(a >= 0.65);
    CHECK(a <= 0.95);
    s += a;
  }
  CHECK(std::abs(s / 10000 - 0.8) < 0.01);
}
