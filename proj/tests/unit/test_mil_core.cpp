#include "doctest.h"
#include "helpers.hpp"

using namespace stablemil;
using th::bag;
using th::inst;

TEST_CASE("oracle label follows the OR rule") {
  using R = InstanceRole;
  CHECK(oracle_label(std::vector<R>{R::kNegative, R::kNoisy, R::kNegative}) == 0);
  CHECK(oracle_label(std::vector<R>{R::kNegative, R::kCausal}) == 1);
  CHECK(oracle_label(std::vector<R>{R::kCausal, R::kCausal, R::kNoisy}) == 1);
  CHECK(oracle_label(std::vector<R>{}) == 0);
}

TEST_CASE("oracle label rejects unknown truth") {
  const auto b = bag("b", {inst({1.0}, InstanceRole::kCausal), inst({2.0})}, 1);
  CHECK_THROWS_AS(oracle_label(b), Error);
  try {
    oracle_label(b);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownTruth);
  }
}

TEST_CASE("monotonicity of the OR rule") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> role(0, 2), len(1, 6);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<InstanceRole> roles(static_cast<std::size_t>(len(rng)));
    for (auto& r : roles) r = static_cast<InstanceRole>(role(rng));
    const int y = oracle_label(roles);
    auto grown = roles;
    grown.push_back(static_cast<InstanceRole>(role(rng)));
    if (y == 1) CHECK(oracle_label(grown) == 1);
    for (std::size_t i = 0; i < roles.size(); ++i) {
      if (roles[i] == InstanceRole::kCausal) continue;
      auto shrunk = roles;
      shrunk.erase(shrunk.begin() + static_cast<std::ptrdiff_t>(i));
      CHECK(oracle_label(shrunk) == y);
    }
  }
}

TEST_CASE("role names round trip") {
  for (auto r : {InstanceRole::kCausal, InstanceRole::kNoisy, InstanceRole::kNegative, InstanceRole::kUnknown})
    CHECK(parse_role(to_string(r)) == r);
  CHECK_THROWS_AS(parse_role("bogus"), Error);
}

TEST_CASE("dataset counts and validation") {
  auto ds = make_dataset({bag("a", {inst({1, 2})}, 1), bag("b", {inst({3, 4}), inst({5, 6})}, 0),
                          bag("c", {inst({0, 0})}, 0)});
  CHECK(ds.dim == 2);
  CHECK(ds.size() == 3);
  CHECK(ds.positive_count() == 1);
  CHECK(ds.negative_count() == 2);
  CHECK(ds.positive_count() + ds.negative_count() == ds.size());
  CHECK(ds.total_instances() == 4);
  CHECK(ds.negatives().size() == 2);

  CHECK_THROWS_AS(make_dataset({}), Error);
  try {
    make_dataset({bag("a", {inst({1, 2})}, 1), bag("b", {inst({3})}, 0)});
    FAIL("expected DimMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimMismatch);
  }
  CHECK_THROWS_AS(make_dataset({bag("a", {}, 1)}), Error);
  CHECK_THROWS_AS(make_dataset({bag("a", {inst({1.0})}, 2)}), Error);
  CHECK_THROWS_AS(make_dataset({bag("a", {inst({std::nan("")})}, 1)}), Error);
}

TEST_CASE("ragged bags are accepted") {
  auto ds = make_dataset({bag("a", {inst({1})}, 1), bag("b", {inst({1}), inst({2}), inst({3})}, 0)});
  CHECK(ds.bags[0].size() == 1);
  CHECK(ds.bags[1].size() == 3);
}

TEST_CASE("squared distance") {
  CHECK(squared_distance(std::vector<double>{0, 0}, std::vector<double>{3, 4}) == 25.0);
  CHECK_THROWS_AS(squared_distance(std::vector<double>{0}, std::vector<double>{3, 4}), Error);
}
