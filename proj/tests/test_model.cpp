#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>

#include "esp/model.hpp"
#include "test_support.hpp"

using namespace esp;
using namespace esp::test;

TEST_CASE("collateral matrix defaults to identity coupling") {
  CollateralMatrix m;
  for (ResourceType t : kAllResourceTypes)
    for (ResourceType z : kAllResourceTypes)
      CHECK(m.rate(t, z) == (t == z ? 1.0 : 0.0));
  CHECK(m.is_valid());
  CHECK_THROWS_AS(m.set_rate(ResourceType::Storage, ResourceType::Storage, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(m.set_rate(ResourceType::Storage, ResourceType::Compute, -0.1),
                  std::invalid_argument);
}

TEST_CASE("infrastructure validation rejects malformed inputs") {
  CHECK_THROWS_AS(Infrastructure::from_clusters({}), std::invalid_argument);
  CHECK_THROWS_AS(Infrastructure::from_clusters({{}}), std::invalid_argument);
  CHECK_THROWS_AS(Infrastructure::from_clusters({{make_node(1, 1, 1, 1), make_node(1, 1, 1, 1)}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Infrastructure::from_clusters({{make_node(0, -1, 1, 1)}}),
                  std::invalid_argument);

  Infrastructure infra = Infrastructure::from_clusters(
      {{make_node(0, 50, 100, 20)}, {make_node(1, 50, 200, 30), make_node(2, 50, 300, 40)}});
  CHECK(infra.cluster_count() == 2);
  CHECK(infra.total_nodes() == 3);
  CHECK(infra.node(2).cluster_id == 1);
  CHECK(infra.cluster_capacity(1).s == doctest::Approx(500.0));
  CHECK_THROWS_AS(infra.node(99), std::out_of_range);
}

TEST_CASE("slice request validation") {
  SliceRequest r = make_request(0, ResourceType::Networking, 2.0, {10.0, 0.0});
  CHECK_NOTHROW(r.validate(2));
  CHECK_THROWS_AS(r.validate(3), std::invalid_argument);  // wrong demand length
  r.value = 0.0;
  CHECK_THROWS_AS(r.validate(2), std::invalid_argument);
  r.value = 2.0;
  r.demand = {0.0, 0.0};
  CHECK_THROWS_AS(r.validate(2), std::invalid_argument);  // no positive demand
}

TEST_CASE("collateral consumption of a networking allocation") {
  EdgeNode node = make_node(0, 50, 1e6, 200, video_collateral());

  SUBCASE("50 RBs of networking consume 24.5 GIPS of compute") {
    std::map<int, TypedAmount> allocs{{0, {ResourceType::Networking, 50.0}}};
    ResourceVector used = collateral_consumption(node, allocs);
    CHECK(used.c == doctest::Approx(24.5));
    CHECK(used.n == doctest::Approx(50.0));
    CHECK(used.s == doctest::Approx(26.178 * 50.0));
  }

  SUBCASE("empty allocation map consumes nothing") {
    ResourceVector used = collateral_consumption(node, {});
    CHECK(used.n == 0.0);
    CHECK(used.s == 0.0);
    CHECK(used.c == 0.0);
  }

  SUBCASE("identity collateral touches only the primary type") {
    EdgeNode plain = make_node(1, 50, 1e6, 200);
    std::map<int, TypedAmount> allocs{{0, {ResourceType::Storage, 10.0}}};
    ResourceVector used = collateral_consumption(plain, allocs);
    CHECK(used.n == 0.0);
    CHECK(used.s == doctest::Approx(10.0));
    CHECK(used.c == 0.0);
  }
}

TEST_CASE("collateral consumption is linear") {
  EdgeNode node = make_node(0, 50, 1e6, 200, video_collateral());
  std::map<int, TypedAmount> a{{0, {ResourceType::Networking, 12.0}},
                               {1, {ResourceType::Storage, 300.0}}};
  std::map<int, TypedAmount> b{{2, {ResourceType::Compute, 40.0}}};
  std::map<int, TypedAmount> both = a;
  both.insert(b.begin(), b.end());

  ResourceVector ua = collateral_consumption(node, a);
  ResourceVector ub = collateral_consumption(node, b);
  ResourceVector uboth = collateral_consumption(node, both);
  for (ResourceType z : kAllResourceTypes)
    CHECK(uboth.get(z) == doctest::Approx(ua.get(z) + ub.get(z)));

  std::map<int, TypedAmount> scaled;
  for (auto [id, ta] : a) scaled[id] = TypedAmount{ta.type, 3.0 * ta.amount};
  ResourceVector us = collateral_consumption(node, scaled);
  for (ResourceType z : kAllResourceTypes)
    CHECK(us.get(z) == doctest::Approx(3.0 * ua.get(z)));
}

TEST_CASE("validate_solution") {
  Infrastructure infra =
      Infrastructure::from_clusters({{make_node(0, 50, 1000, 20, video_collateral())}});
  std::vector<SliceRequest> requests = {
      make_request(0, ResourceType::Networking, 5.0, {50.0})};

  SUBCASE("empty solution is feasible with zero residuals") {
    SlicingSolution sol;
    ValidationReport rep = validate_solution(infra, requests, sol);
    CHECK(rep.feasible);
    CHECK(rep.max_demand_residual == 0.0);
    CHECK(rep.max_capacity_violation == 0.0);
  }

  SUBCASE("saturating allocation with identity collateral is feasible") {
    Infrastructure plain = Infrastructure::from_clusters({{make_node(0, 50, 1000, 20)}});
    SlicingSolution sol;
    sol.admission[0] = 1;
    sol.allocation[{0, 0}] = 50.0;
    ValidationReport rep = validate_solution(plain, requests, sol);
    CHECK(rep.feasible);
  }

  SUBCASE("compute violation is reported from collateral coupling") {
    // 50 RBs on the coupled node consume 24.5 GIPS against a 20 GIPS cap;
    // the expected violation is recomputed here by direct summation.
    Infrastructure roomy =
        Infrastructure::from_clusters({{make_node(0, 50, 1e6, 20, video_collateral())}});
    SlicingSolution sol;
    sol.admission[0] = 1;
    sol.allocation[{0, 0}] = 50.0;
    ValidationReport rep = validate_solution(roomy, requests, sol);
    const double expected = 0.49 * 50.0 - 20.0;
    CHECK_FALSE(rep.feasible);
    CHECK(rep.capacity_violations.at({0, ResourceType::Compute}) == doctest::Approx(expected));
    CHECK(rep.worst_node == 0);
    CHECK(rep.worst_type == ResourceType::Compute);
  }

  SUBCASE("allocations for rejected requests are flagged") {
    SlicingSolution sol;
    sol.admission[0] = 0;
    sol.allocation[{0, 0}] = 10.0;
    ValidationReport rep = validate_solution(infra, requests, sol);
    CHECK_FALSE(rep.feasible);
    CHECK(rep.demand_residuals.at({0, 0}) == doctest::Approx(10.0));
  }

  SUBCASE("unknown ids are rejected") {
    SlicingSolution sol;
    sol.admission[7] = 1;
    CHECK_THROWS_AS(validate_solution(infra, requests, sol), std::out_of_range);
    SlicingSolution sol2;
    sol2.allocation[{0, 42}] = 1.0;
    CHECK_THROWS_AS(validate_solution(infra, requests, sol2), std::out_of_range);
  }
}
