#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <stdexcept>

#include "esp/exact.hpp"
#include "test_support.hpp"

using namespace esp;
using namespace esp::test;


TEST_CASE("build_esp column and row structure") {
  Infrastructure infra = Infrastructure::from_clusters(
      {{make_node(0, 50, 1000, 100), make_node(1, 50, 1000, 100)}});
  std::vector<SliceRequest> reqs = {make_request(0, ResourceType::Networking, 2.0, {30.0}),
                                    make_request(1, ResourceType::Compute, 1.0, {40.0})};
  EspInstance inst = build_esp(infra, reqs, ValueMode::Profit);
  CHECK(inst.num_y == 2);
  CHECK(inst.sigma_cols.size() == 4);  // 2 requests x 2 nodes
  CHECK(inst.relaxation.eq_lhs.size() == 2);
  CHECK(inst.relaxation.le_lhs.size() == 6);  // 2 nodes x 3 types

  SUBCASE("zero-demand clusters get no sigma columns") {
    Infrastructure two = Infrastructure::from_clusters(
        {{make_node(0, 50, 1000, 100)}, {make_node(1, 50, 1000, 100)}});
    std::vector<SliceRequest> r2 = {make_request(0, ResourceType::Networking, 2.0, {30.0, 0.0})};
    EspInstance i2 = build_esp(two, r2, ValueMode::Profit);
    CHECK(i2.sigma_cols.size() == 1);
    CHECK(i2.sigma_cols[0].second == 0);
  }

  SUBCASE("demand arrays of the wrong length are rejected") {
    std::vector<SliceRequest> bad = {make_request(0, ResourceType::Networking, 2.0, {30.0, 1.0})};
    CHECK_THROWS_AS(build_esp(infra, bad, ValueMode::Profit), std::invalid_argument);
  }

  SUBCASE("duplicate request ids are rejected") {
    std::vector<SliceRequest> dup = {make_request(3, ResourceType::Networking, 2.0, {30.0}),
                                     make_request(3, ResourceType::Compute, 1.0, {10.0})};
    CHECK_THROWS_AS(build_esp(infra, dup, ValueMode::Profit), std::invalid_argument);
  }

  SUBCASE("column count matches the closed-form formula") {
    SmallFixture fx = random_fixture(7, 3, 4, 8);
    EspInstance big = build_esp(fx.infra, fx.requests, ValueMode::Profit);
    long expected_sigma = 0;
    for (const SliceRequest& r : fx.requests)
      for (int k = 0; k < fx.infra.cluster_count(); ++k)
        if (r.demand[k] > 0.0) expected_sigma += fx.infra.cluster(k).size();
    CHECK(big.total_columns() == static_cast<int>(fx.requests.size()) + expected_sigma);
    long expected_eq = 0;
    for (const SliceRequest& r : fx.requests)
      for (double d : r.demand) expected_eq += d > 0.0 ? 1 : 0;
    CHECK(big.relaxation.eq_lhs.size() == static_cast<size_t>(expected_eq));
    CHECK(big.relaxation.le_lhs.size() == static_cast<size_t>(3 * fx.infra.total_nodes()));
  }
}

TEST_CASE("solve_exact basics") {
  SUBCASE("no requests: zero objective, empty allocation") {
    Infrastructure infra = Infrastructure::from_clusters({{make_node(0, 50, 1000, 100)}});
    SlicingSolution sol = solve_exact(build_esp(infra, {}, ValueMode::Profit));
    CHECK(sol.objective == 0.0);
    CHECK(sol.allocation.empty());
  }

  SUBCASE("saturating single request is admitted exactly") {
    Infrastructure infra = Infrastructure::from_clusters({{make_node(0, 50, 1000, 100)}});
    std::vector<SliceRequest> reqs = {make_request(0, ResourceType::Networking, 3.5, {50.0})};
    SlicingSolution sol = solve_exact(build_esp(infra, reqs, ValueMode::Profit));
    CHECK(sol.admission.at(0) == 1);
    CHECK(sol.objective == doctest::Approx(3.5));
    CHECK(sol.allocated_to(0, 0) == doctest::Approx(50.0));
    CHECK(validate_solution(infra, reqs, sol).feasible);
  }

  SUBCASE("oversized request is rejected, not an error") {
    Infrastructure infra = Infrastructure::from_clusters({{make_node(0, 50, 1000, 100)}});
    std::vector<SliceRequest> reqs = {make_request(0, ResourceType::Networking, 3.5, {80.0})};
    SlicingSolution sol = solve_exact(build_esp(infra, reqs, ValueMode::Profit));
    CHECK(sol.objective == 0.0);
    CHECK(sol.admission.at(0) == 0);
  }
}

TEST_CASE("brute force oracle basics") {
  Infrastructure infra = Infrastructure::from_clusters({{make_node(0, 50, 1000, 100)}});

  SUBCASE("empty batch") {
    SlicingSolution sol = brute_force(build_esp(infra, {}, ValueMode::Profit));
    CHECK(sol.objective == 0.0);
  }

  SUBCASE("infeasibly large request is rejected") {
    std::vector<SliceRequest> reqs = {make_request(0, ResourceType::Storage, 9.0, {5000.0})};
    SlicingSolution sol = brute_force(build_esp(infra, reqs, ValueMode::Profit));
    CHECK(sol.objective == 0.0);
    CHECK(sol.admission.at(0) == 0);
  }

  SUBCASE("request count guard") {
    std::vector<SliceRequest> reqs;
    for (int i = 0; i < 16; ++i) reqs.push_back(make_request(i, ResourceType::Networking, 1.0, {1.0}));
    CHECK_THROWS_AS(brute_force(build_esp(infra, reqs, ValueMode::Profit)), std::invalid_argument);
  }

  SUBCASE("splittable knapsack: 3 unit-value items over 2 nodes") {
    // Two 50-RB nodes; items of 40, 40, 30 RBs in one cluster. Any two fit
    // (splitting allowed), all three need 110 > 100: optimum is 2.
    Infrastructure two = Infrastructure::from_clusters(
        {{make_node(0, 50, 1000, 100), make_node(1, 50, 1000, 100)}});
    std::vector<SliceRequest> reqs = {make_request(0, ResourceType::Networking, 1.0, {40.0}),
                                      make_request(1, ResourceType::Networking, 1.0, {40.0}),
                                      make_request(2, ResourceType::Networking, 1.0, {30.0})};
    SlicingSolution sol = brute_force(build_esp(two, reqs, ValueMode::Count));
    CHECK(sol.objective == doctest::Approx(2.0));
    CHECK(validate_solution(two, reqs, sol).feasible);
  }
}

TEST_CASE("exact solver matches brute force on random instances") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    SmallFixture fx = random_fixture(seed, 1 + static_cast<int>(seed % 2), 2, 4);
    for (ValueMode mode : {ValueMode::Profit, ValueMode::Count}) {
      EspInstance inst = build_esp(fx.infra, fx.requests, mode);
      SlicingSolution exact = solve_exact(inst);
      SlicingSolution oracle = brute_force(inst);
      CAPTURE(seed);
      CHECK(exact.objective == doctest::Approx(oracle.objective).epsilon(1e-6));
      CHECK(validate_solution(fx.infra, fx.requests, exact).feasible);
      CHECK(validate_solution(fx.infra, fx.requests, oracle).feasible);
      if (mode == ValueMode::Count)
        CHECK(std::abs(exact.objective - std::round(exact.objective)) < 1e-6);
    }
  }
}

TEST_CASE("admissions are integral and feasible") {
  SmallFixture fx = random_fixture(42, 2, 3, 6);
  SlicingSolution sol = solve_exact(build_esp(fx.infra, fx.requests, ValueMode::Profit));
  for (const auto& [id, y] : sol.admission) {
    (void)id;
    CHECK((y == 0 || y == 1));
  }
  CHECK(validate_solution(fx.infra, fx.requests, sol).feasible);
  CHECK(sol.stats.bnb_nodes >= 1);
  CHECK(sol.stats.lp_pivots >= 1);
}

TEST_CASE("monotonicity: capacity growth and request removal") {
  for (std::uint64_t seed = 3; seed <= 12; ++seed) {
    SmallFixture fx = random_fixture(seed, 2, 2, 5);
    const double base = solve_exact(build_esp(fx.infra, fx.requests, ValueMode::Profit)).objective;

    // Adding capacity to every node never hurts.
    std::vector<std::vector<EdgeNode>> grown;
    for (int k = 0; k < fx.infra.cluster_count(); ++k) {
      std::vector<EdgeNode> nodes;
      for (int id : fx.infra.cluster(k)) {
        EdgeNode node = fx.infra.node(id);
        node.capacity.n *= 1.5;
        node.capacity.s *= 1.5;
        node.capacity.c *= 1.5;
        nodes.push_back(node);
      }
      grown.push_back(std::move(nodes));
    }
    Infrastructure bigger = Infrastructure::from_clusters(std::move(grown));
    const double grown_obj =
        solve_exact(build_esp(bigger, fx.requests, ValueMode::Profit)).objective;
    CHECK(grown_obj >= base - 1e-7);

    // Removing a request never helps.
    std::vector<SliceRequest> fewer(fx.requests.begin(), fx.requests.end() - 1);
    const double fewer_obj =
        solve_exact(build_esp(fx.infra, fewer, ValueMode::Profit)).objective;
    CHECK(fewer_obj <= base + 1e-7);
  }
}
