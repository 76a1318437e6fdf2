#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "esp/dcesp.hpp"
#include "test_support.hpp"

using namespace esp;
using namespace esp::test;

TEST_CASE("adjusted value") {
  const int R = 1, K = 3;
  DualVariables duals(R, K);
  std::vector<std::vector<int>> y(K, std::vector<int>(R, 0));

  SUBCASE("cold start reduces to the raw value") {
    CHECK(adjusted_value(4.5, 0, 0, y, duals, 1.0) == doctest::Approx(4.5));
  }

  SUBCASE("dual asymmetry shifts the value") {
    duals.at(0, 0, 1) = 1.0;
    CHECK(adjusted_value(4.5, 0, 0, y, duals, 1.0) == doctest::Approx(3.5));
  }

  SUBCASE("other clusters admitting boost the value by penalty each") {
    y[1][0] = 1;
    y[2][0] = 1;
    CHECK(adjusted_value(4.5, 0, 0, y, duals, 0.5) == doctest::Approx(5.5));
  }
}

TEST_CASE("cluster subproblem") {
  ClusterSubproblem sub;
  sub.nodes = {make_node(0, 50, 1000, 100)};
  sub.request_ids = {0, 1};
  sub.request_types = {ResourceType::Networking, ResourceType::Networking};
  sub.local_demand = {30.0, 0.0};
  sub.penalty = 1.0;
  sub.quadratic_coefficient = 2.0;

  SUBCASE("non-positive effective values admit nothing") {
    sub.adjusted_values = {1.5, 2.0};  // both <= quadratic coefficient
    ClusterDecision d = solve_cluster_subproblem(sub);
    CHECK(d.admit == std::vector<int>{0, 0});
    CHECK(d.allocation.empty());
  }

  SUBCASE("a fitting request is admitted with exact-demand allocation") {
    sub.adjusted_values = {5.0, 1.0};
    ClusterDecision d = solve_cluster_subproblem(sub);
    CHECK(d.admit[0] == 1);
    CHECK(d.admit[1] == 0);
    CHECK(d.allocation.at({0, 0}) == doctest::Approx(30.0));
  }

  SUBCASE("zero-demand requests vote on value alone") {
    sub.adjusted_values = {1.0, 9.0};
    ClusterDecision d = solve_cluster_subproblem(sub);
    CHECK(d.admit[1] == 1);
    CHECK(d.allocation.count({1, 0}) == 0);
  }

  SUBCASE("matches brute force on a random cluster") {
    SmallFixture fx = random_fixture(11, 1, 3, 5);
    ClusterSubproblem rsub;
    for (int id : fx.infra.cluster(0)) rsub.nodes.push_back(fx.infra.node(id));
    for (const SliceRequest& r : fx.requests) {
      rsub.request_ids.push_back(r.id);
      rsub.request_types.push_back(r.rtype);
      rsub.local_demand.push_back(r.demand[0]);
      rsub.adjusted_values.push_back(r.value);
    }
    rsub.quadratic_coefficient = 0.0;
    ClusterDecision d = solve_cluster_subproblem(rsub);
    SlicingSolution oracle = brute_force(build_esp(fx.infra, fx.requests, ValueMode::Profit));
    double got = 0.0;
    for (size_t i = 0; i < fx.requests.size(); ++i)
      if (d.admit[i]) got += fx.requests[i].value;
    CHECK(got == doctest::Approx(oracle.objective).epsilon(1e-6));
  }
}

TEST_CASE("dual update") {
  const int R = 1, K = 2;
  DualVariables duals(R, K);

  SUBCASE("consensus leaves duals unchanged") {
    std::vector<std::vector<int>> y = {{1}, {1}};
    DualVariables next = update_duals(duals, y, 1.0);
    CHECK(next.at(0, 0, 1) == 0.0);
    CHECK(next.at(0, 1, 0) == 0.0);
  }

  SUBCASE("one disagreement step") {
    std::vector<std::vector<int>> y = {{1}, {0}};
    DualVariables next = update_duals(duals, y, 1.0);
    CHECK(next.at(0, 0, 1) == doctest::Approx(1.0));
    CHECK(next.at(0, 1, 0) == doctest::Approx(-1.0));
  }

  SUBCASE("antisymmetry holds along any update sequence from zero") {
    std::mt19937_64 rng(3);
    DualVariables d(4, 3);
    std::vector<std::vector<int>> y(3, std::vector<int>(4, 0));
    for (int step = 0; step < 20; ++step) {
      for (auto& row : y)
        for (int& v : row) v = static_cast<int>(rng() % 2);
      d = update_duals(d, y, 0.5 + (step % 3));
      for (int r = 0; r < 4; ++r)
        for (int k = 0; k < 3; ++k)
          for (int m = 0; m < 3; ++m)
            if (k != m) CHECK(d.at(r, k, m) == doctest::Approx(-d.at(r, m, k)));
    }
  }
}

TEST_CASE("penalty update rule") {
  CHECK(update_penalty(1.0, 5.0, 5.0) == doctest::Approx(1.0));
  CHECK(update_penalty(1.0, 100.0, 1.0) == doctest::Approx(2.0));
  CHECK(update_penalty(1.0, 1.0, 100.0) == doctest::Approx(0.5));

  SUBCASE("scripted oscillating residual trace") {
    double penalty = 1.0;
    const double rp[] = {50.0, 1.0, 0.1, 2.0};
    const double rd[] = {1.0, 1.0, 20.0, 2.0};
    const double expected[] = {2.0, 2.0, 1.0, 1.0};
    for (int i = 0; i < 4; ++i) {
      penalty = update_penalty(penalty, rp[i], rd[i]);
      CHECK(penalty == doctest::Approx(expected[i]));
    }
  }
}

TEST_CASE("hand-traced run: one request only one cluster can host") {
  // Cluster 0 (50 RBs) can host the request; cluster 1 (10 RBs) never can.
  // With v = 5 and starting penalty 1 the sweeps are, by hand:
  //   1: cluster 0 admits (effective 5 - 2 = 3), cluster 1 rejects;
  //      r_p = sqrt(2), r_d = 1, duals move to +-1, penalty stays 1.
  //   2: cluster 0 still admits (5 - 2 - 2 = 1), cluster 1 rejects;
  //      r_p = sqrt(2), r_d = 0 -> penalty doubles to 2.
  //   3: cluster 0 drops it (5 - 4 - 4 = -3): consensus on rejection.
  Infrastructure infra = Infrastructure::from_clusters(
      {{make_node(0, 50, 1000, 100)}, {make_node(1, 10, 1000, 100)}});
  std::vector<SliceRequest> reqs = {make_request(0, ResourceType::Networking, 5.0, {30.0, 25.0})};

  DcespConfig cfg;
  cfg.penalty_value_fraction = 0.0;  // keep the starting penalty at exactly 1
  auto [sol, trace] = solve_dcesp(infra, reqs, ValueMode::Profit, cfg);

  REQUIRE(trace.size() == 3);
  CHECK(trace[0].primal_residual == doctest::Approx(std::sqrt(2.0)));
  CHECK(trace[0].dual_residual == doctest::Approx(1.0));
  CHECK(trace[0].penalty == doctest::Approx(1.0));
  CHECK(trace[1].primal_residual == doctest::Approx(std::sqrt(2.0)));
  CHECK(trace[1].dual_residual == doctest::Approx(0.0));
  CHECK(trace[1].penalty == doctest::Approx(1.0));
  CHECK(trace[2].primal_residual == doctest::Approx(0.0));
  CHECK(trace[2].penalty == doctest::Approx(2.0));

  CHECK(sol.stats.converged);
  CHECK(sol.stats.admm_iterations == 3);
  CHECK(sol.objective == doctest::Approx(0.0));
  CHECK(sol.admission.at(0) == 0);
  CHECK(validate_solution(infra, reqs, sol).feasible);
}

TEST_CASE("a request feasible in both clusters reaches consensus admission") {
  Infrastructure infra = Infrastructure::from_clusters(
      {{make_node(0, 50, 1000, 100)}, {make_node(1, 50, 1000, 100)}});
  std::vector<SliceRequest> reqs = {make_request(0, ResourceType::Networking, 5.0, {30.0, 25.0})};
  auto [sol, trace] = solve_dcesp(infra, reqs, ValueMode::Profit);
  CHECK(sol.stats.converged);
  CHECK(sol.admission.at(0) == 1);
  CHECK(sol.objective == doctest::Approx(5.0));
  SlicingSolution exact = solve_exact(build_esp(infra, reqs, ValueMode::Profit));
  CHECK(sol.objective == doctest::Approx(exact.objective));
  CHECK(validate_solution(infra, reqs, sol).feasible);
}

TEST_CASE("single-cluster instances converge in one iteration to the exact solution") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    SmallFixture fx = random_fixture(seed, 1, 3, 6);
    auto [sol, trace] = solve_dcesp(fx.infra, fx.requests, ValueMode::Profit);
    SlicingSolution exact = solve_exact(build_esp(fx.infra, fx.requests, ValueMode::Profit));
    CHECK(sol.stats.converged);
    CHECK(sol.stats.admm_iterations == 1);
    CHECK(sol.admission == exact.admission);
    CHECK(sol.objective == doctest::Approx(exact.objective));
  }
}

TEST_CASE("dcesp output is feasible and never beats the exact optimum") {
  int converged_runs = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SmallFixture fx = random_fixture(seed, 2, 2, 5);
    for (ValueMode mode : {ValueMode::Profit, ValueMode::Count}) {
      auto [sol, trace] = solve_dcesp(fx.infra, fx.requests, mode);
      SlicingSolution exact = solve_exact(build_esp(fx.infra, fx.requests, mode));
      CAPTURE(seed);
      CHECK(sol.objective <= exact.objective + 1e-7);
      CHECK(validate_solution(fx.infra, fx.requests, sol).feasible);
      if (sol.stats.converged) ++converged_runs;
      CHECK(sol.stats.admm_iterations == static_cast<long>(trace.size()));
    }
  }
  CHECK(converged_runs >= 16);  // 80% of 20 runs
}

TEST_CASE("trace csv export") {
  ConvergenceTrace trace = {{1, 5.0, 1.5, 0.25, 1.0}, {2, 6.5, 0.0, 0.5, 2.0}};
  std::ostringstream out;
  write_trace_csv(out, trace);
  CHECK(out.str() ==
        "iteration,objective,primal_residual,dual_residual,penalty\n"
        "1,5,1.5,0.25,1\n"
        "2,6.5,0,0.5,2\n");
}
