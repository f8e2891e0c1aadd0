#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "nkm/nkmeans.hpp"
#include "nkm/rng.hpp"
#include "nkm/verify.hpp"
#include "test_util.hpp"

using namespace nkm;
using test::dataset_1d;
using test::heads_1d;

namespace {

// D1 = {0}, D2 = {2} on a 2-agent line; its stationary state at rho = 1 is
// x1 = 2/3, x2 = 4/3 (solve x1 = x2/2, x2 = (2 + x1)/2).
struct TwoAgentLine {
  FederatedDataset data = dataset_1d({{0}, {2}});
  Topology topo = build_topology(GraphKind::path, 2, {}, 0);
};

NetworkHeads pair_state(double a, double b) { return {heads_1d({a}), heads_1d({b})}; }

FederatedDataset section_mixture(std::uint64_t seed) {
  MixtureSpec spec;
  for (double mean : {5.0, 20.0, 30.0, 60.0, 100.0, 5.0, 20.0, 30.0, 60.0, 100.0})
    spec.push_back({Vec::Constant(1, mean), 1.0, 50});
  return generate_mixture(spec, seed);
}

}  // namespace

TEST_CASE("alpha_max substitutions") {
  const Topology ring10 = build_topology(GraphKind::ring, 10, {}, 0);
  const FederatedDataset mix = section_mixture(1);
  // d_min = 2, N* = 50, lambda_M = 4: 2 / (50/100 + 4)
  CHECK(alpha_max(ring10, mix, 100.0) == doctest::Approx(2.0 / 4.5).epsilon(1e-12));

  TwoAgentLine line;
  CHECK(alpha_max(line.topo, line.data, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // rho -> infinity limit: d_min / lambda_M
  CHECK(alpha_max(line.topo, line.data, 1e15) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("descent constant") {
  const Topology ring10 = build_topology(GraphKind::ring, 10, {}, 0);
  const FederatedDataset mix = section_mixture(2);
  CHECK(c_alpha(ring10, mix, 100.0, 0.2) == doctest::Approx(0.44).epsilon(1e-12));
  const double cap = alpha_max(ring10, mix, 100.0);
  CHECK(std::abs(c_alpha(ring10, mix, 100.0, cap)) <= 1e-12);

  TwoAgentLine line;
  CHECK(c_alpha(line.topo, line.data, 1.0, 1.0 / 6.0) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("reassign") {
  Mat pts(1, 2);
  pts << 0, 1;
  CHECK(reassign(heads_1d({0, 1}), pts) == std::vector<int>{0, 1});

  Mat tie(1, 1);
  tie << 0.5;
  CHECK(reassign(heads_1d({0, 1}), tie) == std::vector<int>{0});  // tie -> lowest index

  Mat two(1, 2);
  two << 5, 20;
  CHECK(reassign(heads_1d({0, 20, 40, 60, 80}), two) == std::vector<int>{0, 1});
}

TEST_CASE("mu blend") {
  Mat single(1, 1);
  single << 0;
  CHECK(mu(single, {Vec::Constant(1, 1.0)}, 1.0)(0) == doctest::Approx(0.5).epsilon(1e-15));

  Mat empty(1, 0);
  CHECK(mu(empty, {Vec::Constant(1, 3.0), Vec::Constant(1, 5.0)}, 1.0)(0) ==
        doctest::Approx(4.0).epsilon(1e-15));

  Mat member(1, 1);
  member << 2;
  CHECK(mu(member, {Vec::Constant(1, 8.0)}, 1e15)(0) == doctest::Approx(8.0).epsilon(1e-12));

  CHECK_THROWS_AS(mu(single, {}, 1.0), Error);
}

TEST_CASE("one step of the two-agent line") {
  TwoAgentLine line;
  RunConfig cfg;
  cfg.rho = 1.0;
  cfg.alpha = 1.0 / 6.0;
  const StepResult res = step(pair_state(0.0, 2.0), line.data, line.topo, cfg);
  // mu = (1, 1); x <- x - alpha (x - mu)
  CHECK(res.heads[0](0, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(res.heads[1](0, 0) == doctest::Approx(11.0 / 6.0).epsilon(1e-15));
  CHECK(res.metrics.innovation_norm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("step leaves a stationary state fixed") {
  TwoAgentLine line;
  RunConfig cfg;
  cfg.rho = 1.0;
  cfg.alpha = 1.0 / 6.0;
  const StepResult res = step(pair_state(2.0 / 3.0, 4.0 / 3.0), line.data, line.topo, cfg);
  CHECK(std::abs(res.heads[0](0, 0) - 2.0 / 3.0) < 1e-15);
  CHECK(std::abs(res.heads[1](0, 0) - 4.0 / 3.0) < 1e-15);
  CHECK(res.metrics.innovation_norm < 1e-15);
}

TEST_CASE("step rejects alpha outside the admissible interval") {
  TwoAgentLine line;
  RunConfig cfg;
  cfg.rho = 1.0;
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(step(pair_state(0, 2), line.data, line.topo, cfg), Error);
  cfg.alpha = alpha_max(line.topo, line.data, cfg.rho);  // boundary is excluded
  CHECK_THROWS_AS(step(pair_state(0, 2), line.data, line.topo, cfg), Error);
}

TEST_CASE("cost_J substitutions") {
  TwoAgentLine line;
  const Clustering total{{{0}, {0}}};
  CHECK(cost_J(pair_state(2.0 / 3.0, 4.0 / 3.0), total, line.topo, line.data, 1.0) ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-12));

  // consensus state: J = (1/rho) F(shared heads)
  const NetworkHeads consensus = pair_state(1.0, 1.0);
  CHECK(cost_J(consensus, total, line.topo, line.data, 10.0) ==
        doctest::Approx(0.2).epsilon(1e-12));

  // no data: pure consensus penalty
  const FederatedDataset empty = dataset_1d({{}, {}});
  CHECK(cost_J(pair_state(0.0, 3.0), Clustering{{{}, {}}}, line.topo, empty, 5.0) == 9.0);
}

TEST_CASE("cost_Q equals cost_J at the fresh reassignment, exactly") {
  Rng rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = test::random_instance(rng, 6, 40, 2, 3);
    const NetworkHeads x =
        test::random_datapoint_init(rng, inst.data, inst.topology.num_agents(), inst.k);
    const double rho = std::pow(10.0, rng.next_below(4));
    CHECK(cost_Q(x, inst.topology, inst.data, rho) ==
          cost_J(x, reassign_all(x, inst.data), inst.topology, inst.data, rho));
  }
}

TEST_CASE("rho consistency at consensus states") {
  Rng rng(59);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = test::random_instance(rng, 6, 40, 2, 3);
    const Heads shared = test::random_datapoint_init(rng, inst.data, 1, inst.k).front();
    const NetworkHeads x(inst.topology.num_agents(), shared);
    const double rho = 1.0 + 99.0 * rng.next_unit();
    const double lhs = rho * cost_Q(x, inst.topology, inst.data, rho);
    const double rhs = cost_F(shared, inst.data);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
  }
}

TEST_CASE("consensus deviation") {
  CHECK(consensus_deviation(pair_state(1.0, 1.0)) == 0.0);
  CHECK(consensus_deviation(pair_state(2.0 / 3.0, 4.0 / 3.0)) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  const NetworkHeads three = {heads_1d({0}), heads_1d({1}), heads_1d({5})};
  CHECK(consensus_deviation(three) == 5.0);
}

TEST_CASE("consensus and gap bounds") {
  TwoAgentLine line;
  CHECK(consensus_bound(line.topo, line.data, 1.0) ==
        doctest::Approx(8.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(consensus_bound(line.topo, line.data, 2.0) ==
        doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-12));

  CHECK(gap_bound(line.topo, line.data, 10.0) ==
        doctest::Approx(12.8 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(gap_bound(line.topo, line.data, 1e15) < 1e-10);

  // doubling the dataset quadruples the gap bound
  const FederatedDataset doubled = dataset_1d({{0, 0}, {2, 2}});
  CHECK(gap_bound(line.topo, doubled, 10.0) ==
        doctest::Approx(4.0 * gap_bound(line.topo, line.data, 10.0)).epsilon(1e-12));
}

TEST_CASE("run reaches the closed-form stationary state") {
  TwoAgentLine line;
  RunConfig cfg;
  cfg.rho = 1.0;
  cfg.alpha = 1.0 / 6.0;
  cfg.head_tol = 1e-12;
  cfg.max_rounds = 100000;
  const RunResult res = run(line.data, line.topo, 1, pair_state(0.0, 2.0), cfg);
  CHECK(res.converged);
  CHECK(std::abs(res.heads[0](0, 0) - 2.0 / 3.0) < 1e-9);
  CHECK(std::abs(res.heads[1](0, 0) - 4.0 / 3.0) < 1e-9);
  CHECK(res.partition_convergence_round.has_value());

  const GenMinReport report = is_generalized_minimum(res.heads, res.clustering, line.topo,
                                                     line.data, 1.0, 1e-9);
  CHECK(report.passes);

  // trace invariants: Q never above J, Q non-increasing
  for (size_t r = 0; r < res.trace.size(); ++r) {
    CHECK(res.trace[r].cost_Q <= res.trace[r].cost_J + 1e-12);
    if (r > 0)
      CHECK(res.trace[r].cost_Q <=
            res.trace[r - 1].cost_Q + 1e-9 * (1.0 + res.trace[r - 1].cost_Q));
  }
}

TEST_CASE("run started at a stationary state stops within the window") {
  TwoAgentLine line;
  RunConfig cfg;
  cfg.rho = 1.0;
  cfg.alpha = 1.0 / 6.0;
  const RunResult res = run(line.data, line.topo, 1, pair_state(2.0 / 3.0, 4.0 / 3.0), cfg);
  CHECK(res.converged);
  CHECK(res.rounds == cfg.stability_window);
  CHECK(res.partition_convergence_round.has_value());
  CHECK(*res.partition_convergence_round <= 1);
}

TEST_CASE("run enforces its preconditions") {
  TwoAgentLine line;
  RunConfig cfg;
  cfg.rho = -1.0;
  CHECK_THROWS_AS(run(line.data, line.topo, 1, pair_state(0, 2), cfg), Error);
  cfg.rho = 1.0;
  CHECK_THROWS_AS(run(dataset_1d({{1}, {1}}), line.topo, 2,
                      {heads_1d({0, 1}), heads_1d({0, 1})}, cfg),
                  Error);  // fewer than k distinct points
}

TEST_CASE("descent, monotonicity, and boundedness on random instances") {
  Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = test::random_instance(rng, 6, 60, 2, 3);
    if (!validate_k_distinct(inst.data, inst.k)) continue;
    const NetworkHeads init =
        test::random_datapoint_init(rng, inst.data, inst.topology.num_agents(), inst.k);
    RunConfig cfg;
    cfg.rho = std::pow(10.0, rng.next_below(3));
    cfg.max_rounds = 20000;
    const RunResult res = run(inst.data, inst.topology, inst.k, init, cfg);
    CHECK(res.max_descent_violation <= 1e-9);
    CHECK(res.max_box_violation <= 1e-12);
    for (size_t r = 1; r < res.trace.size(); ++r)
      CHECK(res.trace[r].cost_Q <=
            res.trace[r - 1].cost_Q + 1e-9 * (1.0 + res.trace[r - 1].cost_Q));
    // Lemma-12 behaviour: generic continuous data pins the partition in
    // finite time
    CHECK(res.partition_convergence_round.has_value());
    if (res.converged) {
      const GenMinReport report = is_generalized_minimum(res.heads, res.clustering,
                                                         inst.topology, inst.data, cfg.rho,
                                                         10.0 * cfg.head_tol);
      CHECK(report.passes);
    }
  }
}

TEST_CASE("agent updates are order-independent") {
  Rng rng(67);
  const auto inst = test::random_instance(rng, 5, 30, 2, 2);
  const int m_count = inst.topology.num_agents();
  const NetworkHeads x = test::random_datapoint_init(rng, inst.data, m_count, inst.k);
  RunConfig cfg;
  cfg.rho = 10.0;
  const StepResult via_step = step(x, inst.data, inst.topology, cfg);
  const double alpha = 0.5 * alpha_max(inst.topology, inst.data, cfg.rho);

  // recompute every agent in reverse order straight from the definition
  const Clustering c = reassign_all(x, inst.data);
  for (int m = m_count - 1; m >= 0; --m) {
    for (int j = inst.k - 1; j >= 0; --j) {
      std::vector<int> members;
      for (int n = 0; n < inst.data.count(m); ++n)
        if (c.assign[m][n] == j) members.push_back(n);
      Mat cluster(inst.data.dim(), members.size());
      for (size_t i = 0; i < members.size(); ++i)
        cluster.col(i) = inst.data.agent(m).col(members[i]);
      std::vector<Vec> nbr_heads;
      for (int l : inst.topology.neighbors(m)) nbr_heads.push_back(x[l].col(j));
      const Vec blend = mu(cluster, nbr_heads, cfg.rho);
      const Vec expected = x[m].col(j) - alpha * (x[m].col(j) - blend);
      CHECK(bits_equal(via_step.heads[m].col(j), expected));
    }
  }
}

TEST_CASE("empty agent datasets average their neighborhoods") {
  // agent 1 holds no data; its head follows the neighborhood blend
  const FederatedDataset d = dataset_1d({{0.0, 1.0}, {}});
  const Topology topo = build_topology(GraphKind::path, 2, {}, 0);
  RunConfig cfg;
  cfg.rho = 1.0;
  const RunResult res = run(d, topo, 1, pair_state(0.0, 5.0), cfg);
  CHECK(res.converged);
  // stationarity: x1 = ((1/rho)(0+1) + x2) / (2/rho + 1), x2 = x1
  CHECK(std::abs(res.heads[0](0, 0) - 0.5) < 1e-8);
  CHECK(std::abs(res.heads[1](0, 0) - 0.5) < 1e-8);
}
