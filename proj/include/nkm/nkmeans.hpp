#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "nkm/dataset.hpp"
#include "nkm/graph.hpp"
#include "nkm/lloyd.hpp"
#include "nkm/types.hpp"

namespace nkm {

// Per-agent cluster head estimates: one p x K block per agent (the stacked
// state in R^{MKp}).
using NetworkHeads = std::vector<Heads>;

struct RunConfig {
  double rho = 1.0;
  std::optional<double> alpha;  // absent: 0.5 * alpha_max (descent-optimal)
  int max_rounds = 20000;
  double head_tol = 1e-10;      // l-inf stop threshold
  int stability_window = 10;    // consecutive unchanged-partition rounds required
  // carried into run metadata (initialization seed); the synchronous engine
  // itself draws no randomness
  std::uint64_t seed = 0;
};

struct RoundMetrics {
  int round = 0;
  double cost_J = 0.0;
  double cost_Q = 0.0;
  // J_prev - c(alpha)*||x - mu||^2 - J_cur; >= 0 up to numerical noise
  double descent_slack = 0.0;
  double innovation_norm = 0.0;  // ||x_t - mu_{t+1}|| (stacked l2)
  double consensus_dev = 0.0;
  bool partition_changed = false;
};

// Step-size cap alpha < d_min / ((1/rho) N* + lambda_M(L)).
double alpha_max(const Topology& t, const FederatedDataset& d, double rho);

// Descent constant c(alpha) = 2 alpha (d_min - alpha ((1/rho) N* + lambda_M));
// positive iff alpha < alpha_max, maximal at alpha_max / 2.
double c_alpha(const Topology& t, const FederatedDataset& d, double rho, double alpha);

// Nearest-head assignment of an agent block (lowest index on ties).
std::vector<int> reassign(const Heads& agent_heads, const Mat& agent_points);

// reassign() for every agent against its own heads.
Clustering reassign_all(const NetworkHeads& x, const FederatedDataset& d);

// Consensus+innovations blend for one (agent, cluster):
//   mu = ((1/rho) sum_{y in C} y + sum_{l in Omega} x_l) / ((1/rho)|C| + |Omega|).
// Well-defined for empty clusters; throws Errc::no_neighbors if the
// neighborhood is empty.
Vec mu(const Mat& cluster_points, const std::vector<Vec>& neighbor_heads, double rho);

// Same blend from precomputed sums (the engine's fast path).
Vec mu_from_sums(const Vec& member_sum, int member_count, const Vec& neighbor_head_sum,
                 int neighbor_count, double rho);

// Relaxed cost for a fixed clustering:
//   (1/rho) sum_{m,k} sum_{y in C_m^k} ||y - x_m^k||^2
//   + sum_{(m,l) in E} sum_k ||x_m^k - x_l^k||^2   (each undirected edge once).
double cost_J(const NetworkHeads& x, const Clustering& c, const Topology& t,
              const FederatedDataset& d, double rho);

// min-over-clusterings form: per-point nearest-head distances plus the same
// consensus penalty. Equals cost_J(x, reassign_all(x)) exactly.
double cost_Q(const NetworkHeads& x, const Topology& t, const FederatedDataset& d, double rho);

// max over clusters and all agent pairs of ||x_m^k - x_l^k||.
double consensus_deviation(const NetworkHeads& x);

// 4 sqrt(M) R0 |D| / (rho lambda_2): consensus deviation cap at stationary
// states whose heads stay inside the data hull.
double consensus_bound(const Topology& t, const FederatedDataset& d, double rho);

// 16 sqrt(M) R0^2 |D|^2 / (rho lambda_2): additive optimality gap of the
// relaxed global minimum against the centralized optimum.
double gap_bound(const Topology& t, const FederatedDataset& d, double rho);

struct StepResult {
  NetworkHeads heads;
  Clustering clustering;
  RoundMetrics metrics;
};

// One synchronous round: every agent reassigns against its own current heads,
// blends mu from the round-start snapshot of neighbor heads, then moves
// x <- x - alpha (x - mu). Pure function of the input state; agent evaluation
// order cannot affect the result. Metrics are measured against a fresh
// reassignment at the input state.
StepResult step(const NetworkHeads& x, const FederatedDataset& d, const Topology& t,
                const RunConfig& cfg);

struct RunResult {
  NetworkHeads heads;
  Clustering clustering;  // nearest assignment at the final heads
  std::vector<RoundMetrics> trace;  // trace[r] describes round r; row 0 is the initial state
  // last round whose assignment differed from the previous round; absent when
  // the partition was still changing inside the final stability window
  std::optional<int> partition_convergence_round;
  bool converged = false;  // false: max_rounds exhausted (trace is still complete)
  int rounds = 0;
  // max excursion of any head coordinate outside the box spanned by the data
  // and the initial heads (0 when the iterates stayed inside)
  double max_box_violation = 0.0;
  // max over rounds of (-descent_slack)/(1 + J_prev), clipped at 0
  double max_descent_violation = 0.0;
};

// Called after every round with the round index and the post-round state
// (round 0 reports the initial state). Used for trajectory persistence.
using RoundObserver = std::function<void(int round, const NetworkHeads& x)>;

// Iterates step() until the innovation drops below head_tol (l-inf) with the
// partition unchanged for stability_window consecutive rounds, or max_rounds.
// The innovation threshold implies the head-movement threshold since
// alpha <= 1, and leaves the terminal fixed-point residual at O(head_tol)
// independent of alpha.
RunResult run(const FederatedDataset& d, const Topology& t, int k, const NetworkHeads& init,
              const RunConfig& cfg, const RoundObserver& observer = {});

}  // namespace nkm
