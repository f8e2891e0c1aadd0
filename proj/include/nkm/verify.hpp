#pragma once

#include <vector>

#include "nkm/dataset.hpp"
#include "nkm/graph.hpp"
#include "nkm/lloyd.hpp"
#include "nkm/nkmeans.hpp"
#include "nkm/types.hpp"

namespace nkm {

struct GenMinReport {
  // max over points of ||y - x_m^assigned||^2 - min_k ||y - x_m^k||^2
  double nearest_violation = 0.0;
  // max over (m,k) of ||x_m^k - mu_m^k(x,C)||
  double fixed_point_residual = 0.0;
  bool passes = false;
  bool in_hull_box = false;  // all heads inside the bounding box of the data
};

// Stationarity check for a (state, clustering) pair: nearest assignment per
// agent plus the rho-blended fixed-point equation at every (agent, cluster).
// Residuals are always reported; passes iff both are <= tol.
GenMinReport is_generalized_minimum(const NetworkHeads& x, const Clustering& c,
                                    const Topology& t, const FederatedDataset& d, double rho,
                                    double tol);

// Unique minimizer of x -> cost_J(x, C): per cluster j solves the SPD system
// ((1/rho) diag_m(|C_m^j|) + L) x^j = (1/rho) b^j with b_m^j the member sum.
// Throws Errc::singular_cluster when some cluster is empty at every agent.
NetworkHeads solve_centers(const Clustering& c, const Topology& t, const FederatedDataset& d,
                           double rho, int k);

// Exact consequence of stationarity summed over the symmetric graph: for each
// cluster, sum_m |C_m^k| x_m^k equals the member sum within tol.
bool weighted_centroid_check(const NetworkHeads& x, const Clustering& c,
                             const FederatedDataset& d, double tol);

struct QGlobalResult {
  NetworkHeads heads;
  Clustering clustering;
  double cost = 0.0;
};

// Exhaustive global minimum of the relaxed cost: enumerates all per-agent
// assignments, skips those with a globally empty cluster (never optimal),
// solves the centers for each and keeps the cost minimizer (lexicographically
// smallest assignment on ties). Throws Errc::too_large past the guard.
QGlobalResult brute_force_Q_global(const Topology& t, const FederatedDataset& d, int k,
                                   double rho);

struct GapCheck {
  double lhs = 0.0;  // max_m F(relaxed-optimal heads of agent m)
  double rhs = 0.0;  // F* + gap_bound
  bool holds = false;
};

// Additive optimality-gap inequality at the relaxed global optimum, checked
// with both brute-force oracles.
GapCheck check_gap_bound(const Topology& t, const FederatedDataset& d, int k, double rho);

// Builds the global partition generated by the per-agent clusterings, takes
// centroids of its non-empty clusters (empty clusters fall back to the mean
// of the agents' heads), and checks the centralized fixed-point conditions.
bool cost_equivalence_check(const NetworkHeads& x, const Clustering& c,
                            const FederatedDataset& d, double tol);

// min over the set and over head relabelings of the stacked l2 distance.
double head_set_distance(const Heads& x, const std::vector<Heads>& set);

}  // namespace nkm
