#pragma once

#include <vector>

#include "nkm/dataset.hpp"
#include "nkm/types.hpp"

namespace nkm {

// K cluster heads as columns of a p x K matrix.
using Heads = Mat;

// Point-to-cluster assignment indexed like the dataset: assign[m][n] in
// [0,K). Serves both as a global partition (against one shared head tuple)
// and as per-agent local clusterings (against per-agent heads). Clusters may
// be empty.
struct Clustering {
  std::vector<std::vector<int>> assign;

  bool operator==(const Clustering&) const = default;
};

// Fixed-point detection threshold for the centroid update (l-inf per head).
inline constexpr double kLloydHeadTol = 1e-12;

// Assignment enumeration guard: refuse instances with K^N above this.
inline constexpr double kEnumGuard = 1e7;

// Index of the nearest head by squared distance; lowest index wins ties.
int nearest_head(const Heads& heads, const Vec& y);

// Fresh nearest assignment of every point (lowest-index tie rule).
Clustering nearest_assignment(const Heads& heads, const FederatedDataset& d);

// Centroids of the non-empty clusters of a global partition; heads of empty
// clusters are copied from `fallback`.
Heads centroids(const Clustering& p, const FederatedDataset& d, const Heads& fallback);

// Sum of squared distances from each point to its nearest head.
double cost_F(const Heads& x, const FederatedDataset& d);

// Distortion of a fixed partition: sum_k sum_{y in P^k} ||y - x^k||^2.
// cost_H >= cost_F for every partition, with equality at nearest assignment.
double cost_H(const Heads& x, const Clustering& p, const FederatedDataset& d);

struct LloydResult {
  Heads heads;
  Clustering partition;
  int iters = 0;
};

// Reassign-then-centroid iteration from the given initial heads until the
// (heads, partition) pair is a fixed point. A point moves only on strict
// improvement, to the lowest-index nearest cluster; empty clusters keep their
// previous head. Throws Errc::max_iters_exceeded (unreachable for exact
// arithmetic: the cost is strictly decreasing across distinct states).
LloydResult lloyd_run(const FederatedDataset& d, int k, const Heads& init, int max_iters = 1000);

// Fixed-point test: (a) each point's assigned head is within tol of nearest
// (squared distances), (b) each non-empty cluster's head equals its centroid
// within tol (l-inf). Condition (b) is vacuous for empty clusters.
bool is_lloyd_minimum(const Heads& x, const Clustering& p, const FederatedDataset& d, double tol);

struct BruteForceResult {
  Heads heads;
  Clustering partition;
  double cost = 0.0;
};

// Exhaustive minimum of the partition-based cost over all K^N assignments;
// heads are cluster centroids (empty clusters pinned to the first data point,
// which never affects the cost). Lexicographically smallest assignment wins
// ties. Throws Errc::too_large past the enumeration guard.
BruteForceResult brute_force_global(const FederatedDataset& d, int k);

// Every head tuple attaining the global minimum within rel_tol (the finite
// reference set for distance-to-optimum checks). Exact duplicates removed.
std::vector<Heads> brute_force_global_set(const FederatedDataset& d, int k,
                                          double rel_tol = 1e-12);

}  // namespace nkm
