#pragma once

#include <utility>
#include <vector>

#include "nkm/dataset.hpp"
#include "nkm/graph.hpp"
#include "nkm/nkmeans.hpp"
#include "nkm/rng.hpp"

namespace nkm::test {

// 1-D dataset from per-agent value lists.
inline FederatedDataset dataset_1d(const std::vector<std::vector<double>>& agents) {
  std::vector<Mat> blocks;
  for (const auto& vals : agents) {
    Mat block(1, vals.size());
    for (size_t n = 0; n < vals.size(); ++n) block(0, n) = vals[n];
    blocks.push_back(std::move(block));
  }
  return FederatedDataset(1, std::move(blocks));
}

inline Heads heads_1d(const std::vector<double>& vals) {
  Heads h(1, vals.size());
  for (size_t j = 0; j < vals.size(); ++j) h(0, j) = vals[j];
  return h;
}

struct RandomInstance {
  FederatedDataset data;
  Topology topology;
  int k = 2;
};

// Desk-scale instance: Gaussian blobs spread over a widening grid, counts
// split randomly across agents, random connected Erdos-Renyi graph.
inline RandomInstance random_instance(Rng& rng, int max_agents = 10, int max_points = 100,
                                      int max_dim = 2, int max_k = 3) {
  const int m = 2 + static_cast<int>(rng.next_below(max_agents - 1));
  const int p = 1 + static_cast<int>(rng.next_below(max_dim));
  const int k = 2 + static_cast<int>(rng.next_below(max_k - 1));
  const int n_total = k + 2 + static_cast<int>(rng.next_below(max_points - k - 1));

  std::vector<Mat> blocks(m);
  std::vector<int> counts(m, 0);
  for (int i = 0; i < n_total; ++i) ++counts[rng.next_below(m)];
  for (int a = 0; a < m; ++a) {
    blocks[a] = Mat(p, counts[a]);
    for (int n = 0; n < counts[a]; ++n) {
      const int blob = static_cast<int>(rng.next_below(k));
      for (int i = 0; i < p; ++i) blocks[a](i, n) = 10.0 * blob + rng.next_normal();
    }
  }
  FederatedDataset data(p, std::move(blocks));

  const double prob = 0.3 + 0.6 * rng.next_unit();
  Topology topo = build_topology(GraphKind::erdos_renyi, m, prob, rng.next_u64());
  return {std::move(data), std::move(topo), k};
}

// Per-agent heads seeded at random points of the joint dataset.
inline NetworkHeads random_datapoint_init(Rng& rng, const FederatedDataset& d, int agents,
                                          int k) {
  std::vector<std::pair<int, int>> idx;
  for (int m = 0; m < d.num_agents(); ++m)
    for (int n = 0; n < d.count(m); ++n) idx.emplace_back(m, n);
  NetworkHeads x;
  for (int m = 0; m < agents; ++m) {
    Heads h(d.dim(), k);
    for (int j = 0; j < k; ++j) {
      const auto [am, an] = idx[rng.next_below(idx.size())];
      h.col(j) = d.agent(am).col(an);
    }
    x.push_back(std::move(h));
  }
  return x;
}

}  // namespace nkm::test
