#include "nkm/graph.hpp"

#include <algorithm>
#include <string>

#include "nkm/rng.hpp"

namespace nkm {

void Topology::init(int num_agents, std::vector<std::pair<int, int>>&& edges,
                    bool require_connected) {
  if (num_agents < 1) fail(Errc::invalid_param, "topology needs at least one agent");
  num_agents_ = num_agents;
  for (auto& [a, b] : edges) {
    if (a == b) fail(Errc::invalid_param, "self-loop at agent " + std::to_string(a));
    if (a < 0 || b < 0 || a >= num_agents || b >= num_agents)
      fail(Errc::invalid_param, "edge index out of range");
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    fail(Errc::invalid_param, "duplicate edge");
  edges_ = std::move(edges);

  adj_.assign(num_agents_, {});
  for (const auto& [a, b] : edges_) {
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }
  for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());

  if (require_connected && !is_connected(*this))
    fail(Errc::not_connected, "topology is not connected");
}

Topology::Topology(int num_agents, std::vector<std::pair<int, int>> edges) {
  init(num_agents, std::move(edges), true);
}

Topology Topology::unchecked(int num_agents, std::vector<std::pair<int, int>> edges) {
  Topology t;
  t.init(num_agents, std::move(edges), false);
  return t;
}

const std::vector<int>& Topology::neighbors(int m) const {
  if (m < 0 || m >= num_agents_)
    fail(Errc::index_out_of_range, "agent index " + std::to_string(m));
  return adj_[m];
}

int Topology::degree(int m) const { return static_cast<int>(neighbors(m).size()); }

int Topology::min_degree() const {
  int d = num_agents_;
  for (const auto& nbrs : adj_) d = std::min(d, static_cast<int>(nbrs.size()));
  return d;
}

int Topology::max_degree() const {
  int d = 0;
  for (const auto& nbrs : adj_) d = std::max(d, static_cast<int>(nbrs.size()));
  return d;
}

Mat Topology::laplacian() const {
  Mat l = Mat::Zero(num_agents_, num_agents_);
  for (const auto& [a, b] : edges_) {
    l(a, a) += 1.0;
    l(b, b) += 1.0;
    l(a, b) -= 1.0;
    l(b, a) -= 1.0;
  }
  return l;
}

bool is_connected(const Topology& t) {
  const int m = t.num_agents();
  std::vector<char> seen(m, 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int u : t.neighbors(v)) {
      if (!seen[u]) {
        seen[u] = 1;
        ++visited;
        stack.push_back(u);
      }
    }
  }
  return visited == m;
}

LaplacianSpectrum spectrum(const Topology& t) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(t.laplacian(), Eigen::EigenvaluesOnly);
  LaplacianSpectrum s;
  s.eigenvalues = solver.eigenvalues();
  s.d_min = t.min_degree();
  s.d_max = t.max_degree();
  return s;
}

std::vector<std::pair<int, int>> erdos_renyi_candidate(int num_agents, double edge_prob,
                                                       std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < num_agents; ++i)
    for (int j = i + 1; j < num_agents; ++j)
      if (rng.next_unit() < edge_prob) edges.emplace_back(i, j);
  return edges;
}

Topology build_topology(GraphKind kind, int num_agents, std::optional<double> edge_prob,
                        std::uint64_t seed) {
  if (num_agents < 2) fail(Errc::invalid_param, "need at least 2 agents");
  if (kind == GraphKind::erdos_renyi) {
    if (!edge_prob || *edge_prob <= 0.0 || *edge_prob > 1.0)
      fail(Errc::invalid_param, "erdos_renyi requires edge_prob in (0,1]");
  } else if (edge_prob) {
    fail(Errc::invalid_param, "edge_prob is only valid for erdos_renyi");
  }

  std::vector<std::pair<int, int>> edges;
  switch (kind) {
    case GraphKind::ring:
      for (int i = 0; i < num_agents; ++i) {
        const int j = (i + 1) % num_agents;
        if (i < j) edges.emplace_back(i, j);
        // the 2-ring collapses to a single edge
        else if (num_agents > 2)
          edges.emplace_back(j, i);
      }
      break;
    case GraphKind::path:
      for (int i = 0; i + 1 < num_agents; ++i) edges.emplace_back(i, i + 1);
      break;
    case GraphKind::complete:
      for (int i = 0; i < num_agents; ++i)
        for (int j = i + 1; j < num_agents; ++j) edges.emplace_back(i, j);
      break;
    case GraphKind::star:
      for (int i = 1; i < num_agents; ++i) edges.emplace_back(0, i);
      break;
    case GraphKind::erdos_renyi: {
      for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
        auto candidate = erdos_renyi_candidate(num_agents, *edge_prob, seed + attempt);
        Topology t = Topology::unchecked(num_agents, std::move(candidate));
        if (is_connected(t)) return t;
      }
      fail(Errc::not_connected, "no connected Erdos-Renyi sample in 1000 attempts");
    }
  }
  return Topology(num_agents, std::move(edges));
}

}  // namespace nkm
