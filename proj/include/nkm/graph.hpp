#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "nkm/types.hpp"

namespace nkm {

// Absolute accuracy of the dense symmetric eigensolve; fixed, not configurable.
inline constexpr double kEigTol = 1e-10;

// Spectral connectivity threshold: lambda_2 > kConnectivityTol iff connected.
inline constexpr double kConnectivityTol = 1e-8;

enum class GraphKind { ring, path, complete, star, erdos_renyi };

// Undirected communication graph on agents 0..M-1. Edges are stored
// canonically: (m,l) with m < l, sorted lexicographically. Immutable after
// construction.
class Topology {
 public:
  // Validates structure (no self-loops, no duplicates, indices in range) and
  // connectivity. Throws Errc::not_connected for disconnected edge sets.
  Topology(int num_agents, std::vector<std::pair<int, int>> edges);

  // Same structural validation but skips the connectivity check. Used for
  // inspecting raw candidate graphs (e.g. pre-retry Erdos-Renyi samples).
  static Topology unchecked(int num_agents, std::vector<std::pair<int, int>> edges);

  int num_agents() const { return num_agents_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  // Neighborhood of agent m (sorted ascending). Throws on m out of range.
  const std::vector<int>& neighbors(int m) const;
  int degree(int m) const;
  int min_degree() const;
  int max_degree() const;

  // Dense L = D - A. Row sums are exactly zero (integer-valued entries).
  Mat laplacian() const;

 private:
  Topology() = default;
  void init(int num_agents, std::vector<std::pair<int, int>>&& edges, bool require_connected);

  int num_agents_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
};

struct LaplacianSpectrum {
  Vec eigenvalues;  // ascending, size M
  int d_min = 0;
  int d_max = 0;

  double lambda2() const { return eigenvalues(1); }
  double lambda_max() const { return eigenvalues(eigenvalues.size() - 1); }
};

// Seeded topology generator. edge_prob is required iff kind == erdos_renyi
// (in (0,1]); Erdos-Renyi resamples with seed+attempt up to 1000 attempts
// until connected.
Topology build_topology(GraphKind kind, int num_agents, std::optional<double> edge_prob,
                        std::uint64_t seed);

// One raw Erdos-Renyi sample (possibly disconnected), as used by attempt
// number `seed` of the rejection loop.
std::vector<std::pair<int, int>> erdos_renyi_candidate(int num_agents, double edge_prob,
                                                       std::uint64_t seed);

// Graph-search connectivity; agrees with lambda_2 > kConnectivityTol.
bool is_connected(const Topology& t);

// Full sorted spectrum of the symmetric PSD Laplacian plus degree extremes.
LaplacianSpectrum spectrum(const Topology& t);

}  // namespace nkm
