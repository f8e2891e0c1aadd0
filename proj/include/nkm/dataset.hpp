#pragma once

#include <cstdint>
#include <vector>

#include "nkm/types.hpp"

namespace nkm {

// Collective dataset split across M agents. Each agent block is a p x N_m
// matrix with one data point per column (N_m may be zero). Immutable after
// construction.
class FederatedDataset {
 public:
  FederatedDataset(int dim, std::vector<Mat> agents);

  int dim() const { return dim_; }
  int num_agents() const { return static_cast<int>(agents_.size()); }
  const Mat& agent(int m) const;
  int count(int m) const { return static_cast<int>(agent(m).cols()); }

  int total_count() const { return total_; }      // N
  int max_agent_count() const { return max_; }    // N* = max_m N_m

 private:
  int dim_ = 0;
  int total_ = 0;
  int max_ = 0;
  std::vector<Mat> agents_;
};

// One Gaussian component per agent: n samples from N(mean, stddev^2 I).
struct MixtureComponent {
  Vec mean;
  double stddev = 1.0;
  int count = 0;
};
using MixtureSpec = std::vector<MixtureComponent>;

// Deterministic for a fixed seed (see rng.hpp for the generator contract).
// Samples are drawn agent by agent, point by point, coordinate by coordinate.
FederatedDataset generate_mixture(const MixtureSpec& spec, std::uint64_t seed);

// True iff the joint multiset holds >= k pairwise-distinct points under exact
// coordinate comparison (duplicated points across agents compare equal).
bool validate_k_distinct(const FederatedDataset& d, int k);

// R0: max l2 norm over the data. The max of the norm over the convex hull is
// attained at a data point, so the pointwise scan equals the hull value.
double hull_radius(const FederatedDataset& d);

// Axis-aligned box; the testable outer approximation of a convex hull.
struct Box {
  Vec lower;
  Vec upper;

  bool contains(const Vec& v, double tol = 0.0) const;
  // max coordinate-wise excursion outside the box (0 when inside)
  double violation(const Vec& v) const;
};

// Coordinate-wise min/max over the data plus any extra points (e.g. center
// initializations). Throws Errc::empty_data when there is no point at all.
Box bounding_box(const FederatedDataset& d, const std::vector<Vec>& extra = {});

}  // namespace nkm
