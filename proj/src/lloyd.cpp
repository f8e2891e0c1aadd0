#include "nkm/lloyd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nkm {

namespace {

void check_dims(const Heads& x, const FederatedDataset& d) {
  if (x.rows() != d.dim()) fail(Errc::dimension_mismatch, "head dimension does not match data");
  if (x.cols() < 1) fail(Errc::invalid_param, "need at least one head");
}

// K^N with the enumeration guard; throws Errc::too_large.
long long guarded_pow(int k, int n) {
  double p = 1.0;
  for (int i = 0; i < n; ++i) {
    p *= k;
    if (p > kEnumGuard)
      fail(Errc::too_large, "K^N = " + std::to_string(k) + "^" + std::to_string(n) +
                                " exceeds enumeration guard");
  }
  return static_cast<long long>(p);
}

// Flattened (agent, point) index pairs in dataset order.
std::vector<std::pair<int, int>> flat_index(const FederatedDataset& d) {
  std::vector<std::pair<int, int>> idx;
  idx.reserve(d.total_count());
  for (int m = 0; m < d.num_agents(); ++m)
    for (int n = 0; n < d.count(m); ++n) idx.emplace_back(m, n);
  return idx;
}

Clustering unflatten(const std::vector<int>& flat, const FederatedDataset& d) {
  Clustering c;
  c.assign.resize(d.num_agents());
  int i = 0;
  for (int m = 0; m < d.num_agents(); ++m) {
    c.assign[m].resize(d.count(m));
    for (int n = 0; n < d.count(m); ++n) c.assign[m][n] = flat[i++];
  }
  return c;
}

// Centroid heads and partition cost for one flat assignment. Empty clusters
// get the first data point as a placeholder head (cost-irrelevant).
std::pair<Heads, double> assignment_heads_cost(const std::vector<int>& flat, int k,
                                               const FederatedDataset& d,
                                               const std::vector<std::pair<int, int>>& idx) {
  const int p = d.dim();
  Mat sums = Mat::Zero(p, k);
  std::vector<int> counts(k, 0);
  for (size_t i = 0; i < flat.size(); ++i) {
    const auto [m, n] = idx[i];
    sums.col(flat[i]) += d.agent(m).col(n);
    ++counts[flat[i]];
  }
  Heads heads(p, k);
  const auto [m0, n0] = idx.front();
  for (int c = 0; c < k; ++c)
    heads.col(c) = counts[c] > 0 ? Vec(sums.col(c) / counts[c]) : Vec(d.agent(m0).col(n0));
  double cost = 0.0;
  for (size_t i = 0; i < flat.size(); ++i) {
    const auto [m, n] = idx[i];
    cost += (d.agent(m).col(n) - heads.col(flat[i])).squaredNorm();
  }
  return {std::move(heads), cost};
}

// Odometer increment in lexicographic order (rightmost digit fastest).
bool next_assignment(std::vector<int>& flat, int k) {
  for (int i = static_cast<int>(flat.size()) - 1; i >= 0; --i) {
    if (++flat[i] < k) return true;
    flat[i] = 0;
  }
  return false;
}

}  // namespace

int nearest_head(const Heads& heads, const Vec& y) {
  int best = 0;
  double best_d = (y - heads.col(0)).squaredNorm();
  for (int k = 1; k < heads.cols(); ++k) {
    const double dk = (y - heads.col(k)).squaredNorm();
    if (dk < best_d) {
      best_d = dk;
      best = k;
    }
  }
  return best;
}

Clustering nearest_assignment(const Heads& heads, const FederatedDataset& d) {
  check_dims(heads, d);
  Clustering c;
  c.assign.resize(d.num_agents());
  for (int m = 0; m < d.num_agents(); ++m) {
    const Mat& block = d.agent(m);
    c.assign[m].resize(block.cols());
    for (int n = 0; n < block.cols(); ++n) c.assign[m][n] = nearest_head(heads, block.col(n));
  }
  return c;
}

Heads centroids(const Clustering& p, const FederatedDataset& d, const Heads& fallback) {
  const int k = static_cast<int>(fallback.cols());
  Mat sums = Mat::Zero(d.dim(), k);
  std::vector<int> counts(k, 0);
  for (int m = 0; m < d.num_agents(); ++m) {
    const Mat& block = d.agent(m);
    for (int n = 0; n < block.cols(); ++n) {
      sums.col(p.assign[m][n]) += block.col(n);
      ++counts[p.assign[m][n]];
    }
  }
  Heads heads(d.dim(), k);
  for (int c = 0; c < k; ++c)
    heads.col(c) = counts[c] > 0 ? Vec(sums.col(c) / counts[c]) : Vec(fallback.col(c));
  return heads;
}

double cost_F(const Heads& x, const FederatedDataset& d) {
  check_dims(x, d);
  double total = 0.0;
  for (int m = 0; m < d.num_agents(); ++m) {
    const Mat& block = d.agent(m);
    for (int n = 0; n < block.cols(); ++n) {
      double best = (block.col(n) - x.col(0)).squaredNorm();
      for (int k = 1; k < x.cols(); ++k)
        best = std::min(best, (block.col(n) - x.col(k)).squaredNorm());
      total += best;
    }
  }
  return total;
}

double cost_H(const Heads& x, const Clustering& p, const FederatedDataset& d) {
  check_dims(x, d);
  if (static_cast<int>(p.assign.size()) != d.num_agents())
    fail(Errc::dimension_mismatch, "partition agent count mismatch");
  double total = 0.0;
  for (int m = 0; m < d.num_agents(); ++m) {
    const Mat& block = d.agent(m);
    if (static_cast<int>(p.assign[m].size()) != block.cols())
      fail(Errc::dimension_mismatch, "partition size mismatch at agent " + std::to_string(m));
    for (int n = 0; n < block.cols(); ++n)
      total += (block.col(n) - x.col(p.assign[m][n])).squaredNorm();
  }
  return total;
}

LloydResult lloyd_run(const FederatedDataset& d, int k, const Heads& init, int max_iters) {
  check_dims(init, d);
  if (init.cols() != k) fail(Errc::invalid_param, "init head count does not match k");
  if (!init.allFinite()) fail(Errc::invalid_param, "non-finite init head");
  if (!validate_k_distinct(d, k))
    fail(Errc::invalid_param, "dataset has fewer than k distinct points");

  Heads heads = init;
  Clustering part = nearest_assignment(heads, d);
  for (int iter = 1; iter <= max_iters; ++iter) {
    // reassign only on strict improvement, to the lowest-index nearest cluster
    Clustering next = part;
    for (int m = 0; m < d.num_agents(); ++m) {
      const Mat& block = d.agent(m);
      for (int n = 0; n < block.cols(); ++n) {
        const int cand = nearest_head(heads, block.col(n));
        const double cur = (block.col(n) - heads.col(part.assign[m][n])).squaredNorm();
        if ((block.col(n) - heads.col(cand)).squaredNorm() < cur) next.assign[m][n] = cand;
      }
    }
    Heads new_heads = centroids(next, d, heads);
    const double moved = (new_heads - heads).cwiseAbs().maxCoeff();
    const bool fixed = (next == part) && moved < kLloydHeadTol;
    heads = std::move(new_heads);
    part = std::move(next);
    if (fixed) return {std::move(heads), std::move(part), iter};
  }
  fail(Errc::max_iters_exceeded, "lloyd_run did not reach a fixed point");
}

bool is_lloyd_minimum(const Heads& x, const Clustering& p, const FederatedDataset& d,
                      double tol) {
  check_dims(x, d);
  const int k = static_cast<int>(x.cols());
  Mat sums = Mat::Zero(d.dim(), k);
  std::vector<int> counts(k, 0);
  for (int m = 0; m < d.num_agents(); ++m) {
    const Mat& block = d.agent(m);
    for (int n = 0; n < block.cols(); ++n) {
      const int a = p.assign[m][n];
      double best = (block.col(n) - x.col(0)).squaredNorm();
      for (int c = 1; c < k; ++c) best = std::min(best, (block.col(n) - x.col(c)).squaredNorm());
      if ((block.col(n) - x.col(a)).squaredNorm() > best + tol) return false;
      sums.col(a) += block.col(n);
      ++counts[a];
    }
  }
  for (int c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    if ((sums.col(c) / counts[c] - x.col(c)).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

BruteForceResult brute_force_global(const FederatedDataset& d, int k) {
  if (k < 1) fail(Errc::invalid_param, "k must be positive");
  if (d.total_count() == 0) fail(Errc::empty_data, "brute_force_global on empty dataset");
  if (!validate_k_distinct(d, k))
    fail(Errc::invalid_param, "dataset has fewer than k distinct points");
  guarded_pow(k, d.total_count());

  const auto idx = flat_index(d);
  std::vector<int> flat(idx.size(), 0);
  BruteForceResult best;
  best.cost = std::numeric_limits<double>::infinity();
  do {
    auto [heads, cost] = assignment_heads_cost(flat, k, d, idx);
    if (cost < best.cost) {
      best.cost = cost;
      best.heads = std::move(heads);
      best.partition = unflatten(flat, d);
    }
  } while (next_assignment(flat, k));
  return best;
}

std::vector<Heads> brute_force_global_set(const FederatedDataset& d, int k, double rel_tol) {
  const BruteForceResult opt = brute_force_global(d, k);
  const double cutoff = opt.cost + rel_tol * (1.0 + opt.cost);

  const auto idx = flat_index(d);
  std::vector<int> flat(idx.size(), 0);
  std::vector<Heads> set;
  do {
    auto [heads, cost] = assignment_heads_cost(flat, k, d, idx);
    if (cost <= cutoff) {
      const bool dup = std::any_of(set.begin(), set.end(),
                                   [&](const Heads& h) { return bits_equal(h, heads); });
      if (!dup) set.push_back(std::move(heads));
    }
  } while (next_assignment(flat, k));
  return set;
}

}  // namespace nkm
