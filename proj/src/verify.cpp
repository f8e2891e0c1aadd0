#include "nkm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace nkm {

namespace {

// Member sums and counts per (agent, cluster).
struct ClusterTallies {
  std::vector<Mat> sums;            // per agent: p x k
  std::vector<std::vector<int>> counts;  // per agent: k
  std::vector<int> global_counts;   // k
};

ClusterTallies tally(const Clustering& c, const FederatedDataset& d, int k) {
  ClusterTallies t;
  t.sums.resize(d.num_agents());
  t.counts.resize(d.num_agents());
  t.global_counts.assign(k, 0);
  for (int m = 0; m < d.num_agents(); ++m) {
    t.sums[m] = Mat::Zero(d.dim(), k);
    t.counts[m].assign(k, 0);
    const Mat& block = d.agent(m);
    for (int n = 0; n < block.cols(); ++n) {
      const int a = c.assign[m][n];
      if (a < 0 || a >= k) fail(Errc::index_out_of_range, "cluster index out of range");
      t.sums[m].col(a) += block.col(n);
      ++t.counts[m][a];
      ++t.global_counts[a];
    }
  }
  return t;
}

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

}  // namespace

GenMinReport is_generalized_minimum(const NetworkHeads& x, const Clustering& c,
                                    const Topology& t, const FederatedDataset& d, double rho,
                                    double tol) {
  const int k = static_cast<int>(x.front().cols());
  GenMinReport report;

  for (int m = 0; m < d.num_agents(); ++m) {
    const Mat& block = d.agent(m);
    for (int n = 0; n < block.cols(); ++n) {
      const double assigned = (block.col(n) - x[m].col(c.assign[m][n])).squaredNorm();
      double best = assigned;
      for (int j = 0; j < k; ++j)
        best = std::min(best, (block.col(n) - x[m].col(j)).squaredNorm());
      report.nearest_violation = std::max(report.nearest_violation, assigned - best);
    }
  }

  const ClusterTallies tal = tally(c, d, k);
  for (int m = 0; m < t.num_agents(); ++m) {
    const auto& nbrs = t.neighbors(m);
    for (int j = 0; j < k; ++j) {
      Vec nbr_sum = Vec::Zero(d.dim());
      for (int l : nbrs) nbr_sum += x[l].col(j);
      const Vec blend = mu_from_sums(tal.sums[m].col(j), tal.counts[m][j], nbr_sum,
                                     static_cast<int>(nbrs.size()), rho);
      report.fixed_point_residual =
          std::max(report.fixed_point_residual, (x[m].col(j) - blend).norm());
    }
  }

  const Box box = bounding_box(d);
  report.in_hull_box = true;
  for (const Heads& h : x)
    for (int j = 0; j < k; ++j)
      if (!box.contains(h.col(j), 1e-12)) report.in_hull_box = false;

  report.passes = report.nearest_violation <= tol && report.fixed_point_residual <= tol;
  return report;
}

NetworkHeads solve_centers(const Clustering& c, const Topology& t, const FederatedDataset& d,
                           double rho, int k) {
  if (!(rho > 0.0)) fail(Errc::invalid_param, "rho must be positive");
  const int m_count = t.num_agents();
  const ClusterTallies tal = tally(c, d, k);
  const Mat lap = t.laplacian();

  NetworkHeads heads(m_count, Heads(d.dim(), k));
  for (int j = 0; j < k; ++j) {
    if (tal.global_counts[j] == 0)
      fail(Errc::singular_cluster, "cluster " + std::to_string(j) + " empty at every agent");
    Mat a = lap;
    Mat rhs(m_count, d.dim());
    for (int m = 0; m < m_count; ++m) {
      a(m, m) += tal.counts[m][j] / rho;
      rhs.row(m) = tal.sums[m].col(j).transpose() / rho;
    }
    const Mat sol = Eigen::LLT<Mat>(a).solve(rhs);
    for (int m = 0; m < m_count; ++m) heads[m].col(j) = sol.row(m).transpose();
  }
  return heads;
}

bool weighted_centroid_check(const NetworkHeads& x, const Clustering& c,
                             const FederatedDataset& d, double tol) {
  const int k = static_cast<int>(x.front().cols());
  const ClusterTallies tal = tally(c, d, k);
  for (int j = 0; j < k; ++j) {
    Vec weighted = Vec::Zero(d.dim());
    Vec member = Vec::Zero(d.dim());
    for (int m = 0; m < d.num_agents(); ++m) {
      weighted += tal.counts[m][j] * x[m].col(j);
      member += tal.sums[m].col(j);
    }
    if ((weighted - member).norm() > tol) return false;
  }
  return true;
}

QGlobalResult brute_force_Q_global(const Topology& t, const FederatedDataset& d, int k,
                                   double rho) {
  if (k < 1) fail(Errc::invalid_param, "k must be positive");
  if (d.total_count() == 0) fail(Errc::empty_data, "brute_force_Q_global on empty dataset");
  guarded_pow(k, d.total_count());

  std::vector<std::pair<int, int>> idx;
  for (int m = 0; m < d.num_agents(); ++m)
    for (int n = 0; n < d.count(m); ++n) idx.emplace_back(m, n);

  std::vector<int> flat(idx.size(), 0);
  QGlobalResult best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<int> occupancy(k, 0);
  do {
    std::fill(occupancy.begin(), occupancy.end(), 0);
    for (int a : flat) ++occupancy[a];
    // a globally empty cluster can never be optimal: a strictly better state
    // moves any misfit point (or a duplicate head) into it
    if (std::any_of(occupancy.begin(), occupancy.end(), [](int n) { return n == 0; })) continue;

    Clustering c;
    c.assign.resize(d.num_agents());
    {
      int i = 0;
      for (int m = 0; m < d.num_agents(); ++m) {
        c.assign[m].resize(d.count(m));
        for (int n = 0; n < d.count(m); ++n) c.assign[m][n] = flat[i++];
      }
    }
    NetworkHeads heads = solve_centers(c, t, d, rho, k);
    const double cost = cost_J(heads, c, t, d, rho);
    if (cost < best.cost) {
      best.cost = cost;
      best.heads = std::move(heads);
      best.clustering = std::move(c);
    }
  } while ([&] {
    for (int i = static_cast<int>(flat.size()) - 1; i >= 0; --i) {
      if (++flat[i] < k) return true;
      flat[i] = 0;
    }
    return false;
  }());
  return best;
}

GapCheck check_gap_bound(const Topology& t, const FederatedDataset& d, int k, double rho) {
  const QGlobalResult relaxed = brute_force_Q_global(t, d, k, rho);
  const BruteForceResult central = brute_force_global(d, k);

  GapCheck gap;
  for (int m = 0; m < t.num_agents(); ++m)
    gap.lhs = std::max(gap.lhs, cost_F(relaxed.heads[m], d));
  gap.rhs = central.cost + gap_bound(t, d, rho);
  gap.holds = gap.lhs <= gap.rhs + 1e-9;
  return gap;
}

bool cost_equivalence_check(const NetworkHeads& x, const Clustering& c,
                            const FederatedDataset& d, double tol) {
  const int k = static_cast<int>(x.front().cols());
  const ClusterTallies tal = tally(c, d, k);
  Heads z(d.dim(), k);
  for (int j = 0; j < k; ++j) {
    if (tal.global_counts[j] > 0) {
      Vec sum = Vec::Zero(d.dim());
      for (int m = 0; m < d.num_agents(); ++m) sum += tal.sums[m].col(j);
      z.col(j) = sum / tal.global_counts[j];
    } else {
      Vec mean = Vec::Zero(d.dim());
      for (const Heads& h : x) mean += h.col(j);
      z.col(j) = mean / static_cast<double>(x.size());
    }
  }
  return is_lloyd_minimum(z, c, d, tol);
}

double head_set_distance(const Heads& x, const std::vector<Heads>& set) {
  if (set.empty()) fail(Errc::invalid_param, "empty reference set");
  const int k = static_cast<int>(x.cols());
  std::vector<int> perm(k);
  double best = std::numeric_limits<double>::infinity();
  for (const Heads& z : set) {
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double sq = 0.0;
      for (int j = 0; j < k; ++j) sq += (x.col(j) - z.col(perm[j])).squaredNorm();
      best = std::min(best, sq);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return std::sqrt(best);
}

}  // namespace nkm
