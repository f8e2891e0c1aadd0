#include "nkm/nkmeans.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nkm {

namespace {

void check_state(const NetworkHeads& x, const FederatedDataset& d, const Topology& t) {
  if (static_cast<int>(x.size()) != t.num_agents())
    fail(Errc::dimension_mismatch, "state agent count does not match topology");
  if (t.num_agents() != d.num_agents())
    fail(Errc::dimension_mismatch, "dataset agent count does not match topology");
  for (const Heads& h : x) {
    if (h.rows() != d.dim()) fail(Errc::dimension_mismatch, "head dimension mismatch");
    if (h.cols() < 1 || h.cols() != x.front().cols())
      fail(Errc::dimension_mismatch, "head count mismatch");
    if (!h.allFinite()) fail(Errc::invalid_param, "non-finite head");
  }
}

double resolve_alpha(const Topology& t, const FederatedDataset& d, const RunConfig& cfg) {
  if (!(cfg.rho > 0.0)) fail(Errc::invalid_param, "rho must be positive");
  const double cap = alpha_max(t, d, cfg.rho);
  if (!cfg.alpha) return 0.5 * cap;
  if (!(*cfg.alpha > 0.0) || !(*cfg.alpha < cap))
    fail(Errc::invalid_param, "alpha must lie in (0, alpha_max)");
  return *cfg.alpha;
}

// Shared engine for step() and run(): spectrum-dependent constants are
// computed once, all per-round buffers are reused.
class Engine {
 public:
  Engine(const FederatedDataset& d, const Topology& t, const RunConfig& cfg)
      : d_(d), t_(t), rho_(cfg.rho), alpha_(resolve_alpha(t, d, cfg)),
        c_alpha_(c_alpha(t, d, cfg.rho, alpha_)) {}

  double alpha() const { return alpha_; }
  double descent_constant() const { return c_alpha_; }

  Clustering assign(const NetworkHeads& x) const { return reassign_all(x, d_); }

  // One synchronous round from the snapshot x with clustering c = assign(x).
  // Returns the new state; innovation norms are written to the out-params.
  NetworkHeads advance(const NetworkHeads& x, const Clustering& c, double* innovation_sq,
                       double* innovation_inf) const {
    const int k = static_cast<int>(x.front().cols());
    const int p = d_.dim();
    NetworkHeads next(x.size());
    double sq = 0.0, inf = 0.0;
    for (int m = 0; m < t_.num_agents(); ++m) {
      const Mat& block = d_.agent(m);
      Mat member_sum = Mat::Zero(p, k);
      std::vector<int> member_count(k, 0);
      for (int n = 0; n < block.cols(); ++n) {
        member_sum.col(c.assign[m][n]) += block.col(n);
        ++member_count[c.assign[m][n]];
      }
      const auto& nbrs = t_.neighbors(m);
      next[m].resize(p, k);
      for (int j = 0; j < k; ++j) {
        Vec nbr_sum = Vec::Zero(p);
        for (int l : nbrs) nbr_sum += x[l].col(j);
        const Vec blend = mu_from_sums(member_sum.col(j), member_count[j], nbr_sum,
                                       static_cast<int>(nbrs.size()), rho_);
        const Vec diff = x[m].col(j) - blend;
        sq += diff.squaredNorm();
        inf = std::max(inf, diff.cwiseAbs().maxCoeff());
        next[m].col(j) = x[m].col(j) - alpha_ * diff;
      }
    }
    *innovation_sq = sq;
    *innovation_inf = inf;
    return next;
  }

  double cost(const NetworkHeads& x, const Clustering& c) const {
    return cost_J(x, c, t_, d_, rho_);
  }

 private:
  const FederatedDataset& d_;
  const Topology& t_;
  double rho_;
  double alpha_;
  double c_alpha_;
};

}  // namespace

double alpha_max(const Topology& t, const FederatedDataset& d, double rho) {
  if (!(rho > 0.0)) fail(Errc::invalid_param, "rho must be positive");
  const LaplacianSpectrum s = spectrum(t);
  return s.d_min / (d.max_agent_count() / rho + s.lambda_max());
}

double c_alpha(const Topology& t, const FederatedDataset& d, double rho, double alpha) {
  if (!(rho > 0.0)) fail(Errc::invalid_param, "rho must be positive");
  const LaplacianSpectrum s = spectrum(t);
  return 2.0 * alpha * (s.d_min - alpha * (d.max_agent_count() / rho + s.lambda_max()));
}

std::vector<int> reassign(const Heads& agent_heads, const Mat& agent_points) {
  if (agent_points.cols() > 0 && agent_points.rows() != agent_heads.rows())
    fail(Errc::dimension_mismatch, "point dimension does not match heads");
  std::vector<int> assign(agent_points.cols());
  for (int n = 0; n < agent_points.cols(); ++n)
    assign[n] = nearest_head(agent_heads, agent_points.col(n));
  return assign;
}

Clustering reassign_all(const NetworkHeads& x, const FederatedDataset& d) {
  Clustering c;
  c.assign.resize(d.num_agents());
  for (int m = 0; m < d.num_agents(); ++m) c.assign[m] = reassign(x[m], d.agent(m));
  return c;
}

Vec mu_from_sums(const Vec& member_sum, int member_count, const Vec& neighbor_head_sum,
                 int neighbor_count, double rho) {
  if (neighbor_count < 1) fail(Errc::no_neighbors, "agent has no neighbors");
  return (member_sum / rho + neighbor_head_sum) / (member_count / rho + neighbor_count);
}

Vec mu(const Mat& cluster_points, const std::vector<Vec>& neighbor_heads, double rho) {
  if (!(rho > 0.0)) fail(Errc::invalid_param, "rho must be positive");
  if (neighbor_heads.empty()) fail(Errc::no_neighbors, "agent has no neighbors");
  const auto p = neighbor_heads.front().size();
  Vec member_sum = Vec::Zero(p);
  for (int n = 0; n < cluster_points.cols(); ++n) member_sum += cluster_points.col(n);
  Vec nbr_sum = Vec::Zero(p);
  for (const Vec& h : neighbor_heads) nbr_sum += h;
  return mu_from_sums(member_sum, static_cast<int>(cluster_points.cols()), nbr_sum,
                      static_cast<int>(neighbor_heads.size()), rho);
}

double cost_J(const NetworkHeads& x, const Clustering& c, const Topology& t,
              const FederatedDataset& d, double rho) {
  check_state(x, d, t);
  if (!(rho > 0.0)) fail(Errc::invalid_param, "rho must be positive");
  double clust = 0.0;
  for (int m = 0; m < d.num_agents(); ++m) {
    const Mat& block = d.agent(m);
    for (int n = 0; n < block.cols(); ++n)
      clust += (block.col(n) - x[m].col(c.assign[m][n])).squaredNorm();
  }
  double edge = 0.0;
  for (const auto& [a, b] : t.edges())
    for (int j = 0; j < x.front().cols(); ++j)
      edge += (x[a].col(j) - x[b].col(j)).squaredNorm();
  return clust / rho + edge;
}

double cost_Q(const NetworkHeads& x, const Topology& t, const FederatedDataset& d, double rho) {
  check_state(x, d, t);
  if (!(rho > 0.0)) fail(Errc::invalid_param, "rho must be positive");
  double clust = 0.0;
  for (int m = 0; m < d.num_agents(); ++m) {
    const Mat& block = d.agent(m);
    for (int n = 0; n < block.cols(); ++n) {
      double best = (block.col(n) - x[m].col(0)).squaredNorm();
      for (int j = 1; j < x[m].cols(); ++j)
        best = std::min(best, (block.col(n) - x[m].col(j)).squaredNorm());
      clust += best;
    }
  }
  double edge = 0.0;
  for (const auto& [a, b] : t.edges())
    for (int j = 0; j < x.front().cols(); ++j)
      edge += (x[a].col(j) - x[b].col(j)).squaredNorm();
  return clust / rho + edge;
}

double consensus_deviation(const NetworkHeads& x) {
  double dev = 0.0;
  for (size_t m = 0; m < x.size(); ++m)
    for (size_t l = m + 1; l < x.size(); ++l)
      for (int j = 0; j < x.front().cols(); ++j)
        dev = std::max(dev, (x[m].col(j) - x[l].col(j)).norm());
  return dev;
}

double consensus_bound(const Topology& t, const FederatedDataset& d, double rho) {
  if (!(rho > 0.0)) fail(Errc::invalid_param, "rho must be positive");
  const LaplacianSpectrum s = spectrum(t);
  if (s.lambda2() <= kConnectivityTol) fail(Errc::not_connected, "bound needs a connected graph");
  const double r0 = hull_radius(d);
  return 4.0 * std::sqrt(t.num_agents()) * r0 * d.total_count() / (rho * s.lambda2());
}

double gap_bound(const Topology& t, const FederatedDataset& d, double rho) {
  if (!(rho > 0.0)) fail(Errc::invalid_param, "rho must be positive");
  const LaplacianSpectrum s = spectrum(t);
  if (s.lambda2() <= kConnectivityTol) fail(Errc::not_connected, "bound needs a connected graph");
  const double r0 = hull_radius(d);
  const double n = d.total_count();
  return 16.0 * std::sqrt(t.num_agents()) * r0 * r0 * n * n / (rho * s.lambda2());
}

StepResult step(const NetworkHeads& x, const FederatedDataset& d, const Topology& t,
                const RunConfig& cfg) {
  check_state(x, d, t);
  const Engine eng(d, t, cfg);
  const Clustering c = eng.assign(x);
  const double j_before = eng.cost(x, c);

  double innovation_sq = 0.0, innovation_inf = 0.0;
  NetworkHeads next = eng.advance(x, c, &innovation_sq, &innovation_inf);

  StepResult out;
  out.metrics.round = 1;
  out.metrics.cost_J = eng.cost(next, c);
  out.metrics.cost_Q = cost_Q(next, t, d, cfg.rho);
  out.metrics.descent_slack =
      j_before - eng.descent_constant() * innovation_sq - out.metrics.cost_J;
  out.metrics.innovation_norm = std::sqrt(innovation_sq);
  out.metrics.consensus_dev = consensus_deviation(next);
  out.metrics.partition_changed = false;
  out.heads = std::move(next);
  out.clustering = c;
  return out;
}

RunResult run(const FederatedDataset& d, const Topology& t, int k, const NetworkHeads& init,
              const RunConfig& cfg, const RoundObserver& observer) {
  check_state(init, d, t);
  if (static_cast<int>(init.front().cols()) != k)
    fail(Errc::invalid_param, "init head count does not match k");
  if (!validate_k_distinct(d, k))
    fail(Errc::invalid_param, "dataset has fewer than k distinct points");
  if (cfg.max_rounds < 1 || cfg.stability_window < 1 || !(cfg.head_tol > 0.0))
    fail(Errc::invalid_param, "invalid run configuration");

  const Engine eng(d, t, cfg);

  std::vector<Vec> init_heads;
  for (const Heads& h : init)
    for (int j = 0; j < h.cols(); ++j) init_heads.push_back(h.col(j));
  const Box box = bounding_box(d, init_heads);

  RunResult res;
  NetworkHeads x = init;
  Clustering part = eng.assign(x);
  double j_prev = eng.cost(x, part);

  res.trace.push_back({0, j_prev, j_prev, 0.0, 0.0, consensus_deviation(x), false});
  if (observer) observer(0, x);

  int unchanged_streak = 0;
  int last_change = 0;
  for (int r = 1; r <= cfg.max_rounds; ++r) {
    const Clustering next_part = eng.assign(x);
    // the fresh assignment is optimal for x: it closes the pending cost_Q
    res.trace.back().cost_Q = eng.cost(x, next_part);

    double innovation_sq = 0.0, innovation_inf = 0.0;
    NetworkHeads next = eng.advance(x, next_part, &innovation_sq, &innovation_inf);

    RoundMetrics row;
    row.round = r;
    row.cost_J = eng.cost(next, next_part);
    row.descent_slack = j_prev - eng.descent_constant() * innovation_sq - row.cost_J;
    row.innovation_norm = std::sqrt(innovation_sq);
    row.consensus_dev = consensus_deviation(next);
    row.partition_changed = !(next_part == part);

    res.max_descent_violation = std::max(
        res.max_descent_violation, std::max(0.0, -row.descent_slack) / (1.0 + j_prev));
    for (const Heads& h : next)
      for (int j = 0; j < h.cols(); ++j)
        res.max_box_violation = std::max(res.max_box_violation, box.violation(h.col(j)));

    if (row.partition_changed) {
      unchanged_streak = 0;
      last_change = r;
    } else {
      ++unchanged_streak;
    }

    res.trace.push_back(row);
    x = std::move(next);
    part = next_part;
    j_prev = row.cost_J;
    res.rounds = r;
    if (observer) observer(r, x);

    if (innovation_inf < cfg.head_tol && unchanged_streak >= cfg.stability_window) {
      res.converged = true;
      break;
    }
  }

  res.clustering = eng.assign(x);
  res.trace.back().cost_Q = eng.cost(x, res.clustering);
  res.heads = std::move(x);
  if (res.rounds - last_change >= cfg.stability_window)
    res.partition_convergence_round = last_change;
  return res;
}

}  // namespace nkm
