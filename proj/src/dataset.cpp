#include "nkm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nkm/rng.hpp"

namespace nkm {

FederatedDataset::FederatedDataset(int dim, std::vector<Mat> agents)
    : dim_(dim), agents_(std::move(agents)) {
  if (dim_ < 1) fail(Errc::invalid_param, "dimension must be positive");
  for (const Mat& block : agents_) {
    if (block.rows() != dim_)
      fail(Errc::dimension_mismatch, "agent block row count does not match dim");
    if (!block.allFinite()) fail(Errc::invalid_param, "non-finite data point");
    total_ += static_cast<int>(block.cols());
    max_ = std::max(max_, static_cast<int>(block.cols()));
  }
}

const Mat& FederatedDataset::agent(int m) const {
  if (m < 0 || m >= num_agents())
    fail(Errc::index_out_of_range, "agent index " + std::to_string(m));
  return agents_[m];
}

FederatedDataset generate_mixture(const MixtureSpec& spec, std::uint64_t seed) {
  if (spec.empty()) fail(Errc::invalid_param, "mixture spec has no components");
  const int p = static_cast<int>(spec.front().mean.size());
  for (const MixtureComponent& c : spec) {
    if (c.mean.size() != p) fail(Errc::dimension_mismatch, "mixture means differ in dimension");
    if (!(c.stddev > 0.0)) fail(Errc::invalid_param, "mixture stddev must be positive");
    if (c.count < 0) fail(Errc::invalid_param, "mixture count must be non-negative");
  }
  Rng rng(seed);
  std::vector<Mat> agents;
  agents.reserve(spec.size());
  for (const MixtureComponent& c : spec) {
    Mat block(p, c.count);
    for (int n = 0; n < c.count; ++n)
      for (int i = 0; i < p; ++i) block(i, n) = c.mean(i) + c.stddev * rng.next_normal();
    agents.push_back(std::move(block));
  }
  return FederatedDataset(p, std::move(agents));
}

bool validate_k_distinct(const FederatedDataset& d, int k) {
  std::vector<Vec> distinct;
  for (int m = 0; m < d.num_agents(); ++m) {
    const Mat& block = d.agent(m);
    for (int n = 0; n < block.cols(); ++n) {
      const Vec y = block.col(n);
      bool seen = false;
      for (const Vec& v : distinct)
        if (bits_equal(v, y)) {
          seen = true;
          break;
        }
      if (!seen) {
        distinct.push_back(y);
        if (static_cast<int>(distinct.size()) >= k) return true;
      }
    }
  }
  return static_cast<int>(distinct.size()) >= k;
}

double hull_radius(const FederatedDataset& d) {
  if (d.total_count() == 0) fail(Errc::empty_data, "hull_radius of empty dataset");
  double r = 0.0;
  for (int m = 0; m < d.num_agents(); ++m) {
    const Mat& block = d.agent(m);
    for (int n = 0; n < block.cols(); ++n) r = std::max(r, block.col(n).norm());
  }
  return r;
}

bool Box::contains(const Vec& v, double tol) const {
  return (v.array() >= lower.array() - tol).all() && (v.array() <= upper.array() + tol).all();
}

double Box::violation(const Vec& v) const {
  const double below = (lower - v).maxCoeff();
  const double above = (v - upper).maxCoeff();
  return std::max(0.0, std::max(below, above));
}

Box bounding_box(const FederatedDataset& d, const std::vector<Vec>& extra) {
  if (d.total_count() == 0 && extra.empty())
    fail(Errc::empty_data, "bounding_box needs at least one point");
  Box box;
  box.lower = Vec::Constant(d.dim(), std::numeric_limits<double>::infinity());
  box.upper = Vec::Constant(d.dim(), -std::numeric_limits<double>::infinity());
  for (int m = 0; m < d.num_agents(); ++m) {
    const Mat& block = d.agent(m);
    for (int n = 0; n < block.cols(); ++n) {
      box.lower = box.lower.cwiseMin(block.col(n));
      box.upper = box.upper.cwiseMax(block.col(n));
    }
  }
  for (const Vec& v : extra) {
    if (v.size() != d.dim()) fail(Errc::dimension_mismatch, "extra point dimension mismatch");
    box.lower = box.lower.cwiseMin(v);
    box.upper = box.upper.cwiseMax(v);
  }
  return box;
}

}  // namespace nkm
