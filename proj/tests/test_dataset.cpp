#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "nkm/dataset.hpp"
#include "nkm/io.hpp"
#include "nkm/rng.hpp"
#include "test_util.hpp"

using namespace nkm;
using test::dataset_1d;

namespace {

MixtureSpec mixture10() {
  // 10 agents over 5 means repeated twice, unit variance, 50 samples each
  MixtureSpec spec;
  for (double mean : {5.0, 20.0, 30.0, 60.0, 100.0, 5.0, 20.0, 30.0, 60.0, 100.0}) {
    MixtureComponent c;
    c.mean = Vec::Constant(1, mean);
    c.stddev = 1.0;
    c.count = 50;
    spec.push_back(c);
  }
  return spec;
}

}  // namespace

TEST_CASE("mixture generation shape") {
  const FederatedDataset d = generate_mixture(mixture10(), 42);
  CHECK(d.num_agents() == 10);
  CHECK(d.dim() == 1);
  CHECK(d.total_count() == 500);
  CHECK(d.max_agent_count() == 50);
  for (int m = 0; m < 10; ++m) CHECK(d.count(m) == 50);
}

TEST_CASE("mixture generation with zero counts") {
  MixtureSpec spec(3, MixtureComponent{Vec::Zero(2), 1.0, 0});
  const FederatedDataset d = generate_mixture(spec, 1);
  CHECK(d.total_count() == 0);
  CHECK(d.num_agents() == 3);
  CHECK(d.dim() == 2);
}

TEST_CASE("mixture generation is deterministic") {
  const FederatedDataset a = generate_mixture(mixture10(), 7);
  const FederatedDataset b = generate_mixture(mixture10(), 7);
  for (int m = 0; m < a.num_agents(); ++m) CHECK(bits_equal(a.agent(m), b.agent(m)));
  const FederatedDataset c = generate_mixture(mixture10(), 8);
  CHECK_FALSE(bits_equal(a.agent(0), c.agent(0)));
}

TEST_CASE("mixture samples concentrate near their means") {
  const FederatedDataset d = generate_mixture(mixture10(), 3);
  const double means[] = {5, 20, 30, 60, 100, 5, 20, 30, 60, 100};
  for (int m = 0; m < 10; ++m) {
    const double sample_mean = d.agent(m).row(0).mean();
    CHECK(std::abs(sample_mean - means[m]) < 1.0);  // sigma/sqrt(50) ~ 0.14
  }
}

TEST_CASE("mixture parameter validation") {
  MixtureSpec bad_std{{Vec::Zero(1), 0.0, 3}};
  CHECK_THROWS_AS(generate_mixture(bad_std, 0), Error);
  MixtureSpec bad_count{{Vec::Zero(1), 1.0, -1}};
  CHECK_THROWS_AS(generate_mixture(bad_count, 0), Error);
}

TEST_CASE("k-distinct validation") {
  CHECK(validate_k_distinct(dataset_1d({{0, 0}, {1, 1}}), 2));
  CHECK_FALSE(validate_k_distinct(dataset_1d({{0, 0, 0}}), 2));
  CHECK(validate_k_distinct(dataset_1d({{0, 1}, {10, 11}}), 4));
  CHECK_FALSE(validate_k_distinct(dataset_1d({{0, 1}, {10, 11}}), 5));
}

TEST_CASE("k-distinct is monotone in k") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> agents(2);
    for (int i = 0; i < 12; ++i)
      agents[rng.next_below(2)].push_back(static_cast<double>(rng.next_below(6)));
    const FederatedDataset d = dataset_1d(agents);
    bool prev = true;
    for (int k = 1; k <= 12; ++k) {
      const bool cur = validate_k_distinct(d, k);
      CHECK((prev || !cur));  // once false, stays false
      prev = cur;
    }
  }
}

TEST_CASE("hull radius") {
  CHECK(hull_radius(dataset_1d({{0, 2}})) == 2.0);

  Mat block(2, 2);
  block << 3, 1, 4, 1;
  CHECK(hull_radius(FederatedDataset(2, {block})) == doctest::Approx(5.0).epsilon(1e-15));

  CHECK_THROWS_AS(hull_radius(dataset_1d({{}, {}})), Error);

  const FederatedDataset mix = generate_mixture(mixture10(), 42);
  const double r0 = hull_radius(mix);
  CHECK(r0 > 100.0 - 6.0);
  CHECK(r0 < 100.0 + 6.0);
  for (int m = 0; m < mix.num_agents(); ++m)
    for (int n = 0; n < mix.count(m); ++n) CHECK(mix.agent(m).col(n).norm() <= r0);
}

TEST_CASE("bounding box") {
  const Box box = bounding_box(dataset_1d({{0, 1}, {10, 11}}));
  CHECK(box.lower(0) == 0.0);
  CHECK(box.upper(0) == 11.0);

  Mat pt(2, 1);
  pt << 0, 5;
  Vec extra(2);
  extra << 2, 1;
  const Box box2 = bounding_box(FederatedDataset(2, {pt}), {extra});
  CHECK(box2.lower(0) == 0.0);
  CHECK(box2.lower(1) == 1.0);
  CHECK(box2.upper(0) == 2.0);
  CHECK(box2.upper(1) == 5.0);

  const Box box3 = bounding_box(dataset_1d({{-1, 3}}), {Vec::Constant(1, 7.0)});
  CHECK(box3.lower(0) == -1.0);
  CHECK(box3.upper(0) == 7.0);

  CHECK_THROWS_AS(bounding_box(dataset_1d({{}})), Error);

  Rng rng(9);
  const FederatedDataset mix = generate_mixture(mixture10(), 11);
  const Box mix_box = bounding_box(mix);
  for (int m = 0; m < mix.num_agents(); ++m)
    for (int n = 0; n < mix.count(m); ++n) {
      CHECK(mix_box.contains(mix.agent(m).col(n)));
      CHECK(mix_box.violation(mix.agent(m).col(n)) == 0.0);
    }
}

TEST_CASE("dataset json round trip is exact") {
  const FederatedDataset d = generate_mixture(mixture10(), 13);
  const std::string text = dataset_to_json(d);
  const FederatedDataset back = dataset_from_json(text);
  CHECK(back.dim() == d.dim());
  CHECK(back.num_agents() == d.num_agents());
  for (int m = 0; m < d.num_agents(); ++m) CHECK(bits_equal(back.agent(m), d.agent(m)));
  // serialization is itself deterministic
  CHECK(dataset_to_json(back) == text);
}

TEST_CASE("dataset construction validation") {
  CHECK_THROWS_AS(FederatedDataset(0, {}), Error);
  Mat bad(2, 1);
  bad << 1, std::nan("");
  CHECK_THROWS_AS(FederatedDataset(2, {bad}), Error);
  Mat wrong(3, 1);
  wrong << 1, 2, 3;
  CHECK_THROWS_AS(FederatedDataset(2, {wrong}), Error);
}
