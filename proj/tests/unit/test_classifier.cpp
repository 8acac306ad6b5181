#include "gmsep/classifier.hpp"
#include "gmsep/experiment.hpp"
#include "gmsep/separation.hpp"
#include "helpers.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <set>

using namespace gmsep;
using testutil::line;
using testutil::vec;

namespace {

IndexSet iota_set(Index count) {
  IndexSet out(static_cast<std::size_t>(count));
  std::iota(out.begin(), out.end(), Index{0});
  return out;
}

LabeledSampleSet unlabeled(PointMatrix points) {
  LabeledSampleSet s;
  s.points = std::move(points);
  return s;
}

// Brute force: smallest radius over every center and every candidate radius.
DenseBall dense_ball_oracle(const PointMatrix& p, Index threshold) {
  DenseBall best;
  best.alpha = std::numeric_limits<double>::infinity();
  for (Index x = 0; x < p.rows(); ++x)
    for (Index y = 0; y < p.rows(); ++y) {
      const double r = (p.row(x) - p.row(y)).norm();
      Index inside = 0;
      for (Index z = 0; z < p.rows(); ++z) inside += (p.row(x) - p.row(z)).norm() <= r;
      if (inside >= threshold && r < best.alpha) {
        best.alpha = r;
        best.center_index = x;
      }
    }
  return best;
}

struct Planted {
  Mixture mixture;
  LabeledSampleSet samples;
};

Planted planted(Index n, Index k, double t, Index count, std::uint64_t seed) {
  Rng rng(seed);
  PlantOptions opts;
  opts.n = n;
  opts.k = k;
  opts.shapes = {ComponentShape{0.25, 4.0, true}};
  opts.config = SeparationConfig::practical(t);
  opts.slack = 1.5;
  opts.radius_samples = 20000;
  Rng plant_rng = rng.stream(1);
  Mixture m = plant_separated_mixture(opts, plant_rng);
  Rng sample_rng = rng.stream(2);
  LabeledSampleSet s = sample_mixture_stratified(m, sample_rng, count);
  return {std::move(m), std::move(s)};
}

std::set<IndexSet> as_sets(const Partition& p) {
  std::set<IndexSet> out;
  for (IndexSet c : p.clusters) {
    std::sort(c.begin(), c.end());
    out.insert(c);
  }
  return out;
}

}  // namespace

TEST_CASE("smallest_dense_ball examples") {
  const PointMatrix p = line({0, 1, 2, 10});
  const DenseBall b = smallest_dense_ball(p, iota_set(4), 3);
  CHECK(b.center_index == 1);
  CHECK(b.alpha == 1.0);
  const DenseBall oracle = dense_ball_oracle(p, 3);
  CHECK(oracle.center_index == b.center_index);
  CHECK(oracle.alpha == b.alpha);

  const DenseBall one = smallest_dense_ball(p, iota_set(4), 1);
  CHECK(one.alpha == 0.0);
  CHECK(one.center_index == 0);

  const PointMatrix same = PointMatrix::Constant(5, 3, 2.5);
  for (Index th = 1; th <= 5; ++th) CHECK(smallest_dense_ball(same, iota_set(5), th).alpha == 0.0);

  CHECK_CODE(smallest_dense_ball(p, iota_set(4), 5), ErrorCode::kThresholdTooLarge);
  CHECK_CODE(smallest_dense_ball(p, IndexSet{0, 3}, 3), ErrorCode::kThresholdTooLarge);
}

TEST_CASE("smallest_dense_ball matches brute force") {
  Rng rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    PointMatrix p(30, 3);
    for (Index i = 0; i < p.rows(); ++i)
      for (Index j = 0; j < 3; ++j) p(i, j) = rng.normal();
    for (Index th : {1, 4, 15, 30}) {
      const DenseBall b = smallest_dense_ball(p, iota_set(30), th);
      const DenseBall o = dense_ball_oracle(p, th);
      CHECK(b.alpha == doctest::Approx(o.alpha).epsilon(1e-12));
    }
  }
}

TEST_CASE("max_variance examples") {
  PointMatrix two(2, 2);
  two << -1, 0, 1, 0;
  const VarianceResult r = max_variance(two);
  CHECK(r.beta == doctest::Approx(1.0));
  CHECK(std::abs(r.direction[0]) == doctest::Approx(1.0));
  CHECK(r.direction.norm() == doctest::Approx(1.0));

  const VarianceResult single = max_variance(PointMatrix(vec({3, 4, 5}).transpose()));
  CHECK(single.beta == 0.0);
  CHECK(single.direction.norm() == doctest::Approx(1.0));

  Rng rng(5);
  PointMatrix p(200, 6);
  for (Index i = 0; i < 200; ++i)
    for (Index j = 0; j < 6; ++j) p(i, j) = rng.normal() * (1.0 + static_cast<double>(j));
  const Matrix centered = p.rowwise() - p.colwise().mean();
  const Matrix cov = centered.transpose() * centered / 200.0;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const double top = eig.eigenvalues().maxCoeff();
  PowerIterationOptions tight;
  tight.tolerance = 1e-9;
  tight.max_iters = 100000;
  CHECK(max_variance(p, tight).beta == doctest::Approx(top).epsilon(1e-6));
  // Default tolerance still bounds the eigenvalue error quadratically.
  CHECK(max_variance(p).beta == doctest::Approx(top).epsilon(1e-6));
}

TEST_CASE("find_gap examples") {
  CHECK(find_gap(line({0, 1, 2, 10}), iota_set(4), 0, 2.0, 1.0, 100) == 1);
  CHECK(find_gap(line({0, 1, 2, 3, 4, 20}), iota_set(6), 0, 1.0, 1.0, 100) == 4);
  CHECK(find_gap(line({0, 0.5, 1}), iota_set(3), 0, 5.0, 1.0, 10) == 1);
  CHECK_CODE(find_gap(line({0, 1, 2, 3, 4, 20}), iota_set(6), 0, 1.0, 1.0, 3), ErrorCode::kNoGapWithinCap);
  CHECK_CODE(find_gap(line({0, 1}), iota_set(2), 0, 1.0, 0.0, 3), ErrorCode::kInvalidArgument);
}

TEST_CASE("classify_general examples") {
  SUBCASE("k = 1 returns everything") {
    Rng rng(1);
    const PointMatrix p = sample(make_spherical(vec({0, 0, 0}), 1.0), rng, 200);
    ClassifierConfig cfg;
    const Partition part = classify_general(unlabeled(p), cfg);
    REQUIRE(part.clusters.size() == 1);
    IndexSet c = part.clusters[0];
    std::sort(c.begin(), c.end());
    CHECK(c == iota_set(200));
    CHECK(part.trace->threshold == 150);
  }
  SUBCASE("planted n = 16, k = 3") {
    const Planted pl = planted(16, 3, 10.0, 3000, 42);
    ClassifierConfig cfg;
    cfg.k = 3;
    cfg.w_min = 1.0 / 3.0;
    const Partition part = classify_general(pl.samples, cfg);
    CHECK(partition_compare(part, *pl.samples.labels).exact_match);
    CHECK(part.trace->threshold == 750);
  }
  SUBCASE("concentric pair peels the small component first") {
    const Mixture m = concentric_spherical_mixture(500000, {1.0, 20.0});
    CHECK(separation_margin(m, SeparationConfig::practical(10.0)).satisfied);
    Rng rng(7);
    const LabeledSampleSet s = sample_mixture_isometric(m, rng, 2000);
    ClassifierConfig cfg;
    cfg.k = 2;
    cfg.w_min = 0.5;
    cfg.t_override = 10.0;
    const Partition part = classify_general(s, cfg);
    CHECK(partition_compare(part, *s.labels).exact_match);
    for (Index i : part.clusters[0]) CHECK((*s.labels)[static_cast<std::size_t>(i)] == 0);
  }
  SUBCASE("errors") {
    ClassifierConfig cfg;
    cfg.k = 2;
    cfg.w_min = 0.5;
    CHECK_CODE(classify_general(unlabeled(line({0, 1, 2})), cfg), ErrorCode::kTooFewSamples);
    cfg.w_min = 0.6;
    CHECK_CODE(classify_general(unlabeled(line({0, 1, 2, 3})), cfg), ErrorCode::kInvalidArgument);
    cfg.w_min = 0.5;
    cfg.delta = 0.0;
    CHECK_CODE(classify_general(unlabeled(line({0, 1, 2, 3})), cfg), ErrorCode::kInvalidDelta);

    // Three well separated groups but k = 2 leaves one behind.
    PointMatrix p(30, 1);
    for (Index i = 0; i < 30; ++i) p(i, 0) = 1000.0 * static_cast<double>(i / 10) + 0.01 * static_cast<double>(i % 10);
    ClassifierConfig two;
    two.k = 2;
    two.w_min = 1.0 / 3.0;
    CHECK_CODE(classify_general(unlabeled(p), two), ErrorCode::kResidualPointsAfterKPeels);
    two.k = 3;
    const Partition ok = classify_general(unlabeled(p), two);
    CHECK(ok.clusters.size() == 3);
  }
}

TEST_CASE("classify_spherical examples") {
  SUBCASE("k = 1 dense spherical sample") {
    Rng rng(2);
    const Mixture m = concentric_spherical_mixture(200, {1.0});
    const LabeledSampleSet s = sample_mixture(m, rng, 100);
    const Partition part = classify_spherical(s, 1, 5.0);
    REQUIRE(part.clusters.size() == 1);
    CHECK(part.clusters[0].size() == 100);
  }
  SUBCASE("planted n = 64, k = 4") {
    const Mixture m = plant_spherical_mixture(64, 4, 1.0, 12.0, 5.0);
    Rng rng(3);
    const LabeledSampleSet s = sample_mixture_stratified(m, rng, 4000);
    const Partition part = classify_spherical(s, 4, 5.0);
    CHECK(partition_compare(part, *s.labels).exact_match);
  }
  SUBCASE("coincident points") {
    const Partition part = classify_spherical(unlabeled(line({3, 3, 100})), 2, 1.0);
    REQUIRE(part.clusters.size() == 2);
    CHECK(part.clusters[0] == IndexSet{0, 1});
    CHECK(part.clusters[1] == IndexSet{2});
  }
  SUBCASE("errors") {
    CHECK_CODE(classify_spherical(unlabeled(line({0, 1, 100, 200})), 1, 1.0), ErrorCode::kResidualPointsAfterKPeels);
    CHECK_CODE(classify_spherical(unlabeled(line({0, 1})), 3, 1.0), ErrorCode::kEmptyPeel);
    CHECK_CODE(classify_spherical(unlabeled(line({0, 1})), 1, 0.0), ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("classify_general properties") {
  const Planted pl = planted(8, 3, 10.0, 900, 9);
  ClassifierConfig cfg;
  cfg.k = 3;
  cfg.w_min = 1.0 / 3.0;
  cfg.t_override = 10.0;
  const GroundTruth truth = ground_truth(pl.mixture, *pl.samples.labels);
  const Partition base = classify_general(pl.samples, cfg, &truth);
  REQUIRE(partition_compare(base, *pl.samples.labels).exact_match);

  SUBCASE("disjoint exact cover") {
    std::vector<int> seen(900, 0);
    for (const IndexSet& c : base.clusters)
      for (Index i : c) ++seen[static_cast<std::size_t>(i)];
    CHECK(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
  }
  SUBCASE("peel order and step size") {
    for (const PeelRecord& peel : base.trace->peels) {
      for (const std::string& w : peel.warnings) {
        CHECK_MESSAGE(w.rfind("alpha", 0) != 0, w);
        CHECK_MESSAGE(w.rfind("nu", 0) != 0, w);
      }
      const auto label = static_cast<std::size_t>((*pl.samples.labels)[static_cast<std::size_t>(peel.center_index)]);
      const double sigma = pl.mixture.components()[label].sigma_max();
      if (peel.beta >= cfg.w_min * cfg.w_min * sigma * sigma / 8.0) CHECK(peel.nu <= sigma);
    }
  }
  SUBCASE("permutation invariance") {
    std::vector<Index> perm(900);
    std::iota(perm.begin(), perm.end(), Index{0});
    Rng rng(4);
    for (Index i = 899; i > 0; --i) std::swap(perm[static_cast<std::size_t>(i)], perm[rng.below(static_cast<std::uint64_t>(i + 1))]);
    LabeledSampleSet shuffled;
    shuffled.points.resize(900, 8);
    for (Index i = 0; i < 900; ++i) shuffled.points.row(i) = pl.samples.points.row(perm[static_cast<std::size_t>(i)]);
    const Partition p = classify_general(shuffled, cfg);
    std::set<IndexSet> mapped;
    for (const IndexSet& c : p.clusters) {
      IndexSet back;
      for (Index i : c) back.push_back(perm[static_cast<std::size_t>(i)]);
      std::sort(back.begin(), back.end());
      mapped.insert(back);
    }
    CHECK(mapped == as_sets(base));
  }
  SUBCASE("rigid motion invariance") {
    Rng rng(6);
    const Matrix u = random_rotation(8, rng);
    const Vector shift = Vector::LinSpaced(8, -30.0, 40.0);
    LabeledSampleSet moved;
    moved.points = (pl.samples.points * u.transpose()).rowwise() + shift.transpose();
    CHECK(as_sets(classify_general(moved, cfg)) == as_sets(base));
  }
}
