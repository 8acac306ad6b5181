#include "gmsep/separation.hpp"
#include "helpers.hpp"

#include <cmath>

using namespace gmsep;
using testutil::vec;

namespace {

GaussianParams sphere_with_radius(Vector center, double sigma, double radius) {
  return make_spherical(std::move(center), sigma).with_median_radius(MedianRadius{radius, 0.0, true});
}

// Right-hand side of the separation condition written out directly.
double rhs(double ri, double rj, double si, double sj, double t, double c1, double c2) {
  return -std::abs(ri * ri - rj * rj) + c1 * t * (ri + rj) * (si + sj) + c2 * t * t * (si * si + sj * sj);
}

}  // namespace

TEST_CASE("schedule_t examples") {
  CHECK(schedule_t(3, 1.0) == doctest::Approx(109.86).epsilon(1e-4));
  CHECK(schedule_t(3, 1.0) == doctest::Approx(100.0 * std::log(3.0)).epsilon(1e-15));
  // 100 ln(2981) / 0.05; ln 2981 is 8.00001, not exactly 8.
  CHECK(schedule_t(2981, 0.05) == doctest::Approx(2000.0 * std::log(2981.0)).epsilon(1e-15));
  CHECK(std::abs(schedule_t(2981, 0.05) - 16000.03) < 0.01);
  CHECK_CODE(schedule_t(100, 0.0), ErrorCode::kInvalidDelta);
  CHECK_CODE(schedule_t(100, 1.5), ErrorCode::kInvalidDelta);
  CHECK_CODE(schedule_t(100, -0.1), ErrorCode::kInvalidDelta);
}

TEST_CASE("config modes") {
  const SeparationConfig paper = SeparationConfig::paper(2.0);
  CHECK(paper.c1 == 500.0);
  CHECK(paper.c2 == 100.0);
  const SeparationConfig practical = SeparationConfig::practical(2.0);
  CHECK(practical.c1 == 60.0);
  CHECK(practical.c2 == 30.0);
  SeparationConfig forced = SeparationConfig::paper(1.0);
  forced.c1 = 60.0;
  CHECK_CODE(forced.validate(), ErrorCode::kInvalidArgument);
  SeparationConfig zero_t = SeparationConfig::paper(0.0);
  CHECK_CODE(zero_t.validate(), ErrorCode::kInvalidArgument);
  zero_t.diagnostics = true;
  CHECK_NOTHROW(zero_t.validate());
  CHECK(parse_separation_mode("paper") == SeparationMode::kPaper);
  CHECK(parse_separation_mode("practical") == SeparationMode::kPractical);
}

TEST_CASE("separation_margin examples") {
  SUBCASE("t = 0 concentric") {
    SeparationConfig config = SeparationConfig::paper(0.0);
    config.diagnostics = true;
    const Mixture m({sphere_with_radius(vec({0, 0}), 1.0, 3.0), sphere_with_radius(vec({0, 0}), 2.0, 5.0)}, {0.5, 0.5});
    const SeparationReport r = separation_margin(m, config);
    CHECK(r.margin(0, 1) == doctest::Approx(16.0));
    CHECK(r.satisfied);
    CHECK(std::isnan(r.margin(0, 0)));
  }
  SUBCASE("paper constants, t = 1, equal spheres") {
    const double needed = 500.0 * 20.0 * 2.0 + 100.0 * 2.0;
    CHECK(needed == 20200.0);
    CHECK(std::sqrt(needed) == doctest::Approx(142.13).epsilon(1e-4));
    for (double d : {142.0, 142.2}) {
      const Mixture m({sphere_with_radius(vec({0, 0}), 1.0, 10.0), sphere_with_radius(vec({d, 0}), 1.0, 10.0)},
                      {0.5, 0.5});
      const SeparationReport r = separation_margin(m, SeparationConfig::paper(1.0));
      CHECK(r.satisfied == (d > 142.13));
      CHECK(r.margin(0, 1) == doctest::Approx(d * d - needed));
    }
  }
  SUBCASE("concentric pair with a large radius gap") {
    const Mixture m({sphere_with_radius(vec({0}), 0.1, 100.0), sphere_with_radius(vec({0}), 1.2, 1200.0)}, {0.5, 0.5});
    const SeparationReport r = separation_margin(m, SeparationConfig::paper(1.0));
    CHECK(r.margin(0, 1) == doctest::Approx(584855.0).epsilon(1e-12));
    CHECK(r.margin(0, 1) == doctest::Approx(-rhs(100, 1200, 0.1, 1.2, 1, 500, 100)).epsilon(1e-12));
    CHECK(r.satisfied);
  }
  SUBCASE("missing radius") {
    const Mixture m({make_spherical(vec({0}), 1.0), make_spherical(vec({3}), 1.0)}, {0.5, 0.5});
    CHECK_CODE(separation_margin(m, SeparationConfig::paper(1.0)), ErrorCode::kMissingMedianRadius);
  }
}

TEST_CASE("margin properties") {
  Rng rng(3);
  PlantOptions opts;
  opts.n = 6;
  opts.k = 4;
  opts.shapes = {ComponentShape{0.5, 3.0, true}};
  opts.config = SeparationConfig::practical(3.0);
  opts.slack = 1.2;
  opts.radius_samples = 20000;
  const Mixture m = plant_separated_mixture(opts, rng);
  const SeparationReport base = separation_margin(m, opts.config);
  CHECK(base.satisfied);

  SUBCASE("symmetry") {
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 4; ++j)
        if (i != j) CHECK(base.margin(i, j) == base.margin(j, i));
  }
  SUBCASE("monotone in t") {
    for (double t : {0.5, 1.0, 2.0, 2.99}) CHECK(separation_margin(m, SeparationConfig::practical(t)).satisfied);
    for (double t : {0.5, 1.0, 2.0}) {
      const SeparationReport lower = separation_margin(m, SeparationConfig::practical(t));
      for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j)
          if (i != j) CHECK(lower.margin(i, j) >= base.margin(i, j));
    }
  }
  SUBCASE("rigid motion invariance") {
    const Matrix u = random_rotation(6, rng);
    const Vector shift = vec({1, -2, 3, 0.5, 7, -4});
    std::vector<GaussianParams> moved;
    for (const GaussianParams& g : m.components()) {
      moved.push_back(make_gaussian(u * g.center() + shift, g.eigenvalues(), Matrix(u * *g.rotation()))
                          .with_median_radius(*g.median_radius()));
    }
    const SeparationReport r = separation_margin(Mixture(moved, m.weights()), opts.config);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 4; ++j)
        if (i != j) CHECK(std::abs(r.margin(i, j) - base.margin(i, j)) <= 1e-8 * std::max(1.0, std::abs(base.margin(i, j))));
  }
}

TEST_CASE("plant_separated_mixture examples") {
  SUBCASE("k = 1") {
    Rng rng(1);
    PlantOptions opts;
    opts.n = 3;
    opts.k = 1;
    const Mixture m = plant_separated_mixture(opts, rng);
    CHECK(m.k() == 1);
    CHECK(separation_margin(m, opts.config).satisfied);
  }
  SUBCASE("k = 2, n = 8, practical t = 10") {
    Rng rng(2);
    PlantOptions opts;
    opts.n = 8;
    opts.k = 2;
    opts.shapes = {ComponentShape{0.25, 4.0, true}};
    opts.config = SeparationConfig::practical(10.0);
    const Mixture m = plant_separated_mixture(opts, rng);
    CHECK(separation_margin(m, opts.config).satisfied);
    CHECK(m.radii_known());
  }
  SUBCASE("slack = 1 leaves margins near zero for equal shapes") {
    Rng rng(3);
    PlantOptions opts;
    opts.n = 5;
    opts.k = 3;
    opts.shapes = {ComponentShape{2.0, 2.0, false}};
    opts.config = SeparationConfig::paper(1.0);
    const Mixture m = plant_separated_mixture(opts, rng);
    const SeparationReport r = separation_margin(m, opts.config);
    CHECK(r.satisfied);
    const double required = required_sq_distance(m.components()[0], m.components()[1], opts.config);
    for (Index i = 0; i < 3; ++i)
      for (Index j = i + 1; j < 3; ++j) CHECK(r.margin(i, j) / required < 0.05);
  }
  SUBCASE("more components than dimensions uses random directions") {
    Rng rng(4);
    PlantOptions opts;
    opts.n = 2;
    opts.k = 5;
    opts.config = SeparationConfig::practical(1.0);
    opts.slack = 1.5;
    const Mixture m = plant_separated_mixture(opts, rng);
    CHECK(m.k() == 5);
    CHECK(separation_margin(m, opts.config).satisfied);
  }
  SUBCASE("custom weights") {
    Rng rng(5);
    PlantOptions opts;
    opts.n = 4;
    opts.k = 2;
    opts.weights = {0.3, 0.7};
    const Mixture m = plant_separated_mixture(opts, rng);
    CHECK(m.weights() == std::vector<double>{0.3, 0.7});
  }
}

TEST_CASE("spherical fixtures") {
  const Mixture s = plant_spherical_mixture(64, 4, 1.0, 12.0, 5.0);
  const double r = s.components()[0].radius();
  const double needed = 12.0 * 5.0 * 4.0 * r * r / 8.0;
  for (Index i = 0; i < 4; ++i)
    for (Index j = i + 1; j < 4; ++j)
      CHECK((s.components()[i].center() - s.components()[j].center()).squaredNorm() ==
            doctest::Approx(needed).epsilon(1e-12));

  const Mixture c = concentric_spherical_mixture(10, {1.0, 3.0});
  CHECK(c.weights() == std::vector<double>{0.5, 0.5});
  CHECK(c.components()[0].center() == c.components()[1].center());
  CHECK(c.radii_known());

  const Mixture p = spherical_pair(3, 1.0, 7.0);
  CHECK((p.components()[0].center() - p.components()[1].center()).norm() == doctest::Approx(7.0));
}
