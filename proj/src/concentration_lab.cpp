#include "gmsep/concentration_lab.hpp"

#include "gmsep/separation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gmsep {

namespace {

bool use_distance_law(const GaussianParams& params) {
  return params.is_spherical() && params.dim() > kDirectSamplingMaxDim;
}

/// |x - z|^2 for x ~ N(p, sigma^2 I) when |z - p|^2 = offset_sq: sigma^2 times a noncentral chi-square.
double spherical_sq_distance(double sigma_sq, Index n, double offset_sq, Rng& rng) {
  const double shift = std::sqrt(offset_sq / sigma_sq);
  const double lead = rng.normal() + shift;
  const double rest = n > 1 ? rng.chi_square(static_cast<double>(n - 1)) : 0.0;
  return sigma_sq * (lead * lead + rest);
}

class PointSampler {
 public:
  explicit PointSampler(const GaussianParams& params)
      : params_(params), z_(static_cast<std::size_t>(params.dim())), x_(static_cast<std::size_t>(params.dim())) {}

  const std::vector<double>& draw(Rng& rng) {
    for (auto& v : z_) v = rng.normal();
    params_.transform_standard(z_, x_);
    return x_;
  }

 private:
  const GaussianParams& params_;
  std::vector<double> z_;
  std::vector<double> x_;
};

double sq_distance(const std::vector<double>& a, const Vector& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[static_cast<Index>(i)];
    sum += d * d;
  }
  return sum;
}

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void require_unit_t(double t) {
  require(t >= 1.0, ErrorCode::kInvalidArgument, "the distance bounds are stated for t >= 1");
}

}  // namespace

EmpiricalBound make_bound(std::string name, double claimed, Index hits, Index trials) {
  EmpiricalBound bound;
  bound.name = std::move(name);
  bound.claimed_probability = claimed;
  bound.num_trials = trials;
  bound.observed_fraction = static_cast<double>(hits) / static_cast<double>(trials);
  const double n = static_cast<double>(trials);
  const double p = std::clamp(claimed, 0.0, 1.0);
  bound.slack = std::max(3.0 * std::sqrt(p * (1.0 - p) / n), 3.0 / n);
  bound.pass = bound.observed_fraction >= claimed - bound.slack;
  return bound;
}

EmpiricalBound shell_mass_check(const GaussianParams& params, double t, Index num_samples, Rng& rng) {
  const double radius = params.radius();
  require(t >= 0.0, ErrorCode::kInvalidArgument, "t must be non-negative");
  require(num_samples >= 10000, ErrorCode::kTooFewSamples, "shell check needs at least 10^4 draws");
  const double sigma = params.sigma_max();
  const double lo = radius - t * sigma;
  const double hi = radius + t * sigma;
  Index hits = 0;
  const bool law = use_distance_law(params);
  PointSampler sampler(params);
  for (Index s = 0; s < num_samples; ++s) {
    const double dist = law ? std::sqrt(spherical_sq_distance(sigma * sigma, params.dim(), 0.0, rng))
                            : std::sqrt(sq_distance(sampler.draw(rng), params.center()));
    if (dist >= lo && dist <= hi) ++hits;
  }
  EmpiricalBound bound = make_bound("shell_mass", 1.0 - std::exp(-t), hits, num_samples);
  bound.method = law ? "distance-law" : "direct";
  return bound;
}

EmpiricalBound point_distance_check(const GaussianParams& params, const Vector& z, double t, Index num_samples,
                                    Rng& rng) {
  require_unit_t(t);
  require(z.size() == params.dim(), ErrorCode::kDimensionMismatch, "reference point has wrong length");
  require(num_samples >= 1, ErrorCode::kTooFewSamples, "need at least one draw");
  const double radius = params.radius();
  const double sigma = params.sigma_max();
  const double offset = (z - params.center()).norm();
  const double cross = 2.0 * std::sqrt(2.0) * std::sqrt(t) * offset * sigma;
  const double inner = std::max(0.0, radius - t * sigma);
  const double upper = (radius + t * sigma) * (radius + t * sigma) + offset * offset + cross;
  const double lower = inner * inner + offset * offset - cross;

  Index hits = 0;
  const bool law = use_distance_law(params);
  PointSampler sampler(params);
  for (Index s = 0; s < num_samples; ++s) {
    const double sq = law ? spherical_sq_distance(sigma * sigma, params.dim(), offset * offset, rng)
                          : sq_distance(sampler.draw(rng), z);
    if (sq >= lower && sq <= upper) ++hits;
  }
  EmpiricalBound bound = make_bound("point_distance", 1.0 - 2.0 * std::exp(-t), hits, num_samples);
  bound.method = law ? "distance-law" : "direct";
  return bound;
}

EmpiricalBound pair_distance_check(const GaussianParams& params, double t, Index num_pairs, Rng& rng) {
  require_unit_t(t);
  require(num_pairs >= 1, ErrorCode::kTooFewSamples, "need at least one pair");
  const double radius = params.radius();
  const double sigma = params.sigma_max();
  const double lower = 2.0 * radius * radius - 8.0 * t * sigma * radius;
  const double upper = 2.0 * (radius + 2.0 * t * sigma) * (radius + 2.0 * t * sigma);

  Index hits = 0;
  const bool law = use_distance_law(params);
  PointSampler first(params);
  PointSampler second(params);
  for (Index s = 0; s < num_pairs; ++s) {
    double sq = 0.0;
    if (law) {
      sq = spherical_sq_distance(2.0 * sigma * sigma, params.dim(), 0.0, rng);
    } else {
      const auto& x = first.draw(rng);
      sq = sq_distance(x, second.draw(rng));
    }
    if (sq >= lower && sq <= upper) ++hits;
  }
  EmpiricalBound bound = make_bound("pair_distance", 1.0 - 3.0 * std::exp(-t), hits, num_pairs);
  bound.method = law ? "distance-law" : "direct";
  return bound;
}

EmpiricalBound cross_pair_check(const GaussianParams& first, const GaussianParams& second, double t, Index num_pairs,
                                Rng& rng) {
  require_unit_t(t);
  require(first.dim() == second.dim(), ErrorCode::kDimensionMismatch, "components differ in dimension");
  require(num_pairs >= 1, ErrorCode::kTooFewSamples, "need at least one pair");
  const Mixture pair({first, second}, {0.5, 0.5});
  if (!separation_margin(pair, SeparationConfig::paper(t)).satisfied) {
    fail(ErrorCode::kPairNotSeparated, "the pair violates the separation condition at this t");
  }
  const double ri = first.radius();
  const double rj = second.radius();
  const double si = first.sigma_max();
  const double sj = second.sigma_max();
  const double lower = 2.0 * std::min(ri * ri, rj * rj) + 60.0 * t * (si + sj) * (ri + rj) +
                       30.0 * t * t * (si * si + sj * sj);

  const bool law = use_distance_law(first) && use_distance_law(second);
  const double offset_sq = (first.center() - second.center()).squaredNorm();
  Index hits = 0;
  PointSampler from_first(first);
  PointSampler from_second(second);
  for (Index s = 0; s < num_pairs; ++s) {
    double sq = 0.0;
    if (law) {
      sq = spherical_sq_distance(si * si + sj * sj, first.dim(), offset_sq, rng);
    } else {
      const auto& x = from_first.draw(rng);
      sq = sq_distance(x, from_second.draw(rng));
    }
    if (sq >= lower) ++hits;
  }
  EmpiricalBound bound = make_bound("cross_pair", 1.0 - 6.0 * std::exp(-t), hits, num_pairs);
  bound.method = law ? "distance-law" : "direct";
  return bound;
}

GrowthCurve ball_growth_check(const GaussianParams& params, const Vector& x, const std::vector<double>& radius_grid,
                              Index num_samples, Rng& rng) {
  require(x.size() == params.dim(), ErrorCode::kDimensionMismatch, "ball center has wrong length");
  require(num_samples >= 1, ErrorCode::kTooFewSamples, "need at least one draw");
  require(std::is_sorted(radius_grid.begin(), radius_grid.end()), ErrorCode::kInvalidArgument,
          "radius grid must be ascending");

  std::vector<double> dists(static_cast<std::size_t>(num_samples));
  PointSampler sampler(params);
  for (auto& d : dists) d = std::sqrt(sq_distance(sampler.draw(rng), x));
  std::sort(dists.begin(), dists.end());

  GrowthCurve curve;
  curve.radii = radius_grid;
  curve.num_samples = num_samples;
  curve.bound = 2.0 / (std::sqrt(std::numbers::pi) * params.sigma_max());
  const double total = static_cast<double>(num_samples);
  std::vector<double> counts;
  for (double r : radius_grid) {
    const auto inside = std::upper_bound(dists.begin(), dists.end(), r) - dists.begin();
    counts.push_back(static_cast<double>(inside));
    curve.estimated_mass.push_back(static_cast<double>(inside) / total);
  }

  const auto band = [total](double g) { return 3.0 * std::sqrt(g * (1.0 - g) / total); };
  std::size_t inner_points = 0;
  std::size_t outer_points = 0;
  for (double g : curve.estimated_mass) {
    if (g + band(g) <= 0.5) ++inner_points;
    if (g - band(g) >= 0.5) ++outer_points;
  }
  if (inner_points < 3 || outer_points < 3) {
    fail(ErrorCode::kGridTooCoarse, "need at least three grid radii on each side of mass 1/2");
  }

  for (std::size_t i = 0; i + 1 < radius_grid.size(); ++i) {
    const double width = radius_grid[i + 1] - radius_grid[i];
    if (width <= 0.0) continue;
    const double g_hi = curve.estimated_mass[i + 1];
    const double g_lo = curve.estimated_mass[i];
    if (g_hi + band(g_hi) <= 0.5) {
      const double c1 = counts[i];
      const double c2 = counts[i + 1];
      if (c2 == 0.0) continue;
      GrowthInterval interval{radius_grid[i], radius_grid[i + 1], 0.0, 0.0, true, true};
      if (c1 == 0.0) {
        interval.rate = std::numeric_limits<double>::infinity();
      } else {
        interval.rate = (std::log(c2) - std::log(c1)) / width;
        interval.slack = 3.0 * std::sqrt(std::max(0.0, 1.0 / c1 - 1.0 / c2)) / width;
        interval.pass = interval.rate >= curve.bound - interval.slack;
      }
      curve.intervals.push_back(interval);
    } else if (g_lo - band(g_lo) >= 0.5) {
      const double u1 = total - counts[i];
      const double u2 = total - counts[i + 1];
      if (u1 == 0.0) continue;
      GrowthInterval interval{radius_grid[i], radius_grid[i + 1], 0.0, 0.0, false, true};
      if (u2 == 0.0) {
        interval.rate = -std::numeric_limits<double>::infinity();
      } else {
        interval.rate = (std::log(u2) - std::log(u1)) / width;
        interval.slack = 3.0 * std::sqrt(std::max(0.0, 1.0 / u2 - 1.0 / u1)) / width;
        interval.pass = interval.rate <= -curve.bound + interval.slack;
      }
      curve.intervals.push_back(interval);
    }
  }
  curve.pass = std::all_of(curve.intervals.begin(), curve.intervals.end(),
                           [](const GrowthInterval& interval) { return interval.pass; });
  return curve;
}

double covariance_epsilon(Index n, Index sample_size, double delta) {
  require(delta > 0.0 && delta <= 1.0, ErrorCode::kInvalidDelta, "delta must lie in (0, 1]");
  require(n >= 1 && sample_size >= 1, ErrorCode::kInvalidArgument, "n and |L| must be positive");
  const double nd = static_cast<double>(n);
  return 20.0 * nd * (std::sqrt(std::log(nd)) + std::sqrt(std::log(1.0 / delta))) /
         std::sqrt(static_cast<double>(sample_size));
}

CovarianceCheck covariance_concentration_check(const GaussianParams& params, Index sample_size, double delta,
                                               Index num_directions, Rng& rng) {
  CovarianceCheck check;
  const Index n = params.dim();
  check.epsilon = covariance_epsilon(n, sample_size, delta);
  check.vacuous = check.epsilon >= 1.0;

  // Second moments about the true mean.
  Matrix moment = Matrix::Zero(n, n);
  PointSampler sampler(params);
  Vector centered(n);
  for (Index s = 0; s < sample_size; ++s) {
    const auto& x = sampler.draw(rng);
    for (Index i = 0; i < n; ++i) centered[i] = x[static_cast<std::size_t>(i)] - params.center()[i];
    moment.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  }
  moment = moment.selfadjointView<Eigen::Lower>();
  moment /= static_cast<double>(sample_size);

  std::vector<Vector> directions;
  for (Index d = 0; d < num_directions; ++d) {
    Vector w(n);
    for (Index i = 0; i < n; ++i) w[i] = rng.normal();
    directions.push_back(w.normalized());
  }
  for (Index i = 0; i < n; ++i) directions.push_back(Vector::Unit(n, i));
  directions.push_back(params.top_direction());

  check.pass = true;
  for (const Vector& w : directions) {
    const double truth = params.directional_variance(w);
    const double observed = w.dot(moment * w);
    check.worst_ratio_deviation = std::max(check.worst_ratio_deviation, std::abs(observed / truth - 1.0));
    if (observed < (1.0 - check.epsilon) * truth || observed > (1.0 + check.epsilon) * truth) check.pass = false;
  }
  check.directions_tested = static_cast<Index>(directions.size());
  return check;
}

}  // namespace gmsep
