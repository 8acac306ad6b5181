#pragma once

#include "gmsep/common.hpp"
#include "gmsep/gaussian_model.hpp"
#include "gmsep/rng.hpp"

#include <string>
#include <vector>

namespace gmsep {

/// Monte Carlo check of a claimed lower bound on a probability.
struct EmpiricalBound {
  std::string name;
  double claimed_probability = 0.0;
  double observed_fraction = 0.0;
  Index num_trials = 0;
  /// 3 sigma binomial half-width, floored at 3 / num_trials.
  double slack = 0.0;
  bool pass = false;
  /// "direct" when points were sampled, "distance-law" when the squared
  /// distance was drawn from its exact (noncentral) chi-square law.
  std::string method = "direct";
};

EmpiricalBound make_bound(std::string name, double claimed, Index hits, Index trials);

/// Dimension above which spherical components use the distance-law path.
inline constexpr Index kDirectSamplingMaxDim = 4096;

/// |x - p| in [R - t sigma, R + t sigma] with probability >= 1 - e^{-t}.
EmpiricalBound shell_mass_check(const GaussianParams& params, double t, Index num_samples, Rng& rng);

/// |x - z|^2 inside the point-distance bracket with probability >= 1 - 2 e^{-t}; needs t >= 1.
EmpiricalBound point_distance_check(const GaussianParams& params, const Vector& z, double t, Index num_samples,
                                    Rng& rng);

/// 2R^2 - 8 t sigma R <= |x - y|^2 <= 2 (R + 2 t sigma)^2 with probability >= 1 - 3 e^{-t}.
EmpiricalBound pair_distance_check(const GaussianParams& params, double t, Index num_pairs, Rng& rng);

/// Cross-component pairs clear 2 min(R_i^2, R_j^2) + 60 t (s_i + s_j)(R_i + R_j) + 30 t^2 (s_i^2 + s_j^2)
/// with probability >= 1 - 6 e^{-t}. The pair must be separated at t with the 500/100 constants.
EmpiricalBound cross_pair_check(const GaussianParams& first, const GaussianParams& second, double t, Index num_pairs,
                                Rng& rng);

struct GrowthInterval {
  double r_lo = 0.0;
  double r_hi = 0.0;
  /// Secant slope of ln g (inner regime) or ln(1 - g) (outer regime).
  double rate = 0.0;
  double slack = 0.0;
  bool inner = true;
  bool pass = true;
};

struct GrowthCurve {
  std::vector<double> radii;
  std::vector<double> estimated_mass;
  std::vector<GrowthInterval> intervals;
  double bound = 0.0;  ///< 2 / (sqrt(pi) sigma_max)
  Index num_samples = 0;
  bool pass = true;
};

/// Estimates g(r) = F(B(x, r)) on the grid and checks the isoperimetric
/// growth rate on both sides of mass 1/2.
GrowthCurve ball_growth_check(const GaussianParams& params, const Vector& x, const std::vector<double>& radius_grid,
                              Index num_samples, Rng& rng);

struct CovarianceCheck {
  double epsilon = 0.0;
  bool pass = false;
  /// epsilon >= 1 makes the lower end of the interval non-positive.
  bool vacuous = false;
  Index directions_tested = 0;
  double worst_ratio_deviation = 0.0;
};

/// Directional second moments about the true mean against (1 +- eps) times
/// the truth, eps = 20 n (sqrt(ln n) + sqrt(ln(1/delta))) / sqrt(|L|).
CovarianceCheck covariance_concentration_check(const GaussianParams& params, Index sample_size, double delta,
                                               Index num_directions, Rng& rng);

double covariance_epsilon(Index n, Index sample_size, double delta);

}  // namespace gmsep
