#pragma once

#include "gmsep/common.hpp"
#include "gmsep/rng.hpp"

#include <optional>
#include <vector>

namespace gmsep {

/// Which spherical density normaliser the likelihood uses. kPaper keeps
/// (2 pi sigma)^{n/2} with sigma_hat^2 = 2 cost / (M n); kStandard uses
/// (2 pi sigma^2)^{n/2} with sigma_hat^2 = cost / (M n).
enum class Normalization { kPaper, kStandard };

struct KMedianSolution {
  /// Rows are the chosen centers, all of them sample points.
  PointMatrix centers;
  IndexSet center_indices;
  /// Nearest center per point, ties to the lowest center index.
  std::vector<int> assignment;
  double objective = 0.0;
  double sigma_hat = 0.0;
  double log_likelihood = 0.0;
  bool zero_sigma = false;
  /// Objective after seeding and after every accepted swap.
  std::vector<double> history;
  int rounds = 0;
};

struct LocalSearchConfig {
  int max_rounds = 1000;
  double improvement_factor = 1e-3;
};

double kmedian_cost(const PointMatrix& points, const PointMatrix& centers);

/// Nearest-center assignment (lowest index on ties) and its cost.
std::vector<int> nearest_centers(const PointMatrix& points, const PointMatrix& centers, double* cost = nullptr);

KMedianSolution kmedian_local_search(const PointMatrix& points, Index k, Rng& rng, const LocalSearchConfig& config = {},
                                     Normalization normalization = Normalization::kPaper);

/// Exact optimum over every k-subset of sample points; C(M, k) <= 10^6.
KMedianSolution kmedian_exhaustive(const PointMatrix& points, Index k,
                                   Normalization normalization = Normalization::kPaper);

double sigma_hat(const PointMatrix& points, const PointMatrix& centers, const std::vector<int>& assignment,
                 Normalization normalization = Normalization::kPaper);

struct LogLikelihood {
  double value = 0.0;
  /// sigma == 0: the likelihood is unbounded and value is +infinity.
  bool zero_sigma = false;
};

/// -[(M n / 2) ln(2 pi sigma) + cost / (2 sigma^2)] under the kPaper
/// normaliser by default. Without sigma, sigma_hat is recomputed under `normalization`.
LogLikelihood spherical_log_likelihood(const PointMatrix& points, const KMedianSolution& solution,
                                       std::optional<double> sigma = std::nullopt,
                                       Normalization normalization = Normalization::kPaper);

struct SphericalFit {
  KMedianSolution solution;
  std::vector<double> weights;
};

SphericalFit fit_spherical_mixture(const PointMatrix& points, Index k, Rng& rng, const LocalSearchConfig& config = {},
                                   Normalization normalization = Normalization::kPaper);

/// Number of k-subsets of m items, saturating at the double range.
double binomial_coefficient(Index m, Index k);

}  // namespace gmsep
