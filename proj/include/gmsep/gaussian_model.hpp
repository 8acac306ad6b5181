#pragma once

#include "gmsep/common.hpp"
#include "gmsep/rng.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gmsep {

/// Median radius R of a component: the ball B(p, R) has mass exactly 1/2.
struct MedianRadius {
  double value = 0.0;
  /// 99% confidence half-width; zero when computed on the exact path.
  double half_width = 0.0;
  bool exact = false;
};

/// A general Gaussian in spectral form: covariance = rotation * diag(eigenvalues) * rotation^T.
/// An absent rotation means axis-aligned, which keeps very high dimensional
/// spherical components cheap to represent.
class GaussianParams {
 public:
  const Vector& center() const noexcept { return center_; }
  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  const std::optional<Matrix>& rotation() const noexcept { return rotation_; }
  Index dim() const noexcept { return center_.size(); }

  double sigma_max() const noexcept { return sigma_max_; }
  bool is_spherical() const noexcept;

  const std::optional<MedianRadius>& median_radius() const noexcept { return median_radius_; }
  /// Throws MissingMedianRadius when the radius has not been estimated yet.
  double radius() const;
  GaussianParams with_median_radius(MedianRadius radius) const;
  GaussianParams with_center(Vector center) const;

  /// Dense covariance; intended for moderate n only.
  Matrix covariance() const;
  /// Unit eigenvector of the largest eigenvalue.
  Vector top_direction() const;
  /// w^T Q w without forming Q.
  double directional_variance(const Vector& w) const;

  /// Writes center + rotation * (sqrt(lambda) .* z) into out for a standard normal z.
  void transform_standard(std::span<const double> z, std::span<double> out) const;

 private:
  friend GaussianParams make_gaussian(Vector, Vector, std::optional<Matrix>);

  Vector center_;
  Vector eigenvalues_;
  Vector scales_;
  std::optional<Matrix> rotation_;
  double sigma_max_ = 0.0;
  std::optional<MedianRadius> median_radius_;
};

GaussianParams make_gaussian(Vector center, Vector eigenvalues, std::optional<Matrix> rotation = std::nullopt);

/// Converts a raw symmetric covariance to spectral form via eigendecomposition.
GaussianParams gaussian_from_covariance(Vector center, const Matrix& covariance);

/// Spherical component sigma^2 * I without storing a rotation.
GaussianParams make_spherical(Vector center, double sigma);

/// Haar-distributed rotation (QR of a Gaussian matrix with sign correction).
Matrix random_rotation(Index n, Rng& rng);

/// Draws `count` i.i.d. rows.
PointMatrix sample(const GaussianParams& params, Rng& rng, Index count);
void sample_into(const GaussianParams& params, Rng& rng, std::span<double> row);

double log_density(const GaussianParams& params, std::span<const double> x);

/// Spherical components use the exact chi-square median; everything else
/// goes through the Monte Carlo estimator.
MedianRadius median_radius(const GaussianParams& params, Rng& rng, Index num_samples = 100000);
MedianRadius median_radius_monte_carlo(const GaussianParams& params, Rng& rng, Index num_samples);
MedianRadius median_radius_exact_spherical(const GaussianParams& params);
double chi_square_median(double dof);

GaussianParams with_estimated_radius(const GaussianParams& params, Rng& rng, Index num_samples = 100000);

struct CovarianceFit {
  Vector mean;
  Matrix covariance;
  bool degenerate = false;
};

/// Mean and 1/M-normalised covariance of the rows.
CovarianceFit sample_covariance_fit(const PointMatrix& points);

class Mixture {
 public:
  /// w_min defaults to the smallest weight.
  Mixture(std::vector<GaussianParams> components, std::vector<double> weights,
          std::optional<double> w_min = std::nullopt);

  const std::vector<GaussianParams>& components() const noexcept { return components_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double w_min() const noexcept { return w_min_; }
  std::size_t k() const noexcept { return components_.size(); }
  Index dim() const noexcept { return components_.front().dim(); }
  bool radii_known() const noexcept;

  /// Copy with every component's median radius estimated on stream rng.stream(i).
  Mixture with_estimated_radii(const Rng& rng, Index num_samples = 100000) const;

 private:
  std::vector<GaussianParams> components_;
  std::vector<double> weights_;
  double w_min_;
};

/// Per-component counts checked against 1.1 w_i |S| >= |S_i| >= 0.9 w_i |S|.
struct BalanceReport {
  std::vector<Index> counts;
  bool satisfied = true;
  std::string message;
};

BalanceReport check_balance(const std::vector<int>& labels, const std::vector<double>& weights);

struct LabeledSampleSet {
  PointMatrix points;
  std::optional<std::vector<int>> labels;
  /// Dimension of the space the sample lives in; larger than points.cols()
  /// for isometrically embedded samples.
  Index ambient_dim = 0;
  std::uint64_t seed = 0;
  std::optional<BalanceReport> balance;

  Index size() const noexcept { return points.rows(); }
  Index dim() const noexcept { return points.cols(); }
};

/// Labels i.i.d. categorical(weights) first, then one point per label.
LabeledSampleSet sample_mixture(const Mixture& mixture, Rng& rng, Index count);

/// Exact per-component counts (largest remainder of w_i * count) in shuffled order.
LabeledSampleSet sample_mixture_stratified(const Mixture& mixture, Rng& rng, Index count);

/// Spherical components sharing one center, sampled in the span of the
/// sample itself. Rows are an isometric image of a sample from the ambient
/// n-dimensional mixture (Bartlett decomposition of the Gaussian matrix),
/// with the common center mapped to the origin. Used when n exceeds count.
LabeledSampleSet sample_mixture_isometric(const Mixture& mixture, Rng& rng, Index count);

}  // namespace gmsep
