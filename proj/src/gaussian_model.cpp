#include "gmsep/gaussian_model.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace gmsep {

namespace {

constexpr double kRotationTolerance = 1e-8;
constexpr double kWeightTolerance = 1e-12;
constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile

}  // namespace

bool GaussianParams::is_spherical() const noexcept {
  const double lo = eigenvalues_.minCoeff();
  const double hi = eigenvalues_.maxCoeff();
  return hi - lo <= 1e-12 * hi;
}

double GaussianParams::radius() const {
  require(median_radius_.has_value(), ErrorCode::kMissingMedianRadius,
          "component median radius has not been estimated");
  return median_radius_->value;
}

GaussianParams GaussianParams::with_median_radius(MedianRadius radius) const {
  GaussianParams copy = *this;
  copy.median_radius_ = radius;
  return copy;
}

GaussianParams GaussianParams::with_center(Vector center) const {
  require(center.size() == dim(), ErrorCode::kDimensionMismatch, "center length differs from dimension");
  GaussianParams copy = *this;
  copy.center_ = std::move(center);
  return copy;
}

Matrix GaussianParams::covariance() const {
  if (!rotation_) return eigenvalues_.asDiagonal();
  return *rotation_ * eigenvalues_.asDiagonal() * rotation_->transpose();
}

Vector GaussianParams::top_direction() const {
  Index top = 0;
  eigenvalues_.maxCoeff(&top);
  if (rotation_) return rotation_->col(top);
  Vector e = Vector::Zero(dim());
  e[top] = 1.0;
  return e;
}

double GaussianParams::directional_variance(const Vector& w) const {
  if (!rotation_) return (w.array().square() * eigenvalues_.array()).sum();
  const Vector projected = rotation_->transpose() * w;
  return (projected.array().square() * eigenvalues_.array()).sum();
}

void GaussianParams::transform_standard(std::span<const double> z, std::span<double> out) const {
  const Index n = dim();
  Eigen::Map<const Vector> zv(z.data(), n);
  Eigen::Map<Vector> ov(out.data(), n);
  if (rotation_) {
    ov = center_ + *rotation_ * scales_.cwiseProduct(zv);
  } else {
    ov = center_ + scales_.cwiseProduct(zv);
  }
}

GaussianParams make_gaussian(Vector center, Vector eigenvalues, std::optional<Matrix> rotation) {
  const Index n = center.size();
  require(n >= 1, ErrorCode::kDimensionMismatch, "dimension must be at least 1");
  require(eigenvalues.size() == n, ErrorCode::kDimensionMismatch, "center and eigenvalues differ in length");
  for (Index i = 0; i < n; ++i) {
    if (!(eigenvalues[i] > 0.0) || !std::isfinite(eigenvalues[i])) {
      std::ostringstream msg;
      msg << "eigenvalue " << i << " = " << eigenvalues[i] << " is not strictly positive";
      fail(ErrorCode::kNonPositiveEigenvalue, msg.str());
    }
  }
  if (rotation) {
    require(rotation->rows() == n && rotation->cols() == n, ErrorCode::kDimensionMismatch,
            "rotation must be n x n");
    const double gram_error = (rotation->transpose() * *rotation - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (gram_error > kRotationTolerance) {
      std::ostringstream msg;
      msg << "rotation^T rotation deviates from identity by " << gram_error;
      fail(ErrorCode::kNonOrthonormalRotation, msg.str());
    }
  }
  GaussianParams params;
  params.center_ = std::move(center);
  params.eigenvalues_ = std::move(eigenvalues);
  params.scales_ = params.eigenvalues_.cwiseSqrt();
  params.rotation_ = std::move(rotation);
  params.sigma_max_ = std::sqrt(params.eigenvalues_.maxCoeff());
  return params;
}

GaussianParams gaussian_from_covariance(Vector center, const Matrix& covariance) {
  const Index n = center.size();
  require(covariance.rows() == n && covariance.cols() == n, ErrorCode::kDimensionMismatch,
          "covariance must be n x n");
  const Matrix symmetric = 0.5 * (covariance + covariance.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
  require(solver.info() == Eigen::Success, ErrorCode::kNonPositiveEigenvalue, "eigendecomposition failed");
  return make_gaussian(std::move(center), solver.eigenvalues(), solver.eigenvectors());
}

GaussianParams make_spherical(Vector center, double sigma) {
  const Index n = center.size();
  return make_gaussian(std::move(center), Vector::Constant(n, sigma * sigma));
}

Matrix random_rotation(Index n, Rng& rng) {
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

void sample_into(const GaussianParams& params, Rng& rng, std::span<double> row) {
  const Index n = params.dim();
  std::vector<double> z(static_cast<std::size_t>(n));
  for (auto& v : z) v = rng.normal();
  params.transform_standard(z, row);
}

PointMatrix sample(const GaussianParams& params, Rng& rng, Index count) {
  require(count >= 1, ErrorCode::kInvalidArgument, "sample count must be positive");
  const Index n = params.dim();
  PointMatrix out(count, n);
  std::vector<double> z(static_cast<std::size_t>(n));
  for (Index i = 0; i < count; ++i) {
    for (auto& v : z) v = rng.normal();
    params.transform_standard(z, std::span<double>(out.row(i).data(), static_cast<std::size_t>(n)));
  }
  return out;
}

double log_density(const GaussianParams& params, std::span<const double> x) {
  const Index n = params.dim();
  require(static_cast<Index>(x.size()) == n, ErrorCode::kDimensionMismatch, "query point has wrong length");
  Eigen::Map<const Vector> xv(x.data(), n);
  const Vector diff = xv - params.center();
  const Vector projected = params.rotation() ? Vector(params.rotation()->transpose() * diff) : diff;
  const double mahalanobis = (projected.array().square() / params.eigenvalues().array()).sum();
  const double log_det = params.eigenvalues().array().log().sum();
  return -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det - 0.5 * mahalanobis;
}

double chi_square_median(double dof) {
  require(dof > 0.0, ErrorCode::kInvalidArgument, "degrees of freedom must be positive");
  const auto cdf = [dof](double x) { return boost::math::gamma_p(0.5 * dof, 0.5 * x); };
  double lo = std::max(0.0, dof - 1.0);
  double hi = dof;
  while (cdf(lo) > 0.5) lo *= 0.5;
  while (cdf(hi) < 0.5) hi *= 2.0;
  // Bisection until the bracket stops shrinking in double precision.
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) < 0.5) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

MedianRadius median_radius_exact_spherical(const GaussianParams& params) {
  require(params.is_spherical(), ErrorCode::kInvalidArgument, "exact median radius requires a spherical component");
  const double sigma = params.sigma_max();
  return MedianRadius{sigma * std::sqrt(chi_square_median(static_cast<double>(params.dim()))), 0.0, true};
}

MedianRadius median_radius_monte_carlo(const GaussianParams& params, Rng& rng, Index num_samples) {
  require(num_samples >= 1000, ErrorCode::kTooFewSamples, "median radius needs at least 1000 samples");
  const Index n = params.dim();
  std::vector<double> z(static_cast<std::size_t>(n));
  std::vector<double> x(static_cast<std::size_t>(n));
  std::vector<double> norms(static_cast<std::size_t>(num_samples));
  for (Index s = 0; s < num_samples; ++s) {
    for (auto& v : z) v = rng.normal();
    params.transform_standard(z, x);
    double sq = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double d = x[i] - params.center()[i];
      sq += d * d;
    }
    norms[s] = std::sqrt(sq);
  }
  std::sort(norms.begin(), norms.end());
  const std::size_t m = norms.size();
  const double median = (m % 2 == 1) ? norms[m / 2] : 0.5 * (norms[m / 2 - 1] + norms[m / 2]);

  // Distribution-free interval from order statistics: rank ~ Binomial(m, 1/2).
  const double spread = 0.5 * kZ99 * std::sqrt(static_cast<double>(m));
  const auto lo_rank = static_cast<std::ptrdiff_t>(std::floor(0.5 * static_cast<double>(m) - spread));
  const auto hi_rank = static_cast<std::ptrdiff_t>(std::ceil(0.5 * static_cast<double>(m) + spread));
  const double lo = norms[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(lo_rank, 0, m - 1))];
  const double hi = norms[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(hi_rank, 0, m - 1))];
  return MedianRadius{median, std::max(median - lo, hi - median), false};
}

MedianRadius median_radius(const GaussianParams& params, Rng& rng, Index num_samples) {
  require(num_samples >= 1000, ErrorCode::kTooFewSamples, "median radius needs at least 1000 samples");
  if (params.is_spherical()) return median_radius_exact_spherical(params);
  return median_radius_monte_carlo(params, rng, num_samples);
}

GaussianParams with_estimated_radius(const GaussianParams& params, Rng& rng, Index num_samples) {
  return params.with_median_radius(median_radius(params, rng, num_samples));
}

CovarianceFit sample_covariance_fit(const PointMatrix& points) {
  require(points.rows() >= 2, ErrorCode::kTooFewSamples, "covariance fit needs at least two points");
  CovarianceFit fit;
  fit.mean = points.colwise().mean().transpose();
  const PointMatrix centered = points.rowwise() - fit.mean.transpose();
  fit.covariance = (centered.transpose() * centered) / static_cast<double>(points.rows());
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose());
  fit.degenerate = (centered.array() == 0.0).all();
  return fit;
}

Mixture::Mixture(std::vector<GaussianParams> components, std::vector<double> weights, std::optional<double> w_min)
    : components_(std::move(components)), weights_(std::move(weights)) {
  require(!components_.empty(), ErrorCode::kSchemaError, "mixture needs at least one component");
  require(components_.size() == weights_.size(), ErrorCode::kSchemaError, "one weight per component required");
  const Index n = components_.front().dim();
  for (const auto& c : components_)
    require(c.dim() == n, ErrorCode::kDimensionMismatch, "components differ in dimension");
  double total = 0.0;
  for (double w : weights_) {
    require(w > 0.0, ErrorCode::kSchemaError, "mixing weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "mixing weights sum to " << total << ", expected 1";
    fail(ErrorCode::kSchemaError, msg.str());
  }
  const double smallest = *std::min_element(weights_.begin(), weights_.end());
  w_min_ = w_min.value_or(smallest);
  require(w_min_ > 0.0 && w_min_ <= smallest, ErrorCode::kSchemaError, "w_min must be positive and at most every weight");
}

bool Mixture::radii_known() const noexcept {
  return std::all_of(components_.begin(), components_.end(),
                     [](const GaussianParams& c) { return c.median_radius().has_value(); });
}

Mixture Mixture::with_estimated_radii(const Rng& rng, Index num_samples) const {
  std::vector<GaussianParams> estimated;
  estimated.reserve(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) {
    Rng stream = rng.stream(i);
    estimated.push_back(with_estimated_radius(components_[i], stream, num_samples));
  }
  return Mixture(std::move(estimated), weights_, w_min_);
}

BalanceReport check_balance(const std::vector<int>& labels, const std::vector<double>& weights) {
  BalanceReport report;
  report.counts.assign(weights.size(), 0);
  for (int label : labels) ++report.counts[static_cast<std::size_t>(label)];
  const double total = static_cast<double>(labels.size());
  std::ostringstream msg;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double count = static_cast<double>(report.counts[i]);
    if (count > 1.1 * weights[i] * total || count < 0.9 * weights[i] * total) {
      report.satisfied = false;
      msg << "component " << i << " has " << report.counts[i] << " samples, expected within 10% of "
          << weights[i] * total << "; ";
    }
  }
  report.message = msg.str();
  return report;
}

namespace {

LabeledSampleSet draw_for_labels(const Mixture& mixture, Rng& rng, std::vector<int> labels) {
  LabeledSampleSet set;
  set.seed = rng.seed();
  set.ambient_dim = mixture.dim();
  set.points.resize(static_cast<Index>(labels.size()), mixture.dim());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& component = mixture.components()[static_cast<std::size_t>(labels[i])];
    sample_into(component, rng,
                std::span<double>(set.points.row(static_cast<Index>(i)).data(), static_cast<std::size_t>(mixture.dim())));
  }
  set.balance = check_balance(labels, mixture.weights());
  set.labels = std::move(labels);
  return set;
}

std::vector<int> categorical_labels(const Mixture& mixture, Rng& rng, Index count) {
  std::vector<int> labels(static_cast<std::size_t>(count));
  for (auto& label : labels) label = static_cast<int>(rng.categorical(mixture.weights()));
  return labels;
}

}  // namespace

LabeledSampleSet sample_mixture(const Mixture& mixture, Rng& rng, Index count) {
  require(count >= 1, ErrorCode::kInvalidArgument, "sample count must be positive");
  return draw_for_labels(mixture, rng, categorical_labels(mixture, rng, count));
}

LabeledSampleSet sample_mixture_stratified(const Mixture& mixture, Rng& rng, Index count) {
  require(count >= 1, ErrorCode::kInvalidArgument, "sample count must be positive");
  const auto& w = mixture.weights();
  std::vector<Index> counts(w.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  Index assigned = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double exact = w[i] * static_cast<double>(count);
    counts[i] = static_cast<Index>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < count; ++r, ++assigned) ++counts[remainders[r % remainders.size()].second];

  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < counts.size(); ++i) labels.insert(labels.end(), static_cast<std::size_t>(counts[i]), static_cast<int>(i));
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);
  return draw_for_labels(mixture, rng, std::move(labels));
}

LabeledSampleSet sample_mixture_isometric(const Mixture& mixture, Rng& rng, Index count) {
  require(count >= 1, ErrorCode::kInvalidArgument, "sample count must be positive");
  const Index n = mixture.dim();
  const Vector& center = mixture.components().front().center();
  for (const auto& c : mixture.components()) {
    require(c.is_spherical(), ErrorCode::kInvalidArgument, "isometric sampling requires spherical components");
    require(c.center() == center, ErrorCode::kInvalidArgument, "isometric sampling requires a common center");
  }
  if (n <= count) return sample_mixture(mixture, rng, count);

  std::vector<int> labels = categorical_labels(mixture, rng, count);
  LabeledSampleSet set;
  set.seed = rng.seed();
  set.ambient_dim = n;
  set.points = PointMatrix::Zero(count, count);
  // Z = L Q^T with L lower triangular: L_ii^2 ~ chi^2(n - i), L_ij ~ N(0,1) for j < i.
  for (Index i = 0; i < count; ++i) {
    const double sigma = mixture.components()[static_cast<std::size_t>(labels[i])].sigma_max();
    for (Index j = 0; j < i; ++j) set.points(i, j) = sigma * rng.normal();
    set.points(i, i) = sigma * std::sqrt(rng.chi_square(static_cast<double>(n - i)));
  }
  set.balance = check_balance(labels, mixture.weights());
  set.labels = std::move(labels);
  return set;
}

}  // namespace gmsep
