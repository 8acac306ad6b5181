#include "gmsep/classifier.hpp"

#include "gmsep/separation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace gmsep {

namespace {

// Above this dimension the distance table is built from a Gram product.
constexpr Index kGramDimension = 32;
constexpr Index kMaxStepCap = 1000000;

IndexSet all_indices(Index count) {
  IndexSet out(static_cast<std::size_t>(count));
  std::iota(out.begin(), out.end(), Index{0});
  return out;
}

std::string format_warning(const char* what, double value, double lo, double hi) {
  std::ostringstream msg;
  msg.precision(6);
  msg << what << " = " << value << " outside [" << lo << ", " << hi << "]";
  return msg.str();
}

}  // namespace

void ClassifierConfig::validate() const {
  require(k >= 1, ErrorCode::kInvalidArgument, "k must be at least 1");
  require(w_min > 0.0 && w_min <= 1.0, ErrorCode::kInvalidArgument, "w_min must lie in (0, 1]");
  require(static_cast<double>(k) * w_min <= 1.0 + 1e-12, ErrorCode::kInvalidArgument, "k * w_min must not exceed 1");
  require(delta > 0.0 && delta <= 1.0, ErrorCode::kInvalidDelta, "delta must lie in (0, 1]");
  if (t_override) require(*t_override > 0.0, ErrorCode::kInvalidArgument, "the classifier requires t > 0");
  if (step_cap) require(*step_cap >= 1, ErrorCode::kInvalidArgument, "step cap must be positive");
  require(power_iter.max_iters >= 1 && power_iter.tolerance > 0.0, ErrorCode::kInvalidArgument,
          "power iteration needs positive iterations and tolerance");
}

std::vector<int> Partition::labels(Index sample_count) const {
  std::vector<int> out(static_cast<std::size_t>(sample_count), -1);
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (Index i : clusters[c]) out[static_cast<std::size_t>(i)] = static_cast<int>(c);
  return out;
}

GroundTruth ground_truth(const Mixture& mixture, const std::vector<int>& labels) {
  GroundTruth truth;
  truth.labels = labels;
  for (const auto& c : mixture.components()) {
    truth.sigma_max.push_back(c.sigma_max());
    truth.radius.push_back(c.median_radius() ? c.median_radius()->value : std::numeric_limits<double>::quiet_NaN());
  }
  return truth;
}

DistanceTable::DistanceTable(const PointMatrix& points) {
  const Index m = points.rows();
  sq_.resize(m, m);
  if (points.cols() < kGramDimension) {
    for (Index i = 0; i < m; ++i) {
      sq_(i, i) = 0.0;
      for (Index j = i + 1; j < m; ++j) {
        const double d = (points.row(i) - points.row(j)).squaredNorm();
        sq_(i, j) = d;
        sq_(j, i) = d;
      }
    }
    return;
  }
  const Vector mean = points.colwise().mean().transpose();
  const Matrix centered = points.rowwise() - mean.transpose();
  Matrix gram(m, m);
  gram.setZero();
  gram.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  const Vector norms = gram.diagonal();
  for (Index j = 0; j < m; ++j) {
    sq_(j, j) = 0.0;
    for (Index i = j + 1; i < m; ++i) {
      const double d = std::max(0.0, norms[i] + norms[j] - 2.0 * gram(i, j));
      sq_(i, j) = d;
      sq_(j, i) = d;
    }
  }
}

DenseBall smallest_dense_ball(const DistanceTable& distances, const IndexSet& subset, Index threshold) {
  require(threshold >= 1, ErrorCode::kThresholdTooLarge, "threshold must be at least 1");
  if (threshold > static_cast<Index>(subset.size())) {
    std::ostringstream msg;
    msg << "threshold " << threshold << " exceeds the " << subset.size() << " remaining points";
    fail(ErrorCode::kThresholdTooLarge, msg.str());
  }
  IndexSet order = subset;
  std::sort(order.begin(), order.end());
  DenseBall best;
  double best_sq = std::numeric_limits<double>::infinity();
  std::vector<double> row(order.size());
  const auto nth = static_cast<std::ptrdiff_t>(threshold - 1);
  for (Index x : order) {
    for (std::size_t j = 0; j < order.size(); ++j) row[j] = distances.sq(x, order[j]);
    std::nth_element(row.begin(), row.begin() + nth, row.end());
    const double candidate = row[static_cast<std::size_t>(nth)];
    if (candidate < best_sq) {
      best_sq = candidate;
      best.center_index = x;
    }
  }
  best.alpha = std::sqrt(best_sq);
  return best;
}

DenseBall smallest_dense_ball(const PointMatrix& points, const IndexSet& subset, Index threshold) {
  return smallest_dense_ball(DistanceTable(points), subset, threshold);
}

VarianceResult max_variance(const PointMatrix& points, const IndexSet& subset, const PowerIterationOptions& options) {
  require(!subset.empty(), ErrorCode::kInvalidArgument, "max_variance needs at least one point");
  const Index d = points.cols();
  const auto q = static_cast<Index>(subset.size());
  Matrix centered(q, d);
  for (Index r = 0; r < q; ++r) centered.row(r) = points.row(subset[static_cast<std::size_t>(r)]);
  const Eigen::RowVectorXd mean = centered.colwise().mean();
  centered.rowwise() -= mean;

  const Eigen::RowVectorXd range = centered.colwise().maxCoeff() - centered.colwise().minCoeff();
  Index widest = 0;
  range.maxCoeff(&widest);

  VarianceResult result;
  Vector v = Vector::Constant(d, 1e-3 / std::sqrt(static_cast<double>(d)));
  v[widest] += 1.0;
  v.normalize();
  result.direction = v;
  if (range[widest] == 0.0) {
    result.direction = Vector::Unit(d, widest);
    return result;
  }

  const double inv_q = 1.0 / static_cast<double>(q);
  result.converged = false;
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    const Vector w = centered.transpose() * (centered * v) * inv_q;
    const double lambda = v.dot(w);
    result.beta = lambda;
    result.direction = v;
    result.iterations = iter;
    const double norm = w.norm();
    if (norm == 0.0) {
      result.converged = true;
      break;
    }
    if ((w - lambda * v).norm() <= options.tolerance * lambda) {
      result.converged = true;
      break;
    }
    v = w / norm;
  }
  return result;
}

VarianceResult max_variance(const PointMatrix& points, const PowerIterationOptions& options) {
  return max_variance(points, all_indices(points.rows()), options);
}

Index find_gap(const DistanceTable& distances, const IndexSet& subset, Index center_index, double alpha, double nu,
               Index step_cap) {
  require(nu > 0.0, ErrorCode::kInvalidArgument, "step size nu must be positive");
  std::vector<double> radii;
  radii.reserve(subset.size());
  for (Index y : subset) radii.push_back(distances.dist(center_index, y));
  std::sort(radii.begin(), radii.end());

  std::size_t next = 0;
  for (Index s = 1; s <= step_cap; ++s) {
    const double inner = alpha + static_cast<double>(s - 1) * nu;
    const double outer = alpha + static_cast<double>(s) * nu;
    while (next < radii.size() && radii[next] <= inner) ++next;
    if (next == radii.size() || radii[next] > outer) return s;
  }
  std::ostringstream msg;
  msg << "no empty annulus of width " << nu << " within " << step_cap << " steps";
  fail(ErrorCode::kNoGapWithinCap, msg.str());
}

Index find_gap(const PointMatrix& points, const IndexSet& subset, Index center_index, double alpha, double nu,
               Index step_cap) {
  return find_gap(DistanceTable(points), subset, center_index, alpha, nu, step_cap);
}

namespace {

IndexSet ball(const DistanceTable& distances, const IndexSet& subset, Index center, double radius) {
  IndexSet inside;
  for (Index y : subset)
    if (distances.dist(center, y) <= radius) inside.push_back(y);
  return inside;
}

IndexSet without(const IndexSet& from, const IndexSet& removed) {
  IndexSet out;
  out.reserve(from.size() - std::min(from.size(), removed.size()));
  std::set_difference(from.begin(), from.end(), removed.begin(), removed.end(), std::back_inserter(out));
  return out;
}

void runtime_checks(PeelRecord& peel, const IndexSet& remaining, const ClassifierConfig& config, double t,
                    const GroundTruth& truth) {
  const auto label = static_cast<std::size_t>(truth.labels[static_cast<std::size_t>(peel.center_index)]);
  const double sigma = truth.sigma_max[label];
  const double sigma_sq = sigma * sigma;
  const double w = config.w_min;

  const double beta_hi = 4.0 / w * sigma_sq;
  const double beta_lo = w * w * sigma_sq / 8.0;
  if (peel.beta > beta_hi || peel.beta < beta_lo) {
    peel.warnings.push_back(format_warning("beta", peel.beta, beta_lo, beta_hi));
  } else if (peel.nu > sigma) {
    peel.warnings.push_back(format_warning("nu", peel.nu, 0.0, sigma));
  }
  if (peel.beta_prime > 2.5 * sigma_sq || peel.beta_prime < 0.16 * sigma_sq) {
    peel.warnings.push_back(format_warning("beta'", peel.beta_prime, 0.16 * sigma_sq, 2.5 * sigma_sq));
  }

  std::vector<bool> live(truth.sigma_max.size(), false);
  for (Index i : remaining) live[static_cast<std::size_t>(truth.labels[static_cast<std::size_t>(i)])] = true;
  for (std::size_t j = 0; j < live.size(); ++j) {
    if (!live[j] || std::isnan(truth.radius[j])) continue;
    const double bound = std::sqrt(2.0) * (truth.radius[j] + 2.0 * t * truth.sigma_max[j]);
    if (peel.alpha > bound) {
      std::ostringstream msg;
      msg << "alpha = " << peel.alpha << " exceeds sqrt(2)(R + 2 t sigma) = " << bound << " of component " << j;
      peel.warnings.push_back(msg.str());
    }
  }
}

}  // namespace

Partition classify_general(const LabeledSampleSet& samples, const ClassifierConfig& config, const GroundTruth* truth) {
  config.validate();
  const Index total = samples.size();
  const double exact_threshold = 3.0 * config.w_min * static_cast<double>(total) / 4.0;
  // Ceiling keeps at least 3 w_min |S| / 4 points; the epsilon absorbs rounding in w_min itself.
  const auto threshold = std::max<Index>(1, static_cast<Index>(std::ceil(exact_threshold - 1e-9)));
  if (config.k * threshold > total) {
    std::ostringstream msg;
    msg << "|S| = " << total << " is below k * threshold = " << config.k * threshold;
    fail(ErrorCode::kTooFewSamples, msg.str());
  }
  if (truth) {
    require(static_cast<Index>(truth->labels.size()) == total, ErrorCode::kIndexMismatch,
            "ground-truth labels differ in length from the sample");
  }

  const double t = config.t_override.value_or(total >= 2 ? schedule_t(total, config.delta) : 1.0);
  const double log_term = std::log(static_cast<double>(total) / config.delta) + 1.0;
  const DistanceTable distances(samples.points);

  Partition partition;
  PeelTrace trace;
  trace.threshold = threshold;
  trace.t = t;
  trace.delta = config.delta;

  IndexSet remaining = all_indices(total);
  for (Index iteration = 0; iteration < config.k; ++iteration) {
    if (remaining.empty()) {
      fail(ErrorCode::kEmptyPeel, "all points were removed after " + std::to_string(iteration) + " peels");
    }
    PeelRecord peel;
    const DenseBall dense = smallest_dense_ball(distances, remaining, threshold);
    peel.center_index = dense.center_index;
    peel.alpha = dense.alpha;

    const IndexSet q = ball(distances, remaining, dense.center_index, dense.alpha);
    peel.beta = max_variance(samples.points, q, config.power_iter).beta;
    peel.nu = std::sqrt(config.w_min * peel.beta / 8.0);

    if (peel.nu > 0.0) {
      Index cap = kMaxStepCap;
      if (config.step_cap) {
        cap = *config.step_cap;
      } else {
        double farthest = 0.0;
        for (Index y : remaining) farthest = std::max(farthest, distances.dist(dense.center_index, y));
        const double steps = std::ceil(farthest / peel.nu) + 4.0 * std::ceil(std::sqrt(peel.beta) / peel.nu);
        cap = static_cast<Index>(std::min(steps, static_cast<double>(kMaxStepCap)));
      }
      peel.s = find_gap(distances, remaining, dense.center_index, dense.alpha, peel.nu, cap);
    } else {
      // Zero spread: both balls in the step-3 comparison coincide at s = 1.
      peel.s = 1;
    }

    const double grown = peel.alpha + static_cast<double>(peel.s) * peel.nu;
    const IndexSet q_prime = ball(distances, remaining, dense.center_index, grown);
    peel.beta_prime = max_variance(samples.points, q_prime, config.power_iter).beta;
    peel.removal_radius = grown + 3.0 * std::sqrt(peel.beta_prime) * log_term;
    peel.removed = ball(distances, remaining, dense.center_index, peel.removal_radius);
    if (peel.removed.empty()) fail(ErrorCode::kEmptyPeel, "peel " + std::to_string(iteration) + " removed nothing");

    if (truth) runtime_checks(peel, remaining, config, t, *truth);
    remaining = without(remaining, peel.removed);
    partition.clusters.push_back(peel.removed);
    trace.peels.push_back(std::move(peel));
  }
  partition.trace = std::move(trace);
  if (!remaining.empty()) {
    std::ostringstream msg;
    msg << remaining.size() << " points remain after " << config.k << " peels";
    fail(ErrorCode::kResidualPointsAfterKPeels, msg.str());
  }
  return partition;
}

Partition classify_spherical(const LabeledSampleSet& samples, Index k, double t) {
  require(k >= 1, ErrorCode::kInvalidArgument, "k must be at least 1");
  require(t > 0.0, ErrorCode::kInvalidArgument, "t must be positive");
  require(samples.size() >= 1, ErrorCode::kTooFewSamples, "no samples");
  const Index n = samples.ambient_dim > 0 ? samples.ambient_dim : samples.dim();
  const double widen = 1.0 + 3.0 * t / std::sqrt(static_cast<double>(n));
  const DistanceTable distances(samples.points);

  Partition partition;
  IndexSet remaining = all_indices(samples.size());
  for (Index iteration = 0; iteration < k; ++iteration) {
    if (remaining.empty()) {
      fail(ErrorCode::kEmptyPeel, "all points were removed after " + std::to_string(iteration) + " peels");
    }
    Index x0 = remaining.front();
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < remaining.size(); ++a)
      for (std::size_t b = a + 1; b < remaining.size(); ++b) {
        const double d = distances.sq(remaining[a], remaining[b]);
        if (d < best_sq) {
          best_sq = d;
          x0 = remaining[a];
        }
      }
    const double radius = remaining.size() >= 2 ? std::sqrt(best_sq) * widen : 0.0;
    IndexSet removed = ball(distances, remaining, x0, radius);
    remaining = without(remaining, removed);
    partition.clusters.push_back(std::move(removed));
  }
  if (!remaining.empty()) {
    std::ostringstream msg;
    msg << remaining.size() << " points remain after " << k << " peels";
    fail(ErrorCode::kResidualPointsAfterKPeels, msg.str());
  }
  return partition;
}

}  // namespace gmsep
