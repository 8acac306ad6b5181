#pragma once

#include "gmsep/common.hpp"
#include "gmsep/gaussian_model.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace gmsep {

struct PowerIterationOptions {
  int max_iters = 500;
  /// Stop once |C v - lambda v| <= tolerance * lambda.
  double tolerance = 1e-4;
};

struct ClassifierConfig {
  Index k = 1;
  double w_min = 1.0;
  double delta = 0.05;
  /// Falls back to schedule_t(|S|, delta). Only used by the runtime checks.
  std::optional<double> t_override;
  /// Largest s examined when looking for an empty annulus; derived from the data when unset.
  std::optional<Index> step_cap;
  PowerIterationOptions power_iter;

  void validate() const;
};

/// One pass of the peeling loop.
struct PeelRecord {
  Index center_index = -1;
  double alpha = 0.0;
  double beta = 0.0;
  double nu = 0.0;
  Index s = 0;
  double beta_prime = 0.0;
  double removal_radius = 0.0;
  IndexSet removed;
  std::vector<std::string> warnings;
};

struct PeelTrace {
  Index threshold = 0;
  double t = 0.0;
  double delta = 0.0;
  std::vector<PeelRecord> peels;
};

struct Partition {
  std::vector<IndexSet> clusters;
  std::optional<PeelTrace> trace;

  /// Cluster id per sample index, -1 for uncovered indices.
  std::vector<int> labels(Index sample_count) const;
};

/// Generation metadata used only for the runtime sanity checks.
struct GroundTruth {
  std::vector<int> labels;
  std::vector<double> sigma_max;
  std::vector<double> radius;
};

GroundTruth ground_truth(const Mixture& mixture, const std::vector<int>& labels);

/// Pairwise squared distances of every sample, computed once and shared by all peels.
class DistanceTable {
 public:
  explicit DistanceTable(const PointMatrix& points);

  double sq(Index i, Index j) const noexcept { return sq_(i, j); }
  double dist(Index i, Index j) const noexcept { return std::sqrt(sq_(i, j)); }
  Index size() const noexcept { return sq_.rows(); }

 private:
  Matrix sq_;
};

struct DenseBall {
  Index center_index = -1;
  double alpha = 0.0;
};

/// Smallest radius alpha such that some x in `subset` has `threshold` points
/// of `subset` (itself included) within alpha. Ties go to the lowest index.
DenseBall smallest_dense_ball(const DistanceTable& distances, const IndexSet& subset, Index threshold);
DenseBall smallest_dense_ball(const PointMatrix& points, const IndexSet& subset, Index threshold);

struct VarianceResult {
  double beta = 0.0;
  Vector direction;
  int iterations = 0;
  bool converged = true;
};

/// Largest eigenvalue of the 1/|Q|-normalised covariance of the selected
/// rows, by single-vector power iteration.
VarianceResult max_variance(const PointMatrix& points, const IndexSet& subset,
                            const PowerIterationOptions& options = {});
VarianceResult max_variance(const PointMatrix& points, const PowerIterationOptions& options = {});

/// Least s >= 1 with no point of `subset` at distance in (alpha + (s-1) nu, alpha + s nu] from the center.
Index find_gap(const DistanceTable& distances, const IndexSet& subset, Index center_index, double alpha, double nu,
               Index step_cap);
Index find_gap(const PointMatrix& points, const IndexSet& subset, Index center_index, double alpha, double nu,
               Index step_cap);

/// Peels k clusters, each grown from the densest small ball and closed off
/// at the first empty annulus plus a variance-scaled margin.
Partition classify_general(const LabeledSampleSet& samples, const ClassifierConfig& config,
                           const GroundTruth* truth = nullptr);

/// Spherical variant: each peel keeps the ball around the closest remaining
/// pair, radius |x0 - y0| (1 + 3t / sqrt(n)).
Partition classify_spherical(const LabeledSampleSet& samples, Index k, double t);

}  // namespace gmsep
