#include "gmsep/ml_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace gmsep {

namespace {

constexpr double kMaxExhaustiveSubsets = 1e6;

double point_sq(const PointMatrix& a, Index i, const PointMatrix& b, Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

PointMatrix gather_rows(const PointMatrix& points, const IndexSet& rows) {
  PointMatrix out(static_cast<Index>(rows.size()), points.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = points.row(rows[r]);
  return out;
}

double assigned_cost(const PointMatrix& points, const PointMatrix& centers, const std::vector<int>& assignment) {
  require(static_cast<Index>(assignment.size()) == points.rows(), ErrorCode::kDimensionMismatch,
          "assignment length differs from point count");
  require(centers.cols() == points.cols(), ErrorCode::kDimensionMismatch, "centers and points differ in dimension");
  double cost = 0.0;
  for (Index j = 0; j < points.rows(); ++j) cost += point_sq(points, j, centers, assignment[static_cast<std::size_t>(j)]);
  return cost;
}

KMedianSolution finish_solution(const PointMatrix& points, IndexSet center_indices, Normalization normalization) {
  KMedianSolution solution;
  solution.center_indices = std::move(center_indices);
  solution.centers = gather_rows(points, solution.center_indices);
  solution.assignment = nearest_centers(points, solution.centers, &solution.objective);
  solution.sigma_hat = sigma_hat(points, solution.centers, solution.assignment, normalization);
  const LogLikelihood ll = spherical_log_likelihood(points, solution, std::nullopt, normalization);
  solution.log_likelihood = ll.value;
  solution.zero_sigma = ll.zero_sigma;
  return solution;
}

}  // namespace

double binomial_coefficient(Index m, Index k) {
  if (k < 0 || k > m) return 0.0;
  k = std::min(k, m - k);
  double result = 1.0;
  for (Index i = 1; i <= k; ++i) {
    result = result * static_cast<double>(m - k + i) / static_cast<double>(i);
    if (!std::isfinite(result)) return std::numeric_limits<double>::infinity();
  }
  return std::round(result);
}

std::vector<int> nearest_centers(const PointMatrix& points, const PointMatrix& centers, double* cost) {
  require(centers.rows() >= 1, ErrorCode::kInvalidArgument, "need at least one center");
  require(centers.cols() == points.cols(), ErrorCode::kDimensionMismatch, "centers and points differ in dimension");
  std::vector<int> assignment(static_cast<std::size_t>(points.rows()));
  double total = 0.0;
  for (Index j = 0; j < points.rows(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (Index c = 0; c < centers.rows(); ++c) {
      const double d = point_sq(points, j, centers, c);
      if (d < best) {
        best = d;
        best_c = static_cast<int>(c);
      }
    }
    assignment[static_cast<std::size_t>(j)] = best_c;
    total += best;
  }
  if (cost) *cost = total;
  return assignment;
}

double kmedian_cost(const PointMatrix& points, const PointMatrix& centers) {
  double cost = 0.0;
  nearest_centers(points, centers, &cost);
  return cost;
}

double sigma_hat(const PointMatrix& points, const PointMatrix& centers, const std::vector<int>& assignment,
                 Normalization normalization) {
  const double cost = assigned_cost(points, centers, assignment);
  const double mn = static_cast<double>(points.rows()) * static_cast<double>(points.cols());
  const double factor = normalization == Normalization::kPaper ? 2.0 : 1.0;
  return std::sqrt(factor * cost / mn);
}

LogLikelihood spherical_log_likelihood(const PointMatrix& points, const KMedianSolution& solution,
                                       std::optional<double> sigma, Normalization normalization) {
  const double cost = assigned_cost(points, solution.centers, solution.assignment);
  const double s = sigma ? *sigma : sigma_hat(points, solution.centers, solution.assignment, normalization);
  if (s == 0.0) return LogLikelihood{std::numeric_limits<double>::infinity(), true};
  require(s > 0.0, ErrorCode::kInvalidArgument, "sigma must be non-negative");
  const double mn = static_cast<double>(points.rows()) * static_cast<double>(points.cols());
  const double scale = normalization == Normalization::kPaper ? s : s * s;
  return LogLikelihood{-(0.5 * mn * std::log(2.0 * std::numbers::pi * scale) + cost / (2.0 * s * s)), false};
}

KMedianSolution kmedian_local_search(const PointMatrix& points, Index k, Rng& rng, const LocalSearchConfig& config,
                                     Normalization normalization) {
  const Index m = points.rows();
  if (k < 1 || m < k) {
    std::ostringstream msg;
    msg << "need M >= k >= 1, got M = " << m << ", k = " << k;
    fail(ErrorCode::kTooFewPoints, msg.str());
  }
  require(config.max_rounds >= 0 && config.improvement_factor >= 0.0, ErrorCode::kInvalidArgument,
          "invalid local search configuration");

  // Farthest-point seeding from a random first center.
  IndexSet centers{static_cast<Index>(rng.below(static_cast<std::uint64_t>(m)))};
  std::vector<bool> is_center(static_cast<std::size_t>(m), false);
  is_center[static_cast<std::size_t>(centers[0])] = true;
  std::vector<double> to_nearest(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) to_nearest[static_cast<std::size_t>(j)] = point_sq(points, j, points, centers[0]);
  while (static_cast<Index>(centers.size()) < k) {
    Index pick = -1;
    double far = -1.0;
    for (Index j = 0; j < m; ++j) {
      if (is_center[static_cast<std::size_t>(j)]) continue;
      if (to_nearest[static_cast<std::size_t>(j)] > far) {
        far = to_nearest[static_cast<std::size_t>(j)];
        pick = j;
      }
    }
    centers.push_back(pick);
    is_center[static_cast<std::size_t>(pick)] = true;
    for (Index j = 0; j < m; ++j)
      to_nearest[static_cast<std::size_t>(j)] =
          std::min(to_nearest[static_cast<std::size_t>(j)], point_sq(points, j, points, pick));
  }

  std::vector<double> nearest(static_cast<std::size_t>(m));
  std::vector<double> second(static_cast<std::size_t>(m));
  std::vector<int> owner(static_cast<std::size_t>(m));
  const auto refresh = [&]() {
    double cost = 0.0;
    for (Index j = 0; j < m; ++j) {
      double best = std::numeric_limits<double>::infinity();
      double runner = std::numeric_limits<double>::infinity();
      int slot = 0;
      for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = point_sq(points, j, points, centers[c]);
        if (d < best) {
          runner = best;
          best = d;
          slot = static_cast<int>(c);
        } else if (d < runner) {
          runner = d;
        }
      }
      nearest[static_cast<std::size_t>(j)] = best;
      second[static_cast<std::size_t>(j)] = runner;
      owner[static_cast<std::size_t>(j)] = slot;
      cost += best;
    }
    return cost;
  };

  double cost = refresh();
  std::vector<double> history{cost};
  std::vector<double> to_candidate(static_cast<std::size_t>(m));
  int rounds = 0;
  const double accept_ratio = 1.0 - config.improvement_factor / static_cast<double>(k);
  while (rounds < config.max_rounds) {
    double best_cost = cost;
    std::size_t best_slot = 0;
    Index best_candidate = -1;
    for (Index p = 0; p < m; ++p) {
      if (is_center[static_cast<std::size_t>(p)]) continue;
      for (Index j = 0; j < m; ++j) to_candidate[static_cast<std::size_t>(j)] = point_sq(points, j, points, p);
      for (std::size_t c = 0; c < centers.size(); ++c) {
        double swapped = 0.0;
        for (Index j = 0; j < m; ++j) {
          const auto u = static_cast<std::size_t>(j);
          const double kept = owner[u] == static_cast<int>(c) ? second[u] : nearest[u];
          swapped += std::min(kept, to_candidate[u]);
        }
        if (swapped < best_cost) {
          best_cost = swapped;
          best_slot = c;
          best_candidate = p;
        }
      }
    }
    if (best_candidate < 0 || !(best_cost < accept_ratio * cost)) break;
    is_center[static_cast<std::size_t>(centers[best_slot])] = false;
    centers[best_slot] = best_candidate;
    is_center[static_cast<std::size_t>(best_candidate)] = true;
    cost = refresh();
    history.push_back(cost);
    ++rounds;
  }

  KMedianSolution solution = finish_solution(points, std::move(centers), normalization);
  solution.history = std::move(history);
  solution.rounds = rounds;
  return solution;
}

KMedianSolution kmedian_exhaustive(const PointMatrix& points, Index k, Normalization normalization) {
  const Index m = points.rows();
  if (k < 1 || m < k) {
    std::ostringstream msg;
    msg << "need M >= k >= 1, got M = " << m << ", k = " << k;
    fail(ErrorCode::kTooFewPoints, msg.str());
  }
  const double subsets = binomial_coefficient(m, k);
  if (subsets > kMaxExhaustiveSubsets) {
    std::ostringstream msg;
    msg << "C(" << m << ", " << k << ") = " << subsets << " subsets exceeds the 10^6 limit";
    fail(ErrorCode::kInstanceTooLarge, msg.str());
  }

  Matrix table(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) table(i, j) = point_sq(points, i, points, j);

  IndexSet current(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) current[static_cast<std::size_t>(i)] = i;
  IndexSet best = current;
  double best_cost = std::numeric_limits<double>::infinity();
  for (;;) {
    double cost = 0.0;
    for (Index j = 0; j < m; ++j) {
      double d = std::numeric_limits<double>::infinity();
      for (Index c : current) d = std::min(d, table(j, c));
      cost += d;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = current;
    }
    // Next subset in lexicographic order.
    Index pos = k - 1;
    while (pos >= 0 && current[static_cast<std::size_t>(pos)] == m - k + pos) --pos;
    if (pos < 0) break;
    ++current[static_cast<std::size_t>(pos)];
    for (Index i = pos + 1; i < k; ++i)
      current[static_cast<std::size_t>(i)] = current[static_cast<std::size_t>(i - 1)] + 1;
  }
  KMedianSolution solution = finish_solution(points, std::move(best), normalization);
  solution.history = {solution.objective};
  return solution;
}

SphericalFit fit_spherical_mixture(const PointMatrix& points, Index k, Rng& rng, const LocalSearchConfig& config,
                                   Normalization normalization) {
  SphericalFit fit;
  fit.solution = kmedian_local_search(points, k, rng, config, normalization);
  std::vector<Index> counts(static_cast<std::size_t>(k), 0);
  for (int c : fit.solution.assignment) ++counts[static_cast<std::size_t>(c)];
  for (Index c : counts) fit.weights.push_back(static_cast<double>(c) / static_cast<double>(points.rows()));
  return fit;
}

}  // namespace gmsep
