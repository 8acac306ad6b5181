#include "gmsep/separation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gmsep {

SeparationConfig SeparationConfig::paper(double t) {
  return SeparationConfig{t, 500.0, 100.0, SeparationMode::kPaper, false};
}

SeparationConfig SeparationConfig::practical(double t) {
  return SeparationConfig{t, 60.0, 30.0, SeparationMode::kPractical, false};
}

void SeparationConfig::validate() const {
  require(c1 > 0.0 && c2 > 0.0, ErrorCode::kInvalidArgument, "separation coefficients must be positive");
  if (mode == SeparationMode::kPaper)
    require(c1 == 500.0 && c2 == 100.0, ErrorCode::kInvalidArgument, "paper mode fixes the coefficients at 500/100");
  if (diagnostics) {
    require(t >= 0.0, ErrorCode::kInvalidArgument, "t must be non-negative");
  } else {
    require(t > 0.0, ErrorCode::kInvalidArgument, "t must be positive");
  }
}

const char* to_string(SeparationMode mode) { return mode == SeparationMode::kPaper ? "paper" : "practical"; }

SeparationMode parse_separation_mode(const std::string& text) {
  if (text == "paper") return SeparationMode::kPaper;
  if (text == "practical") return SeparationMode::kPractical;
  fail(ErrorCode::kInvalidArgument, "unknown separation mode '" + text + "'");
}

double schedule_t(Index sample_size, double delta) {
  require(delta > 0.0 && delta <= 1.0, ErrorCode::kInvalidDelta, "delta must lie in (0, 1]");
  require(sample_size >= 2, ErrorCode::kInvalidArgument, "sample size must be at least 2");
  return 100.0 * std::log(static_cast<double>(sample_size)) / delta;
}

double required_sq_distance(const GaussianParams& a, const GaussianParams& b, const SeparationConfig& config) {
  const double ra = a.radius();
  const double rb = b.radius();
  const double sa = a.sigma_max();
  const double sb = b.sigma_max();
  const double t = config.t;
  return -std::abs(ra * ra - rb * rb) + config.c1 * t * (ra + rb) * (sa + sb) + config.c2 * t * t * (sa * sa + sb * sb);
}

SeparationReport separation_margin(const Mixture& mixture, const SeparationConfig& config) {
  config.validate();
  const auto& comps = mixture.components();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (!comps[i].median_radius()) {
      fail(ErrorCode::kMissingMedianRadius, "component " + std::to_string(i) + " has no median radius");
    }
  }
  const auto k = static_cast<Index>(comps.size());
  SeparationReport report;
  report.margin = Matrix::Constant(k, k, std::numeric_limits<double>::quiet_NaN());
  for (Index i = 0; i < k; ++i) {
    for (Index j = i + 1; j < k; ++j) {
      const auto& a = comps[static_cast<std::size_t>(i)];
      const auto& b = comps[static_cast<std::size_t>(j)];
      const double distance_sq = (a.center() - b.center()).squaredNorm();
      const double margin = distance_sq - required_sq_distance(a, b, config);
      report.margin(i, j) = margin;
      report.margin(j, i) = margin;
      if (!(margin >= 0.0)) report.satisfied = false;
    }
  }
  return report;
}

namespace {

constexpr double kPlacementBump = 1.0 + 1e-9;
constexpr double kMinDirectionGap = 0.5;
constexpr int kMaxPlacementRejections = 100;

std::vector<double> resolve_weights(std::vector<double> weights, std::size_t k) {
  if (weights.empty()) return std::vector<double>(k, 1.0 / static_cast<double>(k));
  require(weights.size() == k, ErrorCode::kInvalidArgument, "one weight per component required");
  return weights;
}

}  // namespace

Mixture plant_separated_mixture(const PlantOptions& options, Rng& rng) {
  require(options.n >= 1 && options.k >= 1, ErrorCode::kInvalidArgument, "n and k must be positive");
  require(options.slack >= 1.0, ErrorCode::kInvalidArgument, "slack must be at least 1");
  require(options.shapes.size() == 1 || static_cast<Index>(options.shapes.size()) == options.k,
          ErrorCode::kInvalidArgument, "give one shape or one per component");
  options.config.validate();

  const Index n = options.n;
  const auto k = static_cast<std::size_t>(options.k);
  Rng shape_rng = rng.stream(0x5ea7);
  std::vector<GaussianParams> comps;
  comps.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const ComponentShape& shape = options.shapes.size() == 1 ? options.shapes.front() : options.shapes[i];
    require(shape.eig_lo > 0.0 && shape.eig_hi >= shape.eig_lo, ErrorCode::kInvalidArgument,
            "eigenvalue range must be positive and ordered");
    Vector eig(n);
    for (Index d = 0; d < n; ++d) eig[d] = shape.eig_lo + (shape.eig_hi - shape.eig_lo) * shape_rng.uniform();
    std::optional<Matrix> rotation;
    if (shape.rotate && shape.eig_hi > shape.eig_lo) rotation = random_rotation(n, shape_rng);
    GaussianParams params = make_gaussian(Vector::Zero(n), std::move(eig), std::move(rotation));
    Rng radius_rng = rng.stream(0x4ad1 + i);
    comps.push_back(with_estimated_radius(params, radius_rng, options.radius_samples));
  }

  Matrix required = Matrix::Zero(static_cast<Index>(k), static_cast<Index>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double sq = options.slack * options.slack *
                        std::max(0.0, required_sq_distance(comps[i], comps[j], options.config));
      required(static_cast<Index>(i), static_cast<Index>(j)) = sq;
      required(static_cast<Index>(j), static_cast<Index>(i)) = sq;
    }

  std::vector<Vector> centers(k, Vector::Zero(n));
  if (options.k <= n) {
    // |a_i e_i - a_j e_j|^2 = a_i^2 + a_j^2 >= max_row_i / 2 + max_row_j / 2 >= required_ij.
    for (std::size_t i = 0; i < k; ++i) {
      const double row_max = required.row(static_cast<Index>(i)).maxCoeff();
      centers[i][static_cast<Index>(i)] = std::sqrt(0.5 * row_max) * kPlacementBump;
    }
  } else {
    Rng direction_rng = rng.stream(0xd1ec);
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementRejections && !placed; ++attempt) {
      std::vector<Vector> dirs(k);
      for (auto& d : dirs) {
        d.resize(n);
        for (Index c = 0; c < n; ++c) d[c] = direction_rng.normal();
        d.normalize();
      }
      double min_gap = std::numeric_limits<double>::infinity();
      double scale_sq = 0.0;
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
          const double gap_sq = (dirs[i] - dirs[j]).squaredNorm();
          min_gap = std::min(min_gap, std::sqrt(gap_sq));
          scale_sq = std::max(scale_sq, required(static_cast<Index>(i), static_cast<Index>(j)) / gap_sq);
        }
      if (min_gap < kMinDirectionGap) continue;
      const double scale = std::sqrt(scale_sq) * kPlacementBump;
      for (std::size_t i = 0; i < k; ++i) centers[i] = scale * dirs[i];
      placed = true;
    }
    if (!placed) {
      std::ostringstream msg;
      msg << "could not place " << k << " components in dimension " << n << " after "
          << kMaxPlacementRejections << " rejections";
      fail(ErrorCode::kInfeasiblePlacement, msg.str());
    }
  }

  for (std::size_t i = 0; i < k; ++i) comps[i] = comps[i].with_center(centers[i]);
  Mixture mixture(std::move(comps), resolve_weights(options.weights, k));
  const SeparationReport check = separation_margin(mixture, options.config);
  require(check.satisfied, ErrorCode::kInfeasiblePlacement, "planted mixture failed separation re-check");
  return mixture;
}

Mixture plant_spherical_mixture(Index n, Index k, double sigma, double c_prime, double t) {
  require(n >= k && k >= 1, ErrorCode::kInvalidArgument, "need 1 <= k <= n for axis placement");
  require(sigma > 0.0 && c_prime > 0.0 && t > 0.0, ErrorCode::kInvalidArgument,
          "sigma, c' and t must be positive");
  const GaussianParams base = make_spherical(Vector::Zero(n), sigma);
  const double radius = median_radius_exact_spherical(base).value;
  // Equal radii: |p_i - p_j|^2 = 2 a^2 = c' t (2R)^2 / sqrt(n).
  const double excess = c_prime * t * 4.0 * radius * radius / std::sqrt(static_cast<double>(n));
  const double axis = std::sqrt(0.5 * excess);
  std::vector<GaussianParams> comps;
  for (Index i = 0; i < k; ++i) {
    Vector center = Vector::Zero(n);
    center[i] = axis;
    comps.push_back(make_spherical(std::move(center), sigma).with_median_radius(MedianRadius{radius, 0.0, true}));
  }
  return Mixture(std::move(comps), std::vector<double>(static_cast<std::size_t>(k), 1.0 / static_cast<double>(k)));
}

Mixture concentric_spherical_mixture(Index n, const std::vector<double>& sigmas, std::vector<double> weights) {
  require(!sigmas.empty(), ErrorCode::kInvalidArgument, "need at least one component");
  std::vector<GaussianParams> comps;
  for (double sigma : sigmas) {
    require(sigma > 0.0, ErrorCode::kInvalidArgument, "sigma must be positive");
    GaussianParams params = make_spherical(Vector::Zero(n), sigma);
    comps.push_back(params.with_median_radius(median_radius_exact_spherical(params)));
  }
  return Mixture(std::move(comps), resolve_weights(std::move(weights), sigmas.size()));
}

Mixture spherical_pair(Index n, double sigma, double distance, std::vector<double> weights) {
  std::vector<GaussianParams> comps;
  for (int i = 0; i < 2; ++i) {
    Vector center = Vector::Zero(n);
    center[0] = i == 0 ? 0.0 : distance;
    GaussianParams params = make_spherical(std::move(center), sigma);
    comps.push_back(params.with_median_radius(median_radius_exact_spherical(params)));
  }
  return Mixture(std::move(comps), resolve_weights(std::move(weights), 2));
}

}  // namespace gmsep
