#pragma once

#include "gmsep/common.hpp"
#include "gmsep/gaussian_model.hpp"

#include <optional>
#include <vector>

namespace gmsep {

enum class SeparationMode { kPaper, kPractical };

/// Constants of the pairwise separation inequality
///   |p_i - p_j|^2 >= -|R_i^2 - R_j^2| + c1 t (R_i + R_j)(s_i + s_j) + c2 t^2 (s_i^2 + s_j^2).
struct SeparationConfig {
  double t = 1.0;
  double c1 = 500.0;
  double c2 = 100.0;
  SeparationMode mode = SeparationMode::kPaper;
  /// Admits t == 0 for diagnostics.
  bool diagnostics = false;

  static SeparationConfig paper(double t);
  /// Coefficients 60/30 of the cross-pair distance guarantee.
  static SeparationConfig practical(double t);

  void validate() const;
};

const char* to_string(SeparationMode mode);
SeparationMode parse_separation_mode(const std::string& text);

struct SeparationReport {
  /// k x k, symmetric, NaN on the diagonal.
  Matrix margin;
  bool satisfied = true;
};

/// 100 ln(sample_size) / delta.
double schedule_t(Index sample_size, double delta);

/// Right-hand side of the separation inequality for one pair.
double required_sq_distance(const GaussianParams& a, const GaussianParams& b, const SeparationConfig& config);

SeparationReport separation_margin(const Mixture& mixture, const SeparationConfig& config);

/// Eigenvalue range of one planted component; eigenvalues are drawn
/// uniformly in [eig_lo, eig_hi] and rotated by a Haar rotation when `rotate`.
struct ComponentShape {
  double eig_lo = 1.0;
  double eig_hi = 1.0;
  bool rotate = true;
};

struct PlantOptions {
  Index n = 2;
  Index k = 1;
  /// One entry per component, or a single entry applied to all.
  std::vector<ComponentShape> shapes{ComponentShape{}};
  SeparationConfig config = SeparationConfig::practical(1.0);
  double slack = 1.0;
  /// Equal weights when empty.
  std::vector<double> weights;
  Index radius_samples = 100000;
};

/// Mixture whose centers sit slack times the minimum admissible distance
/// apart: along coordinate axes when k <= n, random directions otherwise.
Mixture plant_separated_mixture(const PlantOptions& options, Rng& rng);

/// k spherical components of equal sigma on orthogonal axes whose squared
/// center distance equals c' t (R_i + R_j)^2 / sqrt(n), i.e. the excess
/// over 2 min(R_i^2, R_j^2) demanded of cross-component sample pairs.
Mixture plant_spherical_mixture(Index n, Index k, double sigma, double c_prime, double t);

/// Spherical components with a common center at the origin.
Mixture concentric_spherical_mixture(Index n, const std::vector<double>& sigmas,
                                     std::vector<double> weights = {});

/// Two spherical components at the given center distance.
Mixture spherical_pair(Index n, double sigma, double distance, std::vector<double> weights = {});

}  // namespace gmsep
