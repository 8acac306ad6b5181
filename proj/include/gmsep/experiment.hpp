#pragma once

#include "gmsep/classifier.hpp"
#include "gmsep/common.hpp"
#include "gmsep/gaussian_model.hpp"
#include "gmsep/ml_fit.hpp"
#include "gmsep/separation.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gmsep {

struct PartitionScore {
  bool exact_match = false;
  /// Rows are predicted clusters, columns are truth labels.
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> confusion;
  /// Predicted cluster -> truth label under the best bijection (-1 if unmatched).
  std::vector<int> bijection;
  Index agreement = 0;
};

/// Best bijection between predicted clusters and truth labels by optimal assignment.
PartitionScore partition_compare(const std::vector<int>& predicted, const std::vector<int>& truth);
PartitionScore partition_compare(const Partition& predicted, const std::vector<int>& truth);

/// Maximum-weight perfect matching on a square matrix; result[row] = column.
std::vector<int> max_weight_assignment(const Matrix& weight);

enum class Scenario { kClassifyGeneral, kClassifySpherical, kFit, kValidate };
enum class Sampling { kIid, kStratified, kIsometric };

const char* to_string(Scenario scenario);
Scenario parse_scenario(const std::string& text);
Sampling parse_sampling(const std::string& text);

struct MixtureSource {
  enum class Kind { kParams, kPlant, kConcentric, kSpherical, kPair };
  Kind kind = Kind::kPlant;
  std::string params_path;
  PlantOptions plant;
  Index n = 2;
  Index k = 2;
  std::vector<double> sigmas;
  std::vector<double> weights;
  double sigma = 1.0;
  double c_prime = 12.0;
  double t = 1.0;
  double distance = 0.0;
};

struct ValidateConfig {
  std::string suite = "all";
  std::vector<Index> dims{8, 64};
  std::vector<double> ts{1.0, 2.0, 3.0};
  std::vector<double> cross_ts{1.0, 2.0};
  Index num_samples = 100000;
  double eccentric_lo = 0.25;
  double eccentric_hi = 4.0;
  Index radius_samples = 100000;
  Index growth_dim = 8;
  Index growth_points = 40;
  Index growth_samples = 1000000;
  std::vector<Index> covariance_dims{2, 8};
  Index covariance_sample = 100000;
  double covariance_delta = 0.1;
  Index covariance_directions = 100;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::kClassifyGeneral;
  MixtureSource mixture;
  Sampling sampling = Sampling::kIid;
  Index sample_size = 1000;
  Index trials = 1;
  std::uint64_t master_seed = 0;
  /// k and w_min default to the mixture's when unset.
  std::optional<Index> k;
  std::optional<double> w_min;
  ClassifierConfig classifier;
  double spherical_t = 1.0;
  LocalSearchConfig fit;
  Normalization normalization = Normalization::kPaper;
  ValidateConfig validate;
  std::string output_dir;
  /// With timing off, time_ms is left empty so reruns are byte-identical.
  bool record_timing = true;
  int workers = 1;

  void validate_config() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& doc, const std::string& base_dir = "");
ValidateConfig validate_config_from_json(const nlohmann::json& doc);

struct TrialReport {
  Index trial = 0;
  std::uint64_t seed = 0;
  bool exact_match = false;
  PartitionScore score;
  std::optional<double> objective;
  double time_ms = 0.0;
  std::optional<std::string> error;
  nlohmann::json details;
};

struct ExperimentResult {
  std::vector<TrialReport> trials;
  double success_rate = 0.0;
  std::optional<double> mean_time_ms;
  nlohmann::json metadata;

  nlohmann::json trial_json(std::size_t i, bool record_timing) const;
  std::string summary_csv(bool record_timing) const;
};

/// Runs every trial (seed = master_seed ^ i) and writes per-trial JSON plus
/// summary.csv under output_dir when it is set. Trial errors are recorded.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Scaling of the sample size bound for exact classification, without constants.
double sample_size_scaling(Index n, Index k, double delta, double w_min);

/// suite: lemma5, lemma6, lemma7, lemma8, corollary4, lemma12 or all.
nlohmann::json run_validation(const ValidateConfig& config, std::uint64_t seed);

}  // namespace gmsep
