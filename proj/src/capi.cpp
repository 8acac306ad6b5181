#include "gmsep/gmsep.h"

#include "gmsep/classifier.hpp"
#include "gmsep/experiment.hpp"
#include "gmsep/io.hpp"
#include "gmsep/ml_fit.hpp"
#include "gmsep/separation.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

struct gm_mixture {
  gmsep::Mixture value;
};

struct gm_samples {
  gmsep::LabeledSampleSet value;
};

struct gm_partition {
  gmsep::Partition value;
  gmsep::Index size = 0;
};

struct gm_fit_result {
  gmsep::SphericalFit fit;
  nlohmann::json doc;
};

namespace {

using gmsep::ErrorCode;
using gmsep::require;
using nlohmann::json;

thread_local std::string last_error;

template <typename F>
gm_status guard(F&& body) {
  last_error.clear();
  try {
    body();
    return GM_OK;
  } catch (const gmsep::Error& e) {
    last_error = e.what();
    return static_cast<gm_status>(e.code());
  } catch (const json::parse_error& e) {
    last_error = std::string("ParseError: ") + e.what();
    return GM_PARSE_ERROR;
  } catch (const json::exception& e) {
    last_error = std::string("SchemaError: ") + e.what();
    return GM_SCHEMA_ERROR;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return GM_UNKNOWN;
  } catch (const std::exception& e) {
    last_error = e.what();
    return GM_UNKNOWN;
  } catch (...) {
    last_error = "unknown error";
    return GM_UNKNOWN;
  }
}

void need(const void* ptr, const char* what) {
  require(ptr != nullptr, ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

gmsep::SeparationConfig separation_config(double t, int paper_mode) {
  return paper_mode ? gmsep::SeparationConfig::paper(t) : gmsep::SeparationConfig::practical(t);
}

}  // namespace

extern "C" {

GMSEP_API const char* gm_last_error(void) { return last_error.c_str(); }

GMSEP_API const char* gm_status_name(gm_status status) {
  return gmsep::error_code_name(static_cast<ErrorCode>(status));
}

GMSEP_API const char* gm_version(void) { return "0.1.0"; }

GMSEP_API void gm_string_free(char* text) { std::free(text); }

GMSEP_API gm_status gm_mixture_load(const char* path, gm_mixture** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new gm_mixture{gmsep::load_params(path)};
  });
}

GMSEP_API gm_status gm_mixture_from_json(const char* text, gm_mixture** out) {
  return guard([&] {
    need(text, "json");
    need(out, "out");
    *out = new gm_mixture{gmsep::params_from_json(json::parse(text))};
  });
}

GMSEP_API gm_status gm_mixture_save(const gm_mixture* mixture, const char* path) {
  return guard([&] {
    need(mixture, "mixture");
    need(path, "path");
    gmsep::save_params(path, mixture->value);
  });
}

GMSEP_API gm_status gm_mixture_to_json(const gm_mixture* mixture, char** out) {
  return guard([&] {
    need(mixture, "mixture");
    need(out, "out");
    *out = copy_string(gmsep::params_to_json(mixture->value).dump(2));
  });
}

GMSEP_API gm_status gm_mixture_plant(const gm_plant_options* options, uint64_t seed, gm_mixture** out) {
  return guard([&] {
    need(options, "options");
    need(out, "out");
    gmsep::PlantOptions plant;
    plant.n = options->n;
    plant.k = options->k;
    plant.shapes = {gmsep::ComponentShape{options->eig_lo, options->eig_hi, options->rotate != 0}};
    plant.config = separation_config(options->t, options->paper_mode);
    plant.slack = options->slack;
    if (options->radius_samples > 0) plant.radius_samples = options->radius_samples;
    gmsep::Rng rng(seed);
    *out = new gm_mixture{gmsep::plant_separated_mixture(plant, rng)};
  });
}

GMSEP_API gm_status gm_mixture_spherical(int64_t n, int64_t k, double sigma, double c_prime, double t,
                                         gm_mixture** out) {
  return guard([&] {
    need(out, "out");
    *out = new gm_mixture{gmsep::plant_spherical_mixture(n, k, sigma, c_prime, t)};
  });
}

GMSEP_API gm_status gm_mixture_estimate_radii(gm_mixture* mixture, int64_t num_samples, uint64_t seed) {
  return guard([&] {
    need(mixture, "mixture");
    mixture->value = mixture->value.with_estimated_radii(gmsep::Rng(seed), num_samples);
  });
}

GMSEP_API int64_t gm_mixture_k(const gm_mixture* mixture) {
  return mixture ? static_cast<int64_t>(mixture->value.k()) : 0;
}

GMSEP_API int64_t gm_mixture_dim(const gm_mixture* mixture) { return mixture ? mixture->value.dim() : 0; }

GMSEP_API void gm_mixture_free(gm_mixture* mixture) { delete mixture; }

GMSEP_API gm_status gm_separation_margin(const gm_mixture* mixture, double t, int paper_mode, double* margin_out,
                                         int* satisfied) {
  return guard([&] {
    need(mixture, "mixture");
    const gmsep::SeparationReport report = gmsep::separation_margin(mixture->value, separation_config(t, paper_mode));
    const gmsep::Index k = report.margin.rows();
    if (margin_out)
      for (gmsep::Index i = 0; i < k; ++i)
        for (gmsep::Index j = 0; j < k; ++j) margin_out[i * k + j] = report.margin(i, j);
    if (satisfied) *satisfied = report.satisfied ? 1 : 0;
  });
}

GMSEP_API gm_status gm_schedule_t(int64_t sample_size, double delta, double* out) {
  return guard([&] {
    need(out, "out");
    *out = gmsep::schedule_t(sample_size, delta);
  });
}

GMSEP_API gm_status gm_samples_generate(const gm_mixture* mixture, int64_t count, uint64_t seed, gm_samples** out) {
  return guard([&] {
    need(mixture, "mixture");
    need(out, "out");
    gmsep::Rng rng(seed);
    *out = new gm_samples{gmsep::sample_mixture(mixture->value, rng, count)};
  });
}

GMSEP_API gm_status gm_samples_from_array(const double* data, int64_t rows, int64_t cols, const int* labels,
                                          gm_samples** out) {
  return guard([&] {
    need(data, "data");
    need(out, "out");
    require(rows >= 1 && cols >= 1, ErrorCode::kInvalidArgument, "rows and cols must be positive");
    gmsep::LabeledSampleSet set;
    set.points = Eigen::Map<const gmsep::PointMatrix>(data, rows, cols);
    set.ambient_dim = cols;
    if (labels) set.labels = std::vector<int>(labels, labels + rows);
    *out = new gm_samples{std::move(set)};
  });
}

GMSEP_API gm_status gm_samples_load(const char* path, gm_samples** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new gm_samples{gmsep::load_samples(path)};
  });
}

GMSEP_API gm_status gm_samples_save(const gm_samples* samples, const char* path) {
  return guard([&] {
    need(samples, "samples");
    need(path, "path");
    gmsep::save_samples(path, samples->value);
  });
}

GMSEP_API gm_status gm_samples_to_csv(const gm_samples* samples, char** out) {
  return guard([&] {
    need(samples, "samples");
    need(out, "out");
    std::ostringstream text;
    gmsep::write_samples_csv(text, samples->value);
    *out = copy_string(text.str());
  });
}

GMSEP_API int64_t gm_samples_count(const gm_samples* samples) { return samples ? samples->value.size() : 0; }

GMSEP_API int64_t gm_samples_dim(const gm_samples* samples) { return samples ? samples->value.dim() : 0; }

GMSEP_API int gm_samples_has_labels(const gm_samples* samples) {
  return samples && samples->value.labels ? 1 : 0;
}

GMSEP_API gm_status gm_samples_labels(const gm_samples* samples, int* out) {
  return guard([&] {
    need(samples, "samples");
    need(out, "out");
    require(samples->value.labels.has_value(), ErrorCode::kInvalidArgument, "sample set has no labels");
    std::copy(samples->value.labels->begin(), samples->value.labels->end(), out);
  });
}

GMSEP_API gm_status gm_samples_data(const gm_samples* samples, double* out) {
  return guard([&] {
    need(samples, "samples");
    need(out, "out");
    const auto& p = samples->value.points;
    std::copy(p.data(), p.data() + p.size(), out);
  });
}

GMSEP_API void gm_samples_free(gm_samples* samples) { delete samples; }

GMSEP_API gm_status gm_classify_general(const gm_samples* samples, const gm_classifier_options* options,
                                        gm_partition** out) {
  return guard([&] {
    need(samples, "samples");
    need(options, "options");
    need(out, "out");
    gmsep::ClassifierConfig config;
    config.k = options->k;
    config.w_min = options->w_min;
    config.delta = options->delta;
    if (options->t > 0.0) config.t_override = options->t;
    if (options->step_cap > 0) config.step_cap = options->step_cap;
    *out = new gm_partition{gmsep::classify_general(samples->value, config), samples->value.size()};
  });
}

GMSEP_API gm_status gm_classify_spherical(const gm_samples* samples, int64_t k, double t, gm_partition** out) {
  return guard([&] {
    need(samples, "samples");
    need(out, "out");
    *out = new gm_partition{gmsep::classify_spherical(samples->value, k, t), samples->value.size()};
  });
}

GMSEP_API int64_t gm_partition_cluster_count(const gm_partition* partition) {
  return partition ? static_cast<int64_t>(partition->value.clusters.size()) : 0;
}

GMSEP_API int64_t gm_partition_size(const gm_partition* partition) { return partition ? partition->size : 0; }

GMSEP_API gm_status gm_partition_labels(const gm_partition* partition, int* out) {
  return guard([&] {
    need(partition, "partition");
    need(out, "out");
    const std::vector<int> labels = partition->value.labels(partition->size);
    std::copy(labels.begin(), labels.end(), out);
  });
}

GMSEP_API gm_status gm_partition_save(const gm_partition* partition, const char* path) {
  return guard([&] {
    need(partition, "partition");
    need(path, "path");
    gmsep::save_partition(path, partition->value, partition->size);
  });
}

GMSEP_API gm_status gm_partition_trace_json(const gm_partition* partition, char** out) {
  return guard([&] {
    need(partition, "partition");
    need(out, "out");
    require(partition->value.trace.has_value(), ErrorCode::kInvalidArgument, "partition has no trace");
    *out = copy_string(gmsep::trace_to_json(*partition->value.trace).dump(2));
  });
}

GMSEP_API gm_status gm_partition_compare(const gm_partition* partition, const int* truth, int64_t count,
                                         int* exact_match, int64_t* agreement) {
  return guard([&] {
    need(partition, "partition");
    need(truth, "truth");
    require(count >= 0, ErrorCode::kInvalidArgument, "count must be non-negative");
    const gmsep::PartitionScore score =
        gmsep::partition_compare(partition->value, std::vector<int>(truth, truth + count));
    if (exact_match) *exact_match = score.exact_match ? 1 : 0;
    if (agreement) *agreement = score.agreement;
  });
}

GMSEP_API void gm_partition_free(gm_partition* partition) { delete partition; }

GMSEP_API gm_status gm_fit_spherical(const gm_samples* samples, int64_t k, uint64_t seed, int oracle,
                                     gm_fit_result** out) {
  return guard([&] {
    need(samples, "samples");
    need(out, "out");
    const gmsep::PointMatrix& points = samples->value.points;
    gmsep::Rng rng(seed);
    gmsep::SphericalFit fit = gmsep::fit_spherical_mixture(points, k, rng);
    json doc = gmsep::solution_to_json(fit.solution);
    doc["weights"] = fit.weights;
    if (oracle) {
      if (gmsep::binomial_coefficient(points.rows(), k) <= 1e6) {
        const gmsep::KMedianSolution best = gmsep::kmedian_exhaustive(points, k);
        doc["oracle"] = {{"objective", best.objective},
                         {"center_indices", best.center_indices},
                         {"ratio", best.objective > 0.0 ? fit.solution.objective / best.objective : 1.0}};
      } else {
        doc["oracle"] = {{"skipped", "more than 10^6 center subsets"}};
      }
    }
    *out = new gm_fit_result{std::move(fit), std::move(doc)};
  });
}

GMSEP_API double gm_fit_objective(const gm_fit_result* fit) { return fit ? fit->fit.solution.objective : 0.0; }

GMSEP_API double gm_fit_sigma_hat(const gm_fit_result* fit) { return fit ? fit->fit.solution.sigma_hat : 0.0; }

GMSEP_API gm_status gm_fit_to_json(const gm_fit_result* fit, char** out) {
  return guard([&] {
    need(fit, "fit");
    need(out, "out");
    *out = copy_string(fit->doc.dump(2));
  });
}

GMSEP_API void gm_fit_free(gm_fit_result* fit) { delete fit; }

GMSEP_API gm_status gm_validate(const char* config_json, const char* suite, uint64_t seed, char** report_json) {
  return guard([&] {
    need(report_json, "report_json");
    gmsep::ValidateConfig config;
    if (config_json) {
      json doc = json::parse(config_json);
      config = gmsep::validate_config_from_json(doc.contains("validate") ? doc["validate"] : doc);
    }
    if (suite) config.suite = suite;
    *report_json = copy_string(gmsep::run_validation(config, seed).dump(2));
  });
}

GMSEP_API gm_status gm_run_experiment(const char* config_json, const char* base_dir, char** aggregate_json) {
  return guard([&] {
    need(config_json, "config_json");
    need(aggregate_json, "aggregate_json");
    const gmsep::ExperimentConfig config =
        gmsep::experiment_config_from_json(json::parse(config_json), base_dir ? base_dir : "");
    const gmsep::ExperimentResult result = gmsep::run_experiment(config);
    json doc = result.metadata;
    json trials = json::array();
    for (std::size_t i = 0; i < result.trials.size(); ++i) trials.push_back(result.trial_json(i, config.record_timing));
    doc["trial_reports"] = std::move(trials);
    *aggregate_json = copy_string(doc.dump(2));
  });
}

}  // extern "C"
