#include "gmsep/experiment.hpp"

#include "gmsep/concentration_lab.hpp"
#include "gmsep/io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>
#include <thread>

namespace gmsep {

namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key) || doc[key].is_null()) return fallback;
  try {
    return doc[key].get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchemaError, std::string("field \"") + key + "\": " + e.what());
  }
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json bound_json(const EmpiricalBound& b) {
  return json{{"name", b.name},
              {"claimed_probability", b.claimed_probability},
              {"observed_fraction", b.observed_fraction},
              {"num_trials", b.num_trials},
              {"slack", b.slack},
              {"pass", b.pass},
              {"method", b.method}};
}

GaussianParams eccentric_shape(Index n, double lo, double hi, Rng& rng) {
  Vector eig(n);
  for (Index d = 0; d < n; ++d) {
    const double frac = n > 1 ? static_cast<double>(d) / static_cast<double>(n - 1) : 0.0;
    eig[d] = lo * std::pow(hi / lo, frac);
  }
  return make_gaussian(Vector::Zero(n), eig, random_rotation(n, rng));
}

struct ShapeCell {
  std::string name;
  GaussianParams params;
};

std::vector<ShapeCell> validator_shapes(Index n, const ValidateConfig& config, Rng& rng) {
  std::vector<ShapeCell> shapes;
  Rng radius_rng = rng.stream(1);
  shapes.push_back({"spherical", with_estimated_radius(make_spherical(Vector::Zero(n), 1.0), radius_rng)});
  Rng shape_rng = rng.stream(2);
  Rng eccentric_radius_rng = rng.stream(3);
  shapes.push_back({"eccentric", with_estimated_radius(eccentric_shape(n, config.eccentric_lo, config.eccentric_hi,
                                                                       shape_rng),
                                                       eccentric_radius_rng, config.radius_samples)});
  return shapes;
}

bool wants(const std::string& suite, const char* name) { return suite == "all" || suite == name; }

Mixture build_mixture(const MixtureSource& source, const std::optional<Mixture>& loaded, Rng& rng) {
  switch (source.kind) {
    case MixtureSource::Kind::kParams:
      return *loaded;
    case MixtureSource::Kind::kPlant:
      return plant_separated_mixture(source.plant, rng);
    case MixtureSource::Kind::kConcentric:
      return concentric_spherical_mixture(source.n, source.sigmas, source.weights);
    case MixtureSource::Kind::kSpherical:
      return plant_spherical_mixture(source.n, source.k, source.sigma, source.c_prime, source.t);
    case MixtureSource::Kind::kPair:
      return spherical_pair(source.n, source.sigma, source.distance, source.weights);
  }
  fail(ErrorCode::kInvalidArgument, "unknown mixture source");
}

LabeledSampleSet draw_samples(const Mixture& mixture, Sampling sampling, Rng& rng, Index count) {
  switch (sampling) {
    case Sampling::kIid:
      return sample_mixture(mixture, rng, count);
    case Sampling::kStratified:
      return sample_mixture_stratified(mixture, rng, count);
    case Sampling::kIsometric:
      return sample_mixture_isometric(mixture, rng, count);
  }
  fail(ErrorCode::kInvalidArgument, "unknown sampling mode");
}

json trace_summary(const PeelTrace& trace) {
  json peels = json::array();
  for (const PeelRecord& p : trace.peels) {
    peels.push_back({{"center_index", p.center_index},
                     {"alpha", p.alpha},
                     {"beta", p.beta},
                     {"nu", p.nu},
                     {"s", p.s},
                     {"beta_prime", p.beta_prime},
                     {"removal_radius", p.removal_radius},
                     {"removed_count", p.removed.size()},
                     {"warnings", p.warnings}});
  }
  return json{{"threshold", trace.threshold}, {"t", trace.t}, {"delta", trace.delta}, {"peels", std::move(peels)}};
}

json score_json(const PartitionScore& score) {
  json confusion = json::array();
  for (Index r = 0; r < score.confusion.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < score.confusion.cols(); ++c) row.push_back(score.confusion(r, c));
    confusion.push_back(std::move(row));
  }
  return json{{"confusion", std::move(confusion)}, {"bijection", score.bijection}, {"agreement", score.agreement}};
}

double planted_objective(const Mixture& mixture, const LabeledSampleSet& samples) {
  double cost = 0.0;
  for (Index j = 0; j < samples.size(); ++j) {
    const Vector& center = mixture.components()[static_cast<std::size_t>((*samples.labels)[static_cast<std::size_t>(j)])].center();
    cost += (samples.points.row(j).transpose() - center).squaredNorm();
  }
  return cost;
}

void run_trial(const ExperimentConfig& config, const std::optional<Mixture>& loaded, TrialReport& report) {
  Rng trial_rng(report.seed);
  if (config.scenario == Scenario::kValidate) {
    report.details = run_validation(config.validate, report.seed);
    report.exact_match = report.details["pass"].get<bool>();
    return;
  }

  Rng plant_rng = trial_rng.stream(1);
  const Mixture mixture = build_mixture(config.mixture, loaded, plant_rng);
  Rng sample_rng = trial_rng.stream(2);
  const LabeledSampleSet samples = draw_samples(mixture, config.sampling, sample_rng, config.sample_size);
  const std::vector<int>& labels = *samples.labels;
  const Index k = config.k.value_or(static_cast<Index>(mixture.k()));

  switch (config.scenario) {
    case Scenario::kClassifyGeneral: {
      ClassifierConfig cc = config.classifier;
      cc.k = k;
      cc.w_min = config.w_min.value_or(mixture.w_min());
      std::optional<GroundTruth> truth;
      if (mixture.radii_known()) truth = ground_truth(mixture, labels);
      const Partition partition = classify_general(samples, cc, truth ? &*truth : nullptr);
      report.score = partition_compare(partition, labels);
      if (partition.trace) report.details["trace"] = trace_summary(*partition.trace);
      break;
    }
    case Scenario::kClassifySpherical: {
      const Partition partition = classify_spherical(samples, k, config.spherical_t);
      report.score = partition_compare(partition, labels);
      break;
    }
    case Scenario::kFit: {
      Rng fit_rng = trial_rng.stream(3);
      const SphericalFit fit = fit_spherical_mixture(samples.points, k, fit_rng, config.fit, config.normalization);
      report.score = partition_compare(fit.solution.assignment, labels);
      report.objective = fit.solution.objective;
      const double planted = planted_objective(mixture, samples);
      double weight_error = 0.0;
      for (std::size_t c = 0; c < fit.weights.size(); ++c) {
        const int label = c < report.score.bijection.size() ? report.score.bijection[c] : -1;
        const double truth_weight =
            label >= 0 && static_cast<std::size_t>(label) < mixture.k() ? mixture.weights()[static_cast<std::size_t>(label)] : 0.0;
        weight_error = std::max(weight_error, std::abs(fit.weights[c] - truth_weight));
      }
      report.details["weights"] = fit.weights;
      report.details["planted_objective"] = planted;
      report.details["objective_ratio"] = fit.solution.objective / planted;
      report.details["max_weight_error"] = weight_error;
      report.details["sigma_hat"] = fit.solution.sigma_hat;
      report.details["log_likelihood"] = fit.solution.zero_sigma ? json(nullptr) : json(fit.solution.log_likelihood);
      report.details["center_indices"] = fit.solution.center_indices;
      break;
    }
    case Scenario::kValidate:
      break;
  }
  report.exact_match = report.score.exact_match;
  report.details["score"] = score_json(report.score);
}

}  // namespace

std::vector<int> max_weight_assignment(const Matrix& weight) {
  const Index n = weight.rows();
  require(weight.cols() == n, ErrorCode::kDimensionMismatch, "assignment matrix must be square");
  if (n == 0) return {};
  const double top = weight.maxCoeff();
  // Minimum-cost assignment on top - weight (potentials method, 1-based).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Index> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<bool> used(static_cast<std::size_t>(n + 1), false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const Index i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (used[uj]) continue;
        const double cur = (top - weight(i0 - 1, j - 1)) - u[static_cast<std::size_t>(i0)] - v[uj];
        if (cur < minv[uj]) {
          minv[uj] = cur;
          way[uj] = j0;
        }
        if (minv[uj] < delta) {
          delta = minv[uj];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (used[uj]) {
          u[static_cast<std::size_t>(p[uj])] += delta;
          v[uj] -= delta;
        } else {
          minv[uj] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> result(static_cast<std::size_t>(n), -1);
  for (Index j = 1; j <= n; ++j) result[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = static_cast<int>(j - 1);
  return result;
}

PartitionScore partition_compare(const std::vector<int>& predicted, const std::vector<int>& truth) {
  require(predicted.size() == truth.size(), ErrorCode::kIndexMismatch, "predicted and truth cover different index sets");
  int pred_k = 0;
  int truth_k = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    require(predicted[i] >= 0 && truth[i] >= 0, ErrorCode::kIndexMismatch,
            "point " + std::to_string(i) + " has no cluster");
    pred_k = std::max(pred_k, predicted[i] + 1);
    truth_k = std::max(truth_k, truth[i] + 1);
  }
  PartitionScore score;
  score.confusion = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>::Zero(pred_k, truth_k);
  for (std::size_t i = 0; i < predicted.size(); ++i) ++score.confusion(predicted[i], truth[i]);

  const Index size = std::max(pred_k, truth_k);
  Matrix weight = Matrix::Zero(size, size);
  weight.topLeftCorner(pred_k, truth_k) = score.confusion.cast<double>();
  const std::vector<int> match = max_weight_assignment(weight);
  score.bijection.assign(static_cast<std::size_t>(pred_k), -1);
  for (int r = 0; r < pred_k; ++r) {
    const int c = match[static_cast<std::size_t>(r)];
    if (c < truth_k) {
      score.bijection[static_cast<std::size_t>(r)] = c;
      score.agreement += score.confusion(r, c);
    }
  }
  score.exact_match = score.agreement == static_cast<Index>(predicted.size());
  return score;
}

PartitionScore partition_compare(const Partition& predicted, const std::vector<int>& truth) {
  const Index m = static_cast<Index>(truth.size());
  std::vector<int> labels(truth.size(), -1);
  for (std::size_t c = 0; c < predicted.clusters.size(); ++c)
    for (Index i : predicted.clusters[c]) {
      require(i >= 0 && i < m, ErrorCode::kIndexMismatch, "cluster index " + std::to_string(i) + " out of range");
      require(labels[static_cast<std::size_t>(i)] < 0, ErrorCode::kIndexMismatch,
              "point " + std::to_string(i) + " appears in two clusters");
      labels[static_cast<std::size_t>(i)] = static_cast<int>(c);
    }
  return partition_compare(labels, truth);
}

const char* to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::kClassifyGeneral: return "classify_general";
    case Scenario::kClassifySpherical: return "classify_spherical";
    case Scenario::kFit: return "fit";
    case Scenario::kValidate: return "validate";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& text) {
  if (text == "classify_general") return Scenario::kClassifyGeneral;
  if (text == "classify_spherical") return Scenario::kClassifySpherical;
  if (text == "fit") return Scenario::kFit;
  if (text == "validate") return Scenario::kValidate;
  fail(ErrorCode::kSchemaError, "unknown scenario \"" + text + "\"");
}

Sampling parse_sampling(const std::string& text) {
  if (text == "iid") return Sampling::kIid;
  if (text == "stratified") return Sampling::kStratified;
  if (text == "isometric") return Sampling::kIsometric;
  fail(ErrorCode::kSchemaError, "unknown sampling \"" + text + "\"");
}

void ExperimentConfig::validate_config() const {
  require(trials >= 1, ErrorCode::kInvalidArgument, "trials must be at least 1");
  require(workers >= 1, ErrorCode::kInvalidArgument, "workers must be at least 1");
  if (scenario != Scenario::kValidate) require(sample_size >= 1, ErrorCode::kInvalidArgument, "sample_size must be positive");
  if (scenario == Scenario::kClassifyGeneral && k && w_min) {
    const Index threshold = static_cast<Index>(std::ceil(0.75 * *w_min * static_cast<double>(sample_size) - 1e-9));
    require(sample_size >= *k * threshold, ErrorCode::kTooFewSamples, "sample_size below k times the peel threshold");
  }
}

ValidateConfig validate_config_from_json(const json& doc) {
  ValidateConfig c;
  if (!doc.is_object()) return c;
  c.suite = get_or(doc, "suite", c.suite);
  c.dims = get_or(doc, "dims", c.dims);
  c.ts = get_or(doc, "ts", c.ts);
  c.cross_ts = get_or(doc, "cross_ts", c.cross_ts);
  c.num_samples = get_or(doc, "num_samples", c.num_samples);
  c.eccentric_lo = get_or(doc, "eccentric_lo", c.eccentric_lo);
  c.eccentric_hi = get_or(doc, "eccentric_hi", c.eccentric_hi);
  c.radius_samples = get_or(doc, "radius_samples", c.radius_samples);
  c.growth_dim = get_or(doc, "growth_dim", c.growth_dim);
  c.growth_points = get_or(doc, "growth_points", c.growth_points);
  c.growth_samples = get_or(doc, "growth_samples", c.growth_samples);
  c.covariance_dims = get_or(doc, "covariance_dims", c.covariance_dims);
  c.covariance_sample = get_or(doc, "covariance_sample", c.covariance_sample);
  c.covariance_delta = get_or(doc, "covariance_delta", c.covariance_delta);
  c.covariance_directions = get_or(doc, "covariance_directions", c.covariance_directions);
  return c;
}

ExperimentConfig experiment_config_from_json(const json& doc, const std::string& base_dir) {
  if (!doc.is_object()) fail(ErrorCode::kSchemaError, "experiment config must be a JSON object");
  ExperimentConfig c;
  c.scenario = parse_scenario(get_or<std::string>(doc, "scenario", "classify_general"));
  c.sampling = parse_sampling(get_or<std::string>(doc, "sampling", "iid"));
  c.sample_size = get_or(doc, "sample_size", c.sample_size);
  c.trials = get_or(doc, "trials", c.trials);
  c.master_seed = get_or(doc, "master_seed", c.master_seed);
  c.workers = get_or(doc, "workers", c.workers);
  c.record_timing = get_or(doc, "record_timing", c.record_timing);
  c.output_dir = get_or(doc, "output_dir", c.output_dir);
  if (!base_dir.empty() && !c.output_dir.empty() && std::filesystem::path(c.output_dir).is_relative())
    c.output_dir = (std::filesystem::path(base_dir) / c.output_dir).string();
  c.spherical_t = get_or(doc, "spherical_t", c.spherical_t);
  if (doc.contains("k")) c.k = doc["k"].get<Index>();
  if (doc.contains("w_min")) c.w_min = doc["w_min"].get<double>();

  if (doc.contains("mixture")) {
    const json& m = doc["mixture"];
    const std::string source = get_or<std::string>(m, "source", "plant");
    MixtureSource& s = c.mixture;
    s.weights = get_or(m, "weights", s.weights);
    s.n = get_or(m, "n", s.n);
    if (source == "params") {
      s.kind = MixtureSource::Kind::kParams;
      s.params_path = get_or<std::string>(m, "path", "");
      if (!base_dir.empty() && !s.params_path.empty() && std::filesystem::path(s.params_path).is_relative())
        s.params_path = (std::filesystem::path(base_dir) / s.params_path).string();
    } else if (source == "plant") {
      s.kind = MixtureSource::Kind::kPlant;
      PlantOptions& p = s.plant;
      p.n = s.n;
      p.k = get_or(m, "k", p.k);
      p.shapes = {ComponentShape{get_or(m, "eig_lo", 1.0), get_or(m, "eig_hi", 1.0), get_or(m, "rotate", true)}};
      const double t = get_or(m, "t", 1.0);
      const SeparationMode mode = parse_separation_mode(get_or<std::string>(m, "mode", "practical"));
      p.config = mode == SeparationMode::kPaper ? SeparationConfig::paper(t) : SeparationConfig::practical(t);
      p.slack = get_or(m, "slack", p.slack);
      p.weights = s.weights;
      p.radius_samples = get_or(m, "radius_samples", p.radius_samples);
    } else if (source == "concentric") {
      s.kind = MixtureSource::Kind::kConcentric;
      s.sigmas = get_or(m, "sigmas", s.sigmas);
    } else if (source == "spherical") {
      s.kind = MixtureSource::Kind::kSpherical;
      s.k = get_or(m, "k", s.k);
      s.sigma = get_or(m, "sigma", s.sigma);
      s.c_prime = get_or(m, "c_prime", s.c_prime);
      s.t = get_or(m, "t", s.t);
    } else if (source == "pair") {
      s.kind = MixtureSource::Kind::kPair;
      s.sigma = get_or(m, "sigma", s.sigma);
      s.distance = get_or(m, "distance", s.distance);
    } else {
      fail(ErrorCode::kSchemaError, "unknown mixture source \"" + source + "\"");
    }
  }

  if (doc.contains("classifier")) {
    const json& cl = doc["classifier"];
    if (cl.contains("k")) c.k = cl["k"].get<Index>();
    if (cl.contains("w_min")) c.w_min = cl["w_min"].get<double>();
    c.classifier.delta = get_or(cl, "delta", c.classifier.delta);
    if (cl.contains("t")) c.classifier.t_override = cl["t"].get<double>();
    if (cl.contains("step_cap")) c.classifier.step_cap = cl["step_cap"].get<Index>();
    c.classifier.power_iter.max_iters = get_or(cl, "power_max_iters", c.classifier.power_iter.max_iters);
    c.classifier.power_iter.tolerance = get_or(cl, "power_tolerance", c.classifier.power_iter.tolerance);
  }
  if (doc.contains("fit")) {
    const json& f = doc["fit"];
    if (f.contains("k")) c.k = f["k"].get<Index>();
    c.fit.max_rounds = get_or(f, "max_rounds", c.fit.max_rounds);
    c.fit.improvement_factor = get_or(f, "improvement_factor", c.fit.improvement_factor);
    const std::string norm = get_or<std::string>(f, "normalization", "paper");
    if (norm != "paper" && norm != "standard") fail(ErrorCode::kSchemaError, "normalization must be paper or standard");
    c.normalization = norm == "paper" ? Normalization::kPaper : Normalization::kStandard;
  }
  if (doc.contains("validate")) c.validate = validate_config_from_json(doc["validate"]);
  c.validate_config();
  return c;
}

double sample_size_scaling(Index n, Index k, double delta, double w_min) {
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  return nn * nn * kk * kk * std::log(kk * nn * nn) / (delta * delta * std::pow(w_min, 6.0));
}

json ExperimentResult::trial_json(std::size_t i, bool record_timing) const {
  const TrialReport& r = trials[i];
  json out{{"trial", r.trial}, {"seed", r.seed}, {"exact_match", r.exact_match}};
  out["objective"] = r.objective ? json(*r.objective) : json(nullptr);
  if (record_timing) out["time_ms"] = r.time_ms;
  out["error"] = r.error ? json(*r.error) : json(nullptr);
  out["details"] = r.details;
  return out;
}

std::string ExperimentResult::summary_csv(bool record_timing) const {
  std::ostringstream out;
  out << "trial,seed,exact_match,objective,time_ms,error\n";
  for (const TrialReport& r : trials) {
    out << r.trial << ',' << r.seed << ',' << (r.exact_match ? "true" : "false") << ','
        << (r.objective ? format_double(*r.objective) : "") << ',' << (record_timing ? format_double(r.time_ms) : "")
        << ',' << (r.error ? csv_field(*r.error) : "") << '\n';
  }
  return out.str();
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate_config();
  std::optional<Mixture> loaded;
  if (config.scenario != Scenario::kValidate && config.mixture.kind == MixtureSource::Kind::kParams)
    loaded = load_params(config.mixture.params_path);

  ExperimentResult result;
  result.trials.resize(static_cast<std::size_t>(config.trials));
  std::atomic<Index> next{0};
  const auto worker = [&]() {
    for (Index i = next++; i < config.trials; i = next++) {
      TrialReport& report = result.trials[static_cast<std::size_t>(i)];
      report.trial = i;
      report.seed = config.master_seed ^ static_cast<std::uint64_t>(i);
      const auto start = std::chrono::steady_clock::now();
      try {
        run_trial(config, loaded, report);
      } catch (const std::exception& e) {
        report.exact_match = false;
        report.error = e.what();
      }
      report.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const int workers = static_cast<int>(std::min<Index>(config.workers, config.trials));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  Index successes = 0;
  double total_ms = 0.0;
  for (const TrialReport& r : result.trials) {
    successes += r.exact_match ? 1 : 0;
    total_ms += r.time_ms;
  }
  result.success_rate = static_cast<double>(successes) / static_cast<double>(config.trials);
  if (config.record_timing) result.mean_time_ms = total_ms / static_cast<double>(config.trials);

  json meta{{"scenario", to_string(config.scenario)},
            {"trials", config.trials},
            {"master_seed", config.master_seed},
            {"sample_size", config.sample_size},
            {"successes", successes},
            {"success_rate", result.success_rate}};
  meta["mean_time_ms"] = result.mean_time_ms ? json(*result.mean_time_ms) : json(nullptr);
  if (config.scenario == Scenario::kClassifyGeneral && config.k && config.w_min) {
    const Index n = config.mixture.kind == MixtureSource::Kind::kPlant ? config.mixture.plant.n : config.mixture.n;
    const double scaling = sample_size_scaling(n, *config.k, config.classifier.delta, *config.w_min);
    meta["sample_size_scaling"] = {{"n", n}, {"scaling", scaling},
                                   {"ratio", static_cast<double>(config.sample_size) / scaling}};
  }
  result.metadata = std::move(meta);

  if (!config.output_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) fail(ErrorCode::kIoError, "cannot create " + config.output_dir + ": " + ec.message());
    const std::filesystem::path dir(config.output_dir);
    for (std::size_t i = 0; i < result.trials.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "trial_%04zu.json", i);
      write_text_file((dir / name).string(), result.trial_json(i, config.record_timing).dump(2) + "\n");
    }
    write_text_file((dir / "summary.csv").string(), result.summary_csv(config.record_timing));
    write_text_file((dir / "aggregate.json").string(), result.metadata.dump(2) + "\n");
  }
  return result;
}

json run_validation(const ValidateConfig& config, std::uint64_t seed) {
  const std::string& suite = config.suite;
  const char* known[] = {"all", "lemma5", "lemma6", "lemma7", "lemma8", "corollary4", "lemma12"};
  require(std::find(std::begin(known), std::end(known), suite) != std::end(known), ErrorCode::kInvalidArgument,
          "unknown suite \"" + suite + "\"");
  const Rng base(seed);
  std::uint64_t cell = 0;
  const auto next_rng = [&]() { return base.stream(++cell); };

  json bounds = json::array();
  bool pass = true;
  const auto record = [&](EmpiricalBound bound, json inputs) {
    json entry = bound_json(bound);
    entry["inputs"] = std::move(inputs);
    pass = pass && bound.pass;
    bounds.push_back(std::move(entry));
  };

  const bool single_shape = wants(suite, "lemma5") || wants(suite, "lemma6") || wants(suite, "lemma7");
  if (single_shape) {
    for (Index n : config.dims) {
      Rng shape_rng = next_rng();
      for (const ShapeCell& shape : validator_shapes(n, config, shape_rng)) {
        for (double t : config.ts) {
          const json inputs{{"n", n}, {"shape", shape.name}, {"t", t}};
          if (wants(suite, "lemma5")) {
            Rng rng = next_rng();
            record(shell_mass_check(shape.params, t, config.num_samples, rng), inputs);
          }
          if (wants(suite, "lemma6")) {
            Vector z = shape.params.center();
            z[0] += shape.params.radius();
            Rng rng = next_rng();
            record(point_distance_check(shape.params, z, t, config.num_samples, rng), inputs);
          }
          if (wants(suite, "lemma7")) {
            Rng rng = next_rng();
            record(pair_distance_check(shape.params, t, config.num_samples, rng), inputs);
          }
        }
      }
    }
  }

  if (wants(suite, "lemma8")) {
    for (Index n : config.dims) {
      for (const char* shape : {"spherical", "eccentric"}) {
        for (double t : config.cross_ts) {
          PlantOptions plant;
          plant.n = n;
          plant.k = 2;
          const bool eccentric = std::string(shape) == "eccentric";
          plant.shapes = {eccentric ? ComponentShape{config.eccentric_lo, config.eccentric_hi, true}
                                    : ComponentShape{1.0, 1.0, false}};
          plant.config = SeparationConfig::paper(t);
          plant.radius_samples = config.radius_samples;
          Rng plant_rng = next_rng();
          const Mixture pair = plant_separated_mixture(plant, plant_rng);
          Rng rng = next_rng();
          record(cross_pair_check(pair.components()[0], pair.components()[1], t, config.num_samples, rng),
                 json{{"n", n}, {"shape", shape}, {"t", t}});
        }
      }
    }
  }

  json growth = json::array();
  if (wants(suite, "corollary4")) {
    const Index n = config.growth_dim;
    require(config.growth_points >= 2, ErrorCode::kInvalidArgument, "growth grid needs at least 2 points");
    Rng radius_rng = next_rng();
    const GaussianParams params = with_estimated_radius(make_spherical(Vector::Zero(n), 1.0), radius_rng);
    const double top = params.radius() + 4.0 * params.sigma_max();
    std::vector<double> grid;
    for (Index i = 0; i < config.growth_points; ++i)
      grid.push_back(top * static_cast<double>(i) / static_cast<double>(config.growth_points - 1));
    Rng rng = next_rng();
    const GrowthCurve curve = ball_growth_check(params, params.center(), grid, config.growth_samples, rng);
    json intervals = json::array();
    for (const GrowthInterval& g : curve.intervals)
      intervals.push_back({{"r_lo", g.r_lo}, {"r_hi", g.r_hi}, {"rate", g.rate}, {"slack", g.slack},
                           {"inner", g.inner}, {"pass", g.pass}});
    pass = pass && curve.pass;
    growth.push_back({{"n", n},
                      {"bound", curve.bound},
                      {"num_samples", curve.num_samples},
                      {"radii", curve.radii},
                      {"estimated_mass", curve.estimated_mass},
                      {"intervals", std::move(intervals)},
                      {"pass", curve.pass}});
  }

  json covariance = json::array();
  if (wants(suite, "lemma12")) {
    for (Index n : config.covariance_dims) {
      Rng shape_rng = next_rng();
      const GaussianParams params = eccentric_shape(n, config.eccentric_lo, config.eccentric_hi, shape_rng);
      Rng rng = next_rng();
      const CovarianceCheck check = covariance_concentration_check(params, config.covariance_sample,
                                                                   config.covariance_delta,
                                                                   config.covariance_directions, rng);
      pass = pass && check.pass;
      covariance.push_back({{"n", n},
                            {"sample_size", config.covariance_sample},
                            {"delta", config.covariance_delta},
                            {"epsilon", check.epsilon},
                            {"vacuous", check.vacuous},
                            {"directions_tested", check.directions_tested},
                            {"worst_ratio_deviation", check.worst_ratio_deviation},
                            {"pass", check.pass}});
    }
  }

  return json{{"suite", suite},      {"seed", seed},          {"pass", pass}, {"bounds", std::move(bounds)},
              {"growth", std::move(growth)}, {"covariance", std::move(covariance)}};
}

}  // namespace gmsep
