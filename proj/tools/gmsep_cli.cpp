// Command-line front end over the C API.

#include "gmsep/gmsep.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct CliError {
  gm_status status;
};

void check(gm_status status) {
  if (status != GM_OK) throw CliError{status};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
};

using Mixture = Handle<gm_mixture, gm_mixture_free>;
using Samples = Handle<gm_samples, gm_samples_free>;
using Partition = Handle<gm_partition, gm_partition_free>;
using Fit = Handle<gm_fit_result, gm_fit_free>;

std::string take(char* text) {
  std::string out(text);
  gm_string_free(text);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open " << path << "\n";
    throw CliError{GM_IO_ERROR};
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write " << path << "\n";
    throw CliError{GM_IO_ERROR};
  }
  out << text;
}

void print_labels(const gm_partition* partition, const std::string& path) {
  std::vector<int> labels(static_cast<std::size_t>(gm_partition_size(partition)));
  check(gm_partition_labels(partition, labels.data()));
  std::ostringstream out;
  out << "cluster\n";
  for (int l : labels) out << l << '\n';
  write_or_print(path, out.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian mixture separation and classification tools"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate samples from a mixture, or plant a separated mixture first");
  std::string gen_params, gen_out, gen_params_out;
  std::int64_t gen_count = 1000, plant_n = 0, plant_k = 2, radius_samples = 0;
  std::uint64_t seed = 0;
  double eig_lo = 1.0, eig_hi = 1.0, plant_t = 1.0, slack = 1.0;
  std::string mode = "practical";
  bool no_rotate = false;
  gen->add_option("--params", gen_params, "Parameter JSON to sample from");
  gen->add_option("--plant-n", plant_n, "Plant a separated mixture in this dimension instead");
  gen->add_option("--plant-k", plant_k, "Components to plant");
  gen->add_option("--eig-lo", eig_lo, "Smallest covariance eigenvalue");
  gen->add_option("--eig-hi", eig_hi, "Largest covariance eigenvalue");
  gen->add_flag("--no-rotate", no_rotate, "Keep planted components axis-aligned");
  gen->add_option("--t", plant_t, "Separation parameter for planting");
  gen->add_option("--mode", mode, "paper or practical")->check(CLI::IsMember({"paper", "practical"}));
  gen->add_option("--slack", slack, "Multiplier on the required distance");
  gen->add_option("--radius-samples", radius_samples, "Draws per Monte Carlo median radius");
  gen->add_option("--count", gen_count, "Number of samples");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--out", gen_out, "Samples CSV (stdout if omitted)");
  gen->add_option("--params-out", gen_params_out, "Write the mixture parameters here");

  // check-sep
  auto* sep = app.add_subcommand("check-sep", "Print the separation margin matrix");
  std::string sep_params;
  double sep_t = 1.0;
  std::string sep_mode = "paper";
  std::int64_t sep_radius_samples = 100000;
  sep->add_option("--params", sep_params, "Parameter JSON")->required();
  sep->add_option("--t", sep_t, "Separation parameter")->required();
  sep->add_option("--mode", sep_mode, "paper or practical")->check(CLI::IsMember({"paper", "practical"}));
  sep->add_option("--radius-samples", sep_radius_samples, "Draws used when median radii are missing");
  sep->add_option("--seed", seed, "Seed for radius estimation");

  // classify
  auto* classify = app.add_subcommand("classify", "Classify samples with the general algorithm");
  std::string samples_path, out_path, trace_path;
  std::int64_t k = 0, step_cap = 0;
  double w_min = 0.0, delta = 0.05, t = 0.0;
  classify->add_option("--samples", samples_path, "Samples CSV")->required();
  classify->add_option("--k", k, "Number of components")->required();
  classify->add_option("--wmin", w_min, "Smallest mixing weight")->required();
  classify->add_option("--delta", delta, "Failure probability");
  classify->add_option("--t", t, "Override the scheduled t");
  classify->add_option("--step-cap", step_cap, "Cap on gap-search steps");
  classify->add_option("--trace", trace_path, "Write the peel trace JSON here");
  classify->add_option("--out", out_path, "Partition CSV (stdout if omitted)");

  // classify-spherical
  auto* spherical = app.add_subcommand("classify-spherical", "Classify samples with the spherical algorithm");
  spherical->add_option("--samples", samples_path, "Samples CSV")->required();
  spherical->add_option("--k", k, "Number of components")->required();
  spherical->add_option("--t", t, "Separation parameter")->required();
  spherical->add_option("--out", out_path, "Partition CSV (stdout if omitted)");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit k equal spherical Gaussians by k-median");
  bool oracle = false;
  fit->add_option("--samples", samples_path, "Samples CSV")->required();
  fit->add_option("--k", k, "Number of components")->required();
  fit->add_option("--seed", seed, "Random seed");
  fit->add_flag("--oracle", oracle, "Also solve exactly when C(M, k) <= 10^6");
  fit->add_option("--out", out_path, "JSON output (stdout if omitted)");

  // validate
  auto* validate = app.add_subcommand("validate", "Run the concentration validators");
  std::string suite = "all", config_path;
  validate->add_option("--suite", suite, "lemma5|lemma6|lemma7|lemma8|corollary4|lemma12|all")
      ->check(CLI::IsMember({"lemma5", "lemma6", "lemma7", "lemma8", "corollary4", "lemma12", "all"}));
  validate->add_option("--config", config_path, "Validator config JSON");
  validate->add_option("--seed", seed, "Random seed");
  validate->add_option("--out", out_path, "Report JSON (stdout if omitted)");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run a seeded batch of trials");
  experiment->add_option("--config", config_path, "Experiment config JSON")->required();
  experiment->add_option("--out", out_path, "Aggregate JSON (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      Mixture mixture;
      if (!gen_params.empty()) {
        check(gm_mixture_load(gen_params.c_str(), &mixture.ptr));
      } else if (plant_n > 0) {
        gm_plant_options options{plant_n, plant_k, eig_lo, eig_hi, no_rotate ? 0 : 1, mode == "paper" ? 1 : 0,
                                 plant_t,  slack,   radius_samples};
        check(gm_mixture_plant(&options, seed, &mixture.ptr));
      } else {
        std::cerr << "gen needs --params or --plant-n\n";
        return 2;
      }
      if (!gen_params_out.empty()) check(gm_mixture_save(mixture.ptr, gen_params_out.c_str()));
      Samples samples;
      check(gm_samples_generate(mixture.ptr, gen_count, seed, &samples.ptr));
      if (gen_out.empty() || gen_out == "-") {
        char* csv = nullptr;
        check(gm_samples_to_csv(samples.ptr, &csv));
        std::cout << take(csv);
      } else {
        check(gm_samples_save(samples.ptr, gen_out.c_str()));
      }
      return 0;
    }

    if (*sep) {
      Mixture mixture;
      check(gm_mixture_load(sep_params.c_str(), &mixture.ptr));
      const std::int64_t kk = gm_mixture_k(mixture.ptr);
      std::vector<double> margin(static_cast<std::size_t>(kk * kk));
      int satisfied = 0;
      gm_status status = gm_separation_margin(mixture.ptr, sep_t, sep_mode == "paper", margin.data(), &satisfied);
      if (status == GM_MISSING_MEDIAN_RADIUS) {
        check(gm_mixture_estimate_radii(mixture.ptr, sep_radius_samples, seed));
        status = gm_separation_margin(mixture.ptr, sep_t, sep_mode == "paper", margin.data(), &satisfied);
      }
      check(status);
      for (std::int64_t j = 0; j < kk; ++j) std::cout << (j ? "," : "") << "c" << j;
      std::cout << '\n';
      char buf[64];
      for (std::int64_t i = 0; i < kk; ++i) {
        for (std::int64_t j = 0; j < kk; ++j) {
          const double m = margin[static_cast<std::size_t>(i * kk + j)];
          if (std::isnan(m)) {
            buf[0] = '\0';
          } else {
            std::snprintf(buf, sizeof buf, "%.17g", m);
          }
          std::cout << (j ? "," : "") << buf;
        }
        std::cout << '\n';
      }
      return satisfied ? 0 : 1;
    }

    if (*classify) {
      Samples samples;
      check(gm_samples_load(samples_path.c_str(), &samples.ptr));
      gm_classifier_options options{k, w_min, delta, t, step_cap};
      Partition partition;
      check(gm_classify_general(samples.ptr, &options, &partition.ptr));
      print_labels(partition.ptr, out_path);
      if (!trace_path.empty()) {
        char* trace = nullptr;
        check(gm_partition_trace_json(partition.ptr, &trace));
        write_or_print(trace_path, take(trace) + "\n");
      }
      return 0;
    }

    if (*spherical) {
      Samples samples;
      check(gm_samples_load(samples_path.c_str(), &samples.ptr));
      Partition partition;
      check(gm_classify_spherical(samples.ptr, k, t, &partition.ptr));
      print_labels(partition.ptr, out_path);
      return 0;
    }

    if (*fit) {
      Samples samples;
      check(gm_samples_load(samples_path.c_str(), &samples.ptr));
      Fit result;
      check(gm_fit_spherical(samples.ptr, k, seed, oracle ? 1 : 0, &result.ptr));
      char* doc = nullptr;
      check(gm_fit_to_json(result.ptr, &doc));
      write_or_print(out_path, take(doc) + "\n");
      return 0;
    }

    if (*validate) {
      const std::string config = config_path.empty() ? std::string() : read_file(config_path);
      char* report = nullptr;
      check(gm_validate(config_path.empty() ? nullptr : config.c_str(), suite.c_str(), seed, &report));
      const std::string text = take(report);
      write_or_print(out_path, text + "\n");
      return text.find("\"pass\": false") == std::string::npos ? 0 : 1;
    }

    if (*experiment) {
      const std::string config = read_file(config_path);
      const std::string base = std::filesystem::path(config_path).parent_path().string();
      char* aggregate = nullptr;
      check(gm_run_experiment(config.c_str(), base.c_str(), &aggregate));
      write_or_print(out_path, take(aggregate) + "\n");
      return 0;
    }
  } catch (const CliError& e) {
    std::cerr << "error (" << gm_status_name(e.status) << "): " << gm_last_error() << "\n";
    return 3;
  }
  return 0;
}
