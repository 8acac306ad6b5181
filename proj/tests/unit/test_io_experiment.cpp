#include "gmsep/experiment.hpp"
#include "gmsep/io.hpp"
#include "gmsep/separation.hpp"
#include "helpers.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

using namespace gmsep;
using testutil::vec;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gmsep_unit_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

// Agreement of the best bijection by trying every permutation.
Index brute_agreement(const Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>& confusion) {
  std::vector<int> perm(static_cast<std::size_t>(confusion.cols()));
  std::iota(perm.begin(), perm.end(), 0);
  Index best = 0;
  do {
    Index total = 0;
    for (Index r = 0; r < confusion.rows() && r < confusion.cols(); ++r) total += confusion(r, perm[static_cast<std::size_t>(r)]);
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

ExperimentConfig planted_config() {
  ExperimentConfig c;
  c.scenario = Scenario::kClassifyGeneral;
  c.mixture.kind = MixtureSource::Kind::kPlant;
  c.mixture.plant.n = 6;
  c.mixture.plant.k = 2;
  c.mixture.plant.shapes = {ComponentShape{0.5, 2.0, true}};
  c.mixture.plant.config = SeparationConfig::practical(10.0);
  c.mixture.plant.slack = 1.5;
  c.mixture.plant.radius_samples = 20000;
  c.sampling = Sampling::kStratified;
  c.sample_size = 400;
  c.trials = 3;
  c.master_seed = 77;
  c.classifier.t_override = 10.0;
  c.record_timing = false;
  return c;
}

}  // namespace

TEST_CASE("format_double round trips") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(40)) - 20.0);
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-3.0) == "-3");
}

TEST_CASE("samples csv") {
  SUBCASE("100 x 5 round trip is bitwise") {
    Rng rng(2);
    LabeledSampleSet s;
    s.points.resize(100, 5);
    for (Index i = 0; i < 100; ++i)
      for (Index j = 0; j < 5; ++j) s.points(i, j) = rng.normal() * 1e3 / 7.0;
    s.labels = std::vector<int>(100);
    for (int i = 0; i < 100; ++i) (*s.labels)[static_cast<std::size_t>(i)] = i % 3;
    const fs::path dir = scratch("csv");
    save_samples((dir / "s.csv").string(), s);
    const LabeledSampleSet back = load_samples((dir / "s.csv").string());
    REQUIRE(back.points.rows() == 100);
    REQUIRE(back.points.cols() == 5);
    CHECK(std::memcmp(back.points.data(), s.points.data(), sizeof(double) * 500) == 0);
    CHECK(back.labels == s.labels);
  }
  SUBCASE("unlabeled") {
    std::istringstream in("dim_0,dim_1\n1,2\n3,4\n");
    const LabeledSampleSet s = read_samples_csv(in);
    CHECK_FALSE(s.labels.has_value());
    CHECK(s.points(1, 0) == 3.0);
  }
  SUBCASE("missing coordinate names the row") {
    std::istringstream in("dim_0,dim_1,dim_2\n1,2,3\n4,5\n");
    CHECK_CODE(read_samples_csv(in), ErrorCode::kParseError);
    std::istringstream again("dim_0,dim_1,dim_2\n1,2,3\n4,5\n");
    CHECK(message_of([&] { read_samples_csv(again); }).find("row 3") != std::string::npos);
    std::istringstream bad("dim_0\nabc\n");
    CHECK_CODE(read_samples_csv(bad), ErrorCode::kParseError);
  }
  SUBCASE("missing file") {
    CHECK_CODE(load_samples("/nonexistent/dir/s.csv"), ErrorCode::kIoError);
  }
}

TEST_CASE("params json") {
  SUBCASE("round trip") {
    Rng rng(3);
    PlantOptions opts;
    opts.n = 4;
    opts.k = 3;
    opts.shapes = {ComponentShape{0.5, 2.0, true}};
    opts.radius_samples = 20000;
    const Mixture m = plant_separated_mixture(opts, rng);
    const Mixture back = params_from_json(params_to_json(m));
    REQUIRE(back.k() == 3);
    CHECK(back.weights() == m.weights());
    for (Index i = 0; i < 3; ++i) {
      const GaussianParams& a = m.components()[static_cast<std::size_t>(i)];
      const GaussianParams& b = back.components()[static_cast<std::size_t>(i)];
      CHECK(a.center() == b.center());
      CHECK(a.eigenvalues() == b.eigenvalues());
      CHECK(*a.rotation() == *b.rotation());
      CHECK(a.median_radius()->value == b.median_radius()->value);
    }
  }
  SUBCASE("covariance form and numeric radius") {
    const nlohmann::json doc = nlohmann::json::parse(R"({"components": [
      {"weight": 1.0, "center": [0, 0], "covariance": [[2, 0], [0, 1]], "median_radius": 1.5}]})");
    const Mixture m = params_from_json(doc);
    CHECK(m.components()[0].sigma_max() == doctest::Approx(std::sqrt(2.0)));
    CHECK(m.components()[0].radius() == 1.5);
  }
  SUBCASE("weights must sum to one") {
    const nlohmann::json doc = nlohmann::json::parse(R"({"components": [
      {"weight": 0.5, "center": [0], "eigenvalues": [1]},
      {"weight": 0.4, "center": [5], "eigenvalues": [1]}]})");
    CHECK_CODE(params_from_json(doc), ErrorCode::kSchemaError);
  }
  SUBCASE("broken file") {
    const fs::path dir = scratch("json");
    write_text_file((dir / "p.json").string(), "{ not json");
    CHECK_CODE(load_params((dir / "p.json").string()), ErrorCode::kParseError);
  }
}

TEST_CASE("partition_compare examples") {
  SUBCASE("relabeled ids") {
    const PartitionScore s = partition_compare(std::vector<int>{1, 1, 0, 0, 2}, std::vector<int>{0, 0, 1, 1, 2});
    CHECK(s.exact_match);
    CHECK(s.agreement == 5);
    CHECK(s.bijection == std::vector<int>{1, 0, 2});
  }
  SUBCASE("one point moved") {
    const PartitionScore s = partition_compare(std::vector<int>{0, 0, 0, 1}, std::vector<int>{0, 0, 1, 1});
    CHECK_FALSE(s.exact_match);
    CHECK(s.agreement == 3);
    CHECK(s.confusion(0, 1) + s.confusion(1, 0) == 1);
  }
  SUBCASE("shuffled labels recover the bijection") {
    Rng rng(4);
    std::vector<int> truth(60);
    for (int& v : truth) v = static_cast<int>(rng.below(3));
    const std::vector<int> relabel{2, 0, 1};
    std::vector<int> predicted;
    for (int v : truth) predicted.push_back(relabel[static_cast<std::size_t>(v)]);
    const PartitionScore s = partition_compare(predicted, truth);
    CHECK(s.exact_match);
    for (int c = 0; c < 3; ++c) CHECK(s.bijection[static_cast<std::size_t>(relabel[static_cast<std::size_t>(c)])] == c);
  }
  SUBCASE("hungarian agrees with brute force") {
    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
      const int k = 2 + static_cast<int>(rng.below(4));
      std::vector<int> a(40);
      std::vector<int> b(40);
      for (int i = 0; i < 40; ++i) {
        a[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
        b[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
      }
      const PartitionScore s = partition_compare(a, b);
      CHECK(s.agreement == brute_agreement(s.confusion));
    }
  }
  SUBCASE("errors") {
    CHECK_CODE(partition_compare(std::vector<int>{0, 1}, std::vector<int>{0, 1, 1}), ErrorCode::kIndexMismatch);
    CHECK_CODE(partition_compare(std::vector<int>{0, -1}, std::vector<int>{0, 1}), ErrorCode::kIndexMismatch);
    Partition dup;
    dup.clusters = {{0, 1}, {1, 2}};
    CHECK_CODE(partition_compare(dup, std::vector<int>{0, 0, 1}), ErrorCode::kIndexMismatch);
    Partition gap;
    gap.clusters = {{0}, {2}};
    CHECK_CODE(partition_compare(gap, std::vector<int>{0, 0, 1}), ErrorCode::kIndexMismatch);
  }
}

TEST_CASE("run_experiment") {
  SUBCASE("single planted trial") {
    ExperimentConfig c = planted_config();
    c.trials = 1;
    const ExperimentResult r = run_experiment(c);
    REQUIRE(r.trials.size() == 1);
    CHECK(r.trials[0].seed == 77);
    CHECK_FALSE(r.trials[0].error.has_value());
    CHECK(r.trials[0].exact_match);
    CHECK(r.success_rate == 1.0);
  }
  SUBCASE("rerun is byte identical") {
    ExperimentConfig c = planted_config();
    c.output_dir = scratch("exp_a").string();
    const ExperimentResult a = run_experiment(c);
    c.output_dir = scratch("exp_b").string();
    c.workers = 2;
    const ExperimentResult b = run_experiment(c);
    CHECK(a.summary_csv(false) == b.summary_csv(false));
    for (const char* name : {"summary.csv", "trial_0000.json", "trial_0002.json"}) {
      CHECK(slurp(fs::temp_directory_path() / "gmsep_unit_exp_a" / name) ==
            slurp(fs::temp_directory_path() / "gmsep_unit_exp_b" / name));
      CHECK_FALSE(slurp(fs::temp_directory_path() / "gmsep_unit_exp_a" / name).empty());
    }
    double mean = 0.0;
    for (const TrialReport& t : a.trials) mean += t.exact_match ? 1.0 : 0.0;
    CHECK(a.success_rate == doctest::Approx(mean / 3.0));
    CHECK(a.summary_csv(false).rfind("trial,seed,exact_match,objective,time_ms,error\n", 0) == 0);
  }
  SUBCASE("trial errors are recorded and the batch continues") {
    ExperimentConfig c;
    c.scenario = Scenario::kClassifyGeneral;
    c.mixture.kind = MixtureSource::Kind::kPair;
    c.mixture.n = 2;
    c.mixture.sigma = 1.0;
    c.mixture.distance = 0.5;
    c.sample_size = 200;
    c.trials = 3;
    c.classifier.step_cap = 1;
    c.record_timing = false;
    const ExperimentResult r = run_experiment(c);
    REQUIRE(r.trials.size() == 3);
    int errors = 0;
    for (const TrialReport& t : r.trials) {
      if (t.error) {
        ++errors;
        CHECK_FALSE(t.exact_match);
      }
    }
    CHECK(errors >= 1);
    CHECK(r.summary_csv(false).find("NoGapWithinCap") != std::string::npos);
  }
  SUBCASE("fit scenario") {
    ExperimentConfig c;
    c.scenario = Scenario::kFit;
    c.mixture.kind = MixtureSource::Kind::kPair;
    c.mixture.n = 4;
    c.mixture.sigma = 1.0;
    c.mixture.distance = 20.0;
    c.sampling = Sampling::kStratified;
    c.sample_size = 400;
    c.trials = 2;
    c.record_timing = false;
    const ExperimentResult r = run_experiment(c);
    for (const TrialReport& t : r.trials) {
      CHECK(t.exact_match);
      REQUIRE(t.objective.has_value());
      CHECK(t.details["objective_ratio"].get<double>() <= 2.0);
    }
  }
  SUBCASE("config from json") {
    const nlohmann::json doc = nlohmann::json::parse(R"({
      "scenario": "classify_spherical", "sampling": "iid", "sample_size": 500, "trials": 2, "master_seed": 3,
      "spherical_t": 5, "mixture": {"source": "spherical", "n": 16, "k": 2, "sigma": 1, "c_prime": 12, "t": 5}})");
    const ExperimentConfig c = experiment_config_from_json(doc);
    CHECK(c.scenario == Scenario::kClassifySpherical);
    CHECK(c.trials == 2);
    CHECK(c.mixture.kind == MixtureSource::Kind::kSpherical);
    CHECK(c.spherical_t == 5.0);
    CHECK_CODE(experiment_config_from_json(nlohmann::json::parse(R"({"scenario": "dance"})")), ErrorCode::kSchemaError);
  }
}
