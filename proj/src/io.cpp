#include "gmsep/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

namespace gmsep {

namespace {

using nlohmann::json;

std::string where(Index line, Index column) {
  std::ostringstream msg;
  msg << "row " << line << ", column " << column;
  return msg.str();
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

Vector json_vector(const json& node, const char* field) {
  if (!node.is_array()) fail(ErrorCode::kSchemaError, std::string("\"") + field + "\" must be an array of numbers");
  Vector v(static_cast<Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number())
      fail(ErrorCode::kSchemaError, std::string("\"") + field + "\" must be an array of numbers");
    v(static_cast<Index>(i)) = node[i].get<double>();
  }
  return v;
}

Matrix json_matrix(const json& node, const char* field) {
  if (!node.is_array() || node.empty())
    fail(ErrorCode::kSchemaError, std::string("\"") + field + "\" must be a non-empty array of rows");
  const std::size_t rows = node.size();
  const std::size_t cols = node[0].is_array() ? node[0].size() : 0;
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!node[r].is_array() || node[r].size() != cols)
      fail(ErrorCode::kSchemaError, std::string("\"") + field + "\" rows must have equal length");
    m.row(static_cast<Index>(r)) = json_vector(node[r], field).transpose();
  }
  return m;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) fail(ErrorCode::kIoError, "could not format number");
  return std::string(buf, ptr);
}

void write_samples_csv(std::ostream& out, const LabeledSampleSet& samples) {
  const Index n = samples.dim();
  for (Index d = 0; d < n; ++d) out << (d ? "," : "") << "dim_" << d;
  if (samples.labels) out << (n ? "," : "") << "label";
  out << '\n';
  for (Index i = 0; i < samples.size(); ++i) {
    for (Index d = 0; d < n; ++d) out << (d ? "," : "") << format_double(samples.points(i, d));
    if (samples.labels) out << (n ? "," : "") << (*samples.labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
}

LabeledSampleSet read_samples_csv(std::istream& in) {
  std::string line;
  Index line_no = 1;
  if (!std::getline(in, line)) fail(ErrorCode::kParseError, "empty samples file");
  const auto header = split_commas(line);
  Index n = 0;
  bool labeled = false;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string_view name = trim(header[c]);
    if (name == "label" && c + 1 == header.size()) {
      labeled = true;
    } else if (name == "dim_" + std::to_string(c)) {
      ++n;
    } else {
      fail(ErrorCode::kParseError, where(line_no, static_cast<Index>(c) + 1) + ": unexpected header field \"" +
                                       std::string(name) + "\"");
    }
  }
  if (n == 0) fail(ErrorCode::kParseError, "samples header has no dim_ columns");
  const std::size_t width = static_cast<std::size_t>(n) + (labeled ? 1 : 0);

  std::vector<double> values;
  std::vector<int> labels;
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != width) {
      std::ostringstream msg;
      msg << where(line_no, static_cast<Index>(std::min(fields.size(), width)) + 1) << ": expected " << width
          << " fields, found " << fields.size();
      fail(ErrorCode::kParseError, msg.str());
    }
    for (Index d = 0; d < n; ++d) {
      double v = 0.0;
      if (!parse_number(fields[static_cast<std::size_t>(d)], v))
        fail(ErrorCode::kParseError, where(line_no, d + 1) + ": not a number \"" +
                                         std::string(trim(fields[static_cast<std::size_t>(d)])) + "\"");
      values.push_back(v);
    }
    if (labeled) {
      int label = 0;
      if (!parse_number(fields.back(), label) || label < 0)
        fail(ErrorCode::kParseError, where(line_no, n + 1) + ": label must be a non-negative integer");
      labels.push_back(label);
    }
    ++rows;
  }
  if (rows == 0) fail(ErrorCode::kParseError, "samples file has no data rows");

  LabeledSampleSet samples;
  samples.points = Eigen::Map<const PointMatrix>(values.data(), rows, n);
  if (labeled) samples.labels = std::move(labels);
  samples.ambient_dim = n;
  return samples;
}

void save_samples(const std::string& path, const LabeledSampleSet& samples) {
  std::ostringstream out;
  write_samples_csv(out, samples);
  write_text_file(path, out.str());
}

LabeledSampleSet load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  return read_samples_csv(in);
}

json params_to_json(const Mixture& mixture) {
  json components = json::array();
  for (std::size_t i = 0; i < mixture.k(); ++i) {
    const GaussianParams& g = mixture.components()[i];
    json c;
    c["weight"] = mixture.weights()[i];
    c["center"] = vector_json(g.center());
    c["eigenvalues"] = vector_json(g.eigenvalues());
    if (g.rotation()) c["rotation"] = matrix_json(*g.rotation());
    if (g.median_radius()) {
      c["median_radius"] = {{"value", g.median_radius()->value},
                            {"half_width", g.median_radius()->half_width},
                            {"exact", g.median_radius()->exact}};
    }
    components.push_back(std::move(c));
  }
  return json{{"components", std::move(components)}, {"w_min", mixture.w_min()}};
}

Mixture params_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("components") || !doc["components"].is_array() || doc["components"].empty())
    fail(ErrorCode::kSchemaError, "params need a non-empty \"components\" array");
  std::vector<GaussianParams> components;
  std::vector<double> weights;
  for (const json& c : doc["components"]) {
    if (!c.is_object() || !c.contains("center") || !c.contains("weight") || !c["weight"].is_number())
      fail(ErrorCode::kSchemaError, "each component needs \"weight\" and \"center\"");
    Vector center = json_vector(c["center"], "center");
    GaussianParams g = [&] {
      if (c.contains("covariance")) return gaussian_from_covariance(center, json_matrix(c["covariance"], "covariance"));
      if (!c.contains("eigenvalues")) fail(ErrorCode::kSchemaError, "component needs \"eigenvalues\" or \"covariance\"");
      std::optional<Matrix> rotation;
      if (c.contains("rotation") && !c["rotation"].is_null()) rotation = json_matrix(c["rotation"], "rotation");
      return make_gaussian(center, json_vector(c["eigenvalues"], "eigenvalues"), std::move(rotation));
    }();
    if (c.contains("median_radius")) {
      const json& r = c["median_radius"];
      MedianRadius radius;
      if (r.is_number()) {
        radius.value = r.get<double>();
      } else if (r.is_object() && r.contains("value") && r["value"].is_number()) {
        radius.value = r["value"].get<double>();
        radius.half_width = r.value("half_width", 0.0);
        radius.exact = r.value("exact", false);
      } else {
        fail(ErrorCode::kSchemaError, "\"median_radius\" must be a number or {value, half_width, exact}");
      }
      g = g.with_median_radius(radius);
    }
    components.push_back(std::move(g));
    weights.push_back(c["weight"].get<double>());
  }
  std::optional<double> w_min;
  if (doc.contains("w_min") && doc["w_min"].is_number()) w_min = doc["w_min"].get<double>();
  return Mixture(std::move(components), std::move(weights), w_min);
}

void save_params(const std::string& path, const Mixture& mixture) {
  write_text_file(path, params_to_json(mixture).dump(2) + "\n");
}

Mixture load_params(const std::string& path) { return params_from_json(read_json_file(path)); }

void write_partition_csv(std::ostream& out, const Partition& partition, Index sample_count) {
  out << "cluster\n";
  for (int label : partition.labels(sample_count)) out << label << '\n';
}

void save_partition(const std::string& path, const Partition& partition, Index sample_count) {
  std::ostringstream out;
  write_partition_csv(out, partition, sample_count);
  write_text_file(path, out.str());
}

json trace_to_json(const PeelTrace& trace) {
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
                     {"removed", p.removed},
                     {"warnings", p.warnings}});
  }
  return json{{"threshold", trace.threshold}, {"t", trace.t}, {"delta", trace.delta}, {"peels", std::move(peels)}};
}

json solution_to_json(const KMedianSolution& solution) {
  json centers = json::array();
  for (Index r = 0; r < solution.centers.rows(); ++r) centers.push_back(vector_json(solution.centers.row(r).transpose()));
  json out{{"centers", std::move(centers)},
           {"center_indices", solution.center_indices},
           {"assignment", solution.assignment},
           {"objective", solution.objective},
           {"sigma_hat", solution.sigma_hat},
           {"zero_sigma", solution.zero_sigma},
           {"rounds", solution.rounds}};
  // JSON has no infinity; the flag carries the unbounded case.
  out["log_likelihood"] = solution.zero_sigma ? json(nullptr) : json(solution.log_likelihood);
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParseError, path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorCode::kIoError, "write failed for " + path);
}

}  // namespace gmsep
