#pragma once

#include "gmsep/classifier.hpp"
#include "gmsep/common.hpp"
#include "gmsep/gaussian_model.hpp"
#include "gmsep/ml_fit.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace gmsep {

/// Shortest text that reads back to the same double (17 significant digits at most).
std::string format_double(double value);

/// Samples CSV: header dim_0,...,dim_{n-1} with an optional final "label" column.
void write_samples_csv(std::ostream& out, const LabeledSampleSet& samples);
LabeledSampleSet read_samples_csv(std::istream& in);
void save_samples(const std::string& path, const LabeledSampleSet& samples);
LabeledSampleSet load_samples(const std::string& path);

nlohmann::json params_to_json(const Mixture& mixture);
Mixture params_from_json(const nlohmann::json& doc);
void save_params(const std::string& path, const Mixture& mixture);
Mixture load_params(const std::string& path);

/// One "cluster" column, a row per sample point.
void write_partition_csv(std::ostream& out, const Partition& partition, Index sample_count);
void save_partition(const std::string& path, const Partition& partition, Index sample_count);

nlohmann::json trace_to_json(const PeelTrace& trace);
nlohmann::json solution_to_json(const KMedianSolution& solution);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace gmsep
