#pragma once

// File formats. Marker values are 1-based in every file and 0-based in
// memory; the conversion happens here and nowhere else. The grammar of
// each format is documented in docs/formats.md.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fmpp/core.hpp"
#include "fmpp/inference.hpp"
#include "fmpp/model.hpp"

namespace fmpp::io {

inline constexpr int kSpaceFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

MarkerSpace parse_marker_space(const std::string& json_text);
MarkerSpace load_marker_space(const std::filesystem::path& path);
std::string marker_space_to_json(const MarkerSpace& space);

/// Reads one sequence per non-blank line. Syntax errors throw ParseError
/// with the line number; all invariant violations are collected and
/// reported together in a single ParseError. An empty input yields an
/// empty dataset and a warning.
Dataset parse_dataset(std::istream& in, const MarkerSpace& space,
                      std::vector<std::string>* warnings = nullptr);
Dataset load_dataset(const std::filesystem::path& data, const MarkerSpace& space,
                     std::vector<std::string>* warnings = nullptr);
Dataset load_dataset(const std::filesystem::path& data, const std::filesystem::path& space,
                     std::vector<std::string>* warnings = nullptr);
void write_dataset(std::ostream& out, const Dataset& dataset);

std::string model_to_json(const Model& model);
/// Throws ConfigError on a format-version mismatch.
Model parse_model(const std::string& json_text);
Model load_model(const std::filesystem::path& path);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

std::string prediction_to_json(const MarkerSpace& space, const std::string& sequence_id, double t,
                               const Prediction& p);

std::string report_to_json(const MarkerSpace& space, const EvalReport& r);
std::string report_to_text(const MarkerSpace& space, const EvalReport& r);
/// Columns: k, one per dimension, joint.
std::string top_k_csv(const MarkerSpace& space, const EvalReport& r);

std::string cv_report_to_json(const MarkerSpace& space, const CrossValidationReport& r);
std::string cv_report_to_text(const MarkerSpace& space, const CrossValidationReport& r);

std::string sparsity_table(const std::vector<ColumnStat>& stats);
std::string param_count_table(const MarkerSpace& space);

std::string trace_csv(const ConvergenceTrace& trace, bool with_timing = true);

}  // namespace fmpp::io
