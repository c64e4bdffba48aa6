#pragma once

#include <limits>
#include <string>

#include <json.hpp>

#include "fmpp/core.hpp"
#include "fmpp/kernels.hpp"

namespace fmpp::io::detail {

using nlohmann::json;

inline json space_to_json(const MarkerSpace& space) {
  json dims = json::array();
  for (const auto& d : space.dimensions()) {
    json jd = {{"name", d.name}, {"cardinality", d.cardinality}};
    if (!d.labels.empty()) jd["labels"] = d.labels;
    if (d.duration) {
      json intervals = json::array();
      for (std::size_t k = 0; k < d.duration->size(); ++k) {
        const double hi = d.duration->upper[k];
        intervals.push_back({d.duration->lower[k], std::isinf(hi) ? json(nullptr) : json(hi)});
      }
      jd["duration"] = {{"intervals", intervals}, {"midpoints", d.duration->midpoints}};
    }
    dims.push_back(std::move(jd));
  }
  json out = {{"format", "fmpp-marker-space"},
              {"version", 1},
              {"profile_dim", space.profile_dim()},
              {"dimensions", dims}};
  if (!space.time_unit().empty()) out["time_unit"] = space.time_unit();
  return out;
}

inline MarkerSpace space_from_json(const json& j) {
  if (j.contains("version") && j.at("version").get<int>() != 1) {
    throw ConfigError("unsupported marker-space format version " + j.at("version").dump());
  }
  std::vector<MarkerDimension> dims;
  for (const auto& jd : j.at("dimensions")) {
    MarkerDimension d;
    d.name = jd.value("name", std::string{});
    d.cardinality = jd.at("cardinality").get<int>();
    if (jd.contains("labels")) d.labels = jd.at("labels").get<std::vector<std::string>>();
    if (jd.contains("duration")) {
      DurationBins bins;
      for (const auto& iv : jd.at("duration").at("intervals")) {
        if (!iv.is_array() || iv.size() != 2) throw ConfigError("duration interval must be [lower, upper]");
        bins.lower.push_back(iv[0].get<double>());
        bins.upper.push_back(iv[1].is_null() ? std::numeric_limits<double>::infinity() : iv[1].get<double>());
      }
      bins.midpoints = jd.at("duration").at("midpoints").get<std::vector<double>>();
      d.duration = std::move(bins);
    }
    dims.push_back(std::move(d));
  }
  return MarkerSpace(std::move(dims), j.value("profile_dim", 0), j.value("time_unit", std::string{}));
}

inline json kernel_to_json(const KernelSpec& k) {
  return {{"form", std::string(to_string(k.form))}, {"decay", k.decay}, {"bandwidth", k.bandwidth}};
}

inline KernelSpec kernel_from_json(const json& j) {
  KernelSpec k;
  k.form = parse_kernel_form(j.value("form", std::string("mcp")));
  k.decay = j.value("decay", 1.0);
  k.bandwidth = j.value("bandwidth", 1.0);
  k.validate();
  return k;
}

template <class Mat>
json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw ConfigError("matrix must have " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError("matrix row " + std::to_string(i) + " must have " + std::to_string(cols) + " entries");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace fmpp::io::detail
