#include "fmpp/io.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <unistd.h>

#include "json_util.hpp"

namespace fmpp::io {

namespace {

using detail::json;

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what(), 0);
  }
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

json summary_json(const MetricSummary& s) { return {{"mean", s.mean}, {"std", s.stddev}}; }

json report_json(const MarkerSpace& space, const EvalReport& r) {
  json dims = json::array();
  for (std::size_t z = 0; z < r.accuracy.size(); ++z) {
    dims.push_back({{"name", space.dimension(static_cast<int>(z)).name},
                    {"accuracy", r.accuracy[z]},
                    {"top_k", r.top_k[z]}});
  }
  json out = {{"events", r.events},
              {"dimensions", dims},
              {"joint_accuracy", r.joint_accuracy},
              {"joint_top_k", r.joint_top_k}};
  out["duration_mse"] = r.duration_mse ? json(*r.duration_mse) : json(nullptr);
  out["duration_events"] = r.duration_events;
  return out;
}

}  // namespace

MarkerSpace parse_marker_space(const std::string& json_text) {
  const json j = parse_json(json_text, "marker-space file");
  try {
    return detail::space_from_json(j);
  } catch (const json::exception& e) {
    throw ParseError(std::string("marker-space file: ") + e.what(), 0);
  }
}

MarkerSpace load_marker_space(const std::filesystem::path& path) {
  return parse_marker_space(read_file(path));
}

std::string marker_space_to_json(const MarkerSpace& space) {
  return detail::space_to_json(space).dump(2) + "\n";
}

Dataset parse_dataset(std::istream& in, const MarkerSpace& space, std::vector<std::string>* warnings) {
  Dataset ds{space, {}};
  std::vector<std::size_t> line_of;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed record: ") + e.what(), lineno);
    }
    try {
      EventSequence seq;
      seq.id = rec.at("id").is_string() ? rec.at("id").get<std::string>() : rec.at("id").dump();
      seq.profile = rec.value("profile", std::vector<double>{});
      seq.start = rec.value("start", 0.0);
      for (const auto& je : rec.at("events")) {
        Event ev;
        ev.t = je.at("t").get<double>();
        for (const auto& m : je.at("markers")) ev.markers.push_back(m.get<int>() - 1);
        if (je.contains("duration") && !je.at("duration").is_null()) ev.duration = je.at("duration").get<double>();
        seq.events.push_back(std::move(ev));
      }
      ds.sequences.push_back(std::move(seq));
      line_of.push_back(lineno);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid record: ") + e.what(), lineno);
    }
  }
  if (ds.sequences.empty() && warnings) warnings->push_back("dataset is empty");

  const auto violations = validate(ds);
  if (!violations.empty()) {
    std::map<std::string, std::size_t> line_by_id;
    for (std::size_t s = ds.sequences.size(); s-- > 0;) line_by_id[ds.sequences[s].id] = line_of[s];
    std::ostringstream msg;
    msg << violations.size() << " invalid entr" << (violations.size() == 1 ? "y" : "ies");
    const std::size_t first_line = line_by_id[violations.front().sequence_id];
    for (const auto& v : violations) {
      msg << "\n  line " << line_by_id[v.sequence_id] << ", sequence '" << v.sequence_id << "'";
      if (v.event_index) msg << ", event " << *v.event_index + 1;
      msg << " [" << v.rule << "]: " << v.message;
    }
    throw ParseError(msg.str(), first_line);
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& data, const MarkerSpace& space,
                     std::vector<std::string>* warnings) {
  std::ifstream in(data);
  if (!in) throw ConfigError("cannot open dataset file " + data.string());
  return parse_dataset(in, space, warnings);
}

Dataset load_dataset(const std::filesystem::path& data, const std::filesystem::path& space,
                     std::vector<std::string>* warnings) {
  return load_dataset(data, load_marker_space(space), warnings);
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  for (const auto& seq : dataset.sequences) {
    json events = json::array();
    for (const auto& ev : seq.events) {
      json markers = json::array();
      for (int m : ev.markers) markers.push_back(m + 1);
      json je = {{"t", ev.t}, {"markers", markers}};
      if (ev.duration) je["duration"] = *ev.duration;
      events.push_back(std::move(je));
    }
    json rec = {{"id", seq.id}, {"profile", seq.profile}, {"start", seq.start}, {"events", events}};
    out << rec.dump() << '\n';
  }
}

std::string model_to_json(const Model& model) {
  json j = {{"format", "fmpp-model"},
            {"version", kModelFormatVersion},
            {"space", detail::space_to_json(model.space)},
            {"kernel", detail::kernel_to_json(model.kernel)},
            {"features",
             {{"mode", std::string(to_string(model.mode))},
              {"within_dimension_only", model.within_dimension_only},
              {"standardizer", {{"mean", model.standardizer.mean}, {"scale", model.standardizer.scale}}}}},
            {"regularization", {{"lambda", model.regularization.lambda}, {"alpha", model.regularization.alpha}}},
            {"training",
             {{"solver", model.info.solver},
              {"iterations", model.info.iterations},
              {"inner_iterations", model.info.inner_iterations},
              {"final_objective", model.info.final_objective},
              {"converged", model.info.converged}}},
            {"theta", detail::matrix_to_json(model.theta.values())}};
  return j.dump(1) + "\n";
}

Model parse_model(const std::string& json_text) {
  const json j = parse_json(json_text, "model file");
  try {
    if (j.value("format", std::string{}) != "fmpp-model") throw ConfigError("not a model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw ConfigError("model file version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(kModelFormatVersion) + ")");
    }
    MarkerSpace space = detail::space_from_json(j.at("space"));
    Model m = Model::zero(space, detail::kernel_from_json(j.at("kernel")));
    const auto& jf = j.at("features");
    m.mode = parse_feature_mode(jf.value("mode", std::string("history")));
    m.within_dimension_only = jf.value("within_dimension_only", false);
    m.standardizer.mean = jf.at("standardizer").at("mean").get<std::vector<double>>();
    m.standardizer.scale = jf.at("standardizer").at("scale").get<std::vector<double>>();
    if (!m.standardizer.empty() &&
        (m.standardizer.mean.size() != static_cast<std::size_t>(space.profile_dim()) ||
         m.standardizer.scale.size() != m.standardizer.mean.size())) {
      throw ConfigError("standardizer length differs from the profile dimension");
    }
    m.regularization.lambda = j.at("regularization").at("lambda").get<double>();
    m.regularization.alpha = j.at("regularization").at("alpha").get<double>();
    const auto& jt = j.at("training");
    m.info.solver = jt.value("solver", std::string{});
    m.info.iterations = jt.value("iterations", 0);
    m.info.inner_iterations = jt.value("inner_iterations", 0);
    m.info.final_objective = jt.value("final_objective", 0.0);
    m.info.converged = jt.value("converged", false);
    m.theta = ParamMatrix(space, detail::matrix_from_json(j.at("theta"), space.total_marker_dim(), space.feature_dim()));
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what(), 0);
  }
}

Model load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ConfigError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ConfigError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string prediction_to_json(const MarkerSpace& space, const std::string& sequence_id, double t,
                               const Prediction& p) {
  json dims = json::array();
  for (std::size_t z = 0; z < p.probabilities.size(); ++z) {
    const int zi = static_cast<int>(z);
    json ranked = json::array();
    for (const auto& r : p.ranked[z]) {
      ranked.push_back({{"marker", r.marker + 1}, {"label", space.value_label(zi, r.marker)}, {"p", r.probability}});
    }
    std::vector<double> probs(p.probabilities[z].data(), p.probabilities[z].data() + p.probabilities[z].size());
    dims.push_back({{"name", space.dimension(zi).name},
                    {"argmax", p.argmax[z] + 1},
                    {"probabilities", probs},
                    {"top_k", ranked}});
  }
  json joint = json::array();
  for (const auto& c : p.joint) {
    json markers = json::array();
    for (int m : c.markers) markers.push_back(m + 1);
    joint.push_back({{"markers", markers}, {"p", c.probability}});
  }
  return json{{"id", sequence_id}, {"t", t}, {"dimensions", dims}, {"joint_top_k", joint}}.dump();
}

std::string report_to_json(const MarkerSpace& space, const EvalReport& r) {
  json j = report_json(space, r);
  j["format"] = "fmpp-eval-report";
  j["version"] = kReportFormatVersion;
  return j.dump(2) + "\n";
}

std::string report_to_text(const MarkerSpace& space, const EvalReport& r) {
  std::ostringstream os;
  os << "events: " << r.events << "\n";
  for (std::size_t z = 0; z < r.accuracy.size(); ++z) {
    os << "AC[" << space.dimension(static_cast<int>(z)).name << "]: " << fixed(r.accuracy[z]) << "\n";
  }
  os << "AC[joint]: " << fixed(r.joint_accuracy) << "\n";
  os << "top-K precision (K = 1.." << r.joint_top_k.size() << ")\n";
  for (std::size_t z = 0; z < r.top_k.size(); ++z) {
    os << "  " << space.dimension(static_cast<int>(z)).name << ":";
    for (double v : r.top_k[z]) os << ' ' << fixed(v);
    os << "\n";
  }
  os << "  joint:";
  for (double v : r.joint_top_k) os << ' ' << fixed(v);
  os << "\n";
  if (r.duration_mse) {
    os << "duration MSE: " << fixed(*r.duration_mse) << " over " << r.duration_events << " events\n";
  }
  return os.str();
}

std::string top_k_csv(const MarkerSpace& space, const EvalReport& r) {
  std::ostringstream os;
  os << "k";
  for (std::size_t z = 0; z < r.top_k.size(); ++z) os << ',' << space.dimension(static_cast<int>(z)).name;
  os << ",joint\n" << std::setprecision(17);
  for (std::size_t k = 0; k < r.joint_top_k.size(); ++k) {
    os << k + 1;
    for (const auto& curve : r.top_k) os << ',' << curve[k];
    os << ',' << r.joint_top_k[k] << '\n';
  }
  return os.str();
}

std::string cv_report_to_json(const MarkerSpace& space, const CrossValidationReport& r) {
  json dims = json::array();
  for (std::size_t z = 0; z < r.accuracy.size(); ++z) {
    json curve = json::array();
    for (const auto& s : r.top_k[z]) curve.push_back(summary_json(s));
    dims.push_back({{"name", space.dimension(static_cast<int>(z)).name},
                    {"accuracy", summary_json(r.accuracy[z])},
                    {"top_k", curve}});
  }
  json joint_curve = json::array();
  for (const auto& s : r.joint_top_k) joint_curve.push_back(summary_json(s));
  json folds = json::array();
  for (const auto& f : r.per_fold) folds.push_back(report_json(space, f));
  json j = {{"format", "fmpp-cv-report"},
            {"version", kReportFormatVersion},
            {"folds", r.folds},
            {"seed", r.seed},
            {"dimensions", dims},
            {"joint_accuracy", summary_json(r.joint_accuracy)},
            {"joint_top_k", joint_curve},
            {"per_fold", folds}};
  j["duration_mse"] = r.duration_mse ? summary_json(*r.duration_mse) : json(nullptr);
  return j.dump(2) + "\n";
}

std::string cv_report_to_text(const MarkerSpace& space, const CrossValidationReport& r) {
  std::ostringstream os;
  os << r.folds << "-fold cross validation (seed " << r.seed << ")\n";
  auto line = [&](const std::string& name, const MetricSummary& s) {
    os << name << ": " << fixed(s.mean) << " +/- " << fixed(s.stddev) << "\n";
  };
  for (std::size_t z = 0; z < r.accuracy.size(); ++z) {
    line("AC[" + space.dimension(static_cast<int>(z)).name + "]", r.accuracy[z]);
  }
  line("AC[joint]", r.joint_accuracy);
  for (std::size_t k = 0; k < r.joint_top_k.size(); ++k) {
    line("top-" + std::to_string(k + 1) + "[joint]", r.joint_top_k[k]);
  }
  if (r.duration_mse) line("duration MSE", *r.duration_mse);
  return os.str();
}

std::string sparsity_table(const std::vector<ColumnStat>& stats) {
  std::size_t width = 6;
  for (const auto& s : stats) width = std::max(width, s.label.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "column" << "  " << std::right << std::setw(14) << "l2_norm"
     << "  active\n";
  std::size_t active = 0;
  for (const auto& s : stats) {
    os << std::left << std::setw(static_cast<int>(width)) << s.label << "  " << std::right << std::setw(14)
       << std::scientific << std::setprecision(6) << s.norm << std::defaultfloat << "  " << (s.active ? "yes" : "no")
       << "\n";
    active += s.active ? 1 : 0;
  }
  os << active << " of " << stats.size() << " columns active\n";
  return os.str();
}

std::string param_count_table(const MarkerSpace& space) {
  const ParamCounts c = param_counts(space);
  std::ostringstream os;
  os << "dimensions:";
  for (const auto& d : space.dimensions()) os << ' ' << d.name << '(' << d.cardinality << ')';
  os << "\nprofile features: " << space.profile_dim() << "\n";
  os << std::left << std::setw(12) << "" << std::right << std::setw(14) << "state dim" << std::setw(22)
     << "parameters" << "\n";
  os << std::left << std::setw(12) << "decoupled" << std::right << std::setw(14) << c.decoupled_state
     << std::setw(22) << c.decoupled << "\n";
  os << std::left << std::setw(12) << "coupled" << std::right << std::setw(14) << c.coupled_state << std::setw(22)
     << c.coupled << "\n";
  return os.str();
}

std::string trace_csv(const ConvergenceTrace& trace, bool with_timing) {
  std::ostringstream os;
  trace.write_csv(os, with_timing);
  return os.str();
}

}  // namespace fmpp::io
