// fmpp: command-line front end.
//
//   fmpp synth   --spec FILE --out DIR
//   fmpp train   --data FILE --space FILE --out MODEL [training flags]
//   fmpp predict --model MODEL --data FILE [--at last-event|TIME] [--topk K]
//   fmpp eval    --model MODEL --data FILE [--topk K] [--out PREFIX]
//   fmpp cv      --data FILE --space FILE [--folds N] [--seed N] [--jobs N] [training flags]
//   fmpp inspect --model MODEL
//   fmpp params  --space FILE

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fmpp/generator.hpp"
#include "fmpp/inference.hpp"
#include "fmpp/io.hpp"

namespace fs = std::filesystem;
using namespace fmpp;

namespace {

struct TrainFlags {
  std::string data;
  std::string space;
  std::string kernel = "mcp";
  std::string solver = "softmax";
  double lambda = 0.0;
  double alpha = 0.5;
  double w = 1.0;
  std::string sigma = "1";
  std::string init = "zero";
  std::uint64_t seed = 0;
  std::string mode = "history";
  bool within_dimension = false;
  bool no_standardize = false;
  double penalty = 1.0;
  double step = 1.0;
  double backtrack = 0.8;
  std::optional<double> tolerance;
  std::optional<int> max_iter;
  double outer_tolerance = 0.01;
  int max_outer = 500;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--data", f.data, "dataset (JSON lines)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--space", f.space, "marker-space file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--kernel", f.kernel, "mpp, hp, scp or mcp")->capture_default_str();
  cmd->add_option("--solver", f.solver, "admm or softmax")->capture_default_str();
  cmd->add_option("--lambda", f.lambda, "overall penalty weight (the loss is a sum over events)")->capture_default_str();
  cmd->add_option("--alpha", f.alpha, "share of lambda on the l1 term")->capture_default_str();
  cmd->add_option("--w", f.w, "decay rate of the hp kernel")->capture_default_str();
  cmd->add_option("--sigma", f.sigma, "bandwidth of the mcp kernel, or 'auto'")->capture_default_str();
  cmd->add_option("--init", f.init, "zero or uniform")->capture_default_str();
  cmd->add_option("--seed", f.seed, "seed of the uniform init")->capture_default_str();
  cmd->add_option("--mode", f.mode, "history or current-state")->capture_default_str();
  cmd->add_flag("--within-dimension", f.within_dimension, "fit each dimension on its own markers only");
  cmd->add_flag("--no-standardize", f.no_standardize, "use raw profile features");
  cmd->add_option("--penalty", f.penalty, "ADMM penalty u")->capture_default_str();
  cmd->add_option("--step", f.step, "initial line-search step")->capture_default_str();
  cmd->add_option("--backtrack", f.backtrack, "line-search shrink factor")->capture_default_str();
  cmd->add_option("--tolerance", f.tolerance, "relative-change tolerance of the (inner) solver");
  cmd->add_option("--max-iter", f.max_iter, "iteration cap of the (inner) solver");
  cmd->add_option("--outer-tolerance", f.outer_tolerance, "ADMM outer tolerance")->capture_default_str();
  cmd->add_option("--max-outer", f.max_outer, "ADMM outer iteration cap")->capture_default_str();
}

TrainConfig make_config(const TrainFlags& f) {
  TrainConfig cfg;
  cfg.solver = parse_solver(f.solver);
  cfg.kernel.form = parse_kernel_form(f.kernel);
  cfg.kernel.decay = f.w;
  if (f.sigma == "auto") {
    cfg.sigma_auto = true;
  } else {
    try {
      std::size_t used = 0;
      cfg.kernel.bandwidth = std::stod(f.sigma, &used);
      if (used != f.sigma.size()) throw std::invalid_argument(f.sigma);
    } catch (const std::exception&) {
      throw ConfigError("--sigma expects a number or 'auto', got '" + f.sigma + "'");
    }
  }
  cfg.mode = parse_feature_mode(f.mode);
  cfg.within_dimension_only = f.within_dimension;
  cfg.standardize = !f.no_standardize;
  cfg.regularization = {f.lambda, f.alpha};
  cfg.regularization.validate();
  cfg.init = parse_init(f.init);
  cfg.seed = f.seed;

  cfg.softmax.initial_step = f.step;
  cfg.softmax.backtrack = f.backtrack;
  if (f.tolerance) cfg.softmax.tolerance = *f.tolerance;
  if (f.max_iter) cfg.softmax.max_iterations = *f.max_iter;

  cfg.admm.penalty = f.penalty;
  cfg.admm.inner.initial_step = f.step;
  cfg.admm.inner.backtrack = f.backtrack;
  if (f.tolerance) cfg.admm.inner.tolerance = *f.tolerance;
  if (f.max_iter) cfg.admm.inner.max_iterations = *f.max_iter;
  cfg.admm.tolerance = f.outer_tolerance;
  cfg.admm.max_outer = f.max_outer;
  return cfg;
}

Dataset load_data(const std::string& data, const MarkerSpace& space) {
  std::vector<std::string> warnings;
  Dataset ds = io::load_dataset(data, space, &warnings);
  for (const auto& w : warnings) std::cerr << "fmpp: warning: " << data << ": " << w << "\n";
  return ds;
}

int run_synth(const std::string& spec_path, const std::string& out_dir) {
  const GeneratorSpec spec = io::load_generator_spec(spec_path);
  const GeneratedData data = generate(spec);
  fs::create_directories(out_dir);
  std::ostringstream lines;
  io::write_dataset(lines, data.dataset);
  io::write_file_atomic(fs::path(out_dir) / "space.json", io::marker_space_to_json(spec.space));
  io::write_file_atomic(fs::path(out_dir) / "data.jsonl", lines.str());
  io::write_file_atomic(fs::path(out_dir) / "truth.json", io::truth_to_json(spec.space, data));
  std::cout << "wrote " << data.dataset.sequences.size() << " sequences (" << data.dataset.num_events()
            << " events) to " << out_dir << "\n";
  return 0;
}

int run_train(const TrainFlags& f, const std::string& out, std::string trace_path, bool timing) {
  TrainConfig cfg = make_config(f);
  const Dataset train = load_data(f.data, io::load_marker_space(f.space));
  if (train.num_events() == 0) throw ConfigError("training data has no events");
  if (trace_path.empty()) trace_path = out + ".trace.csv";

  ConvergenceTrace partial;
  partial.solver = f.solver;
  cfg.observer = [&partial](const TraceRow& row) { partial.rows.push_back(row); };
  auto fit = [&]() {
    try {
      return fit_model(train, cfg);
    } catch (const NumericError&) {
      io::write_file_atomic(trace_path, io::trace_csv(partial, timing));
      std::cerr << "fmpp: partial trace (" << partial.rows.size() << " rows) written to " << trace_path << "\n";
      throw;
    }
  };
  const TrainOutput result = fit();
  io::write_file_atomic(out, io::model_to_json(result.model));
  io::write_file_atomic(trace_path, io::trace_csv(result.trace, timing));
  const auto& info = result.model.info;
  std::cout << "solver " << info.solver << ": " << info.iterations << " iterations (" << info.inner_iterations
            << " inner), objective " << info.final_objective << (info.converged ? "" : " (not converged)") << "\n";
  if (result.trace.warning) std::cerr << "fmpp: warning: " << *result.trace.warning << "\n";
  return 0;
}

int run_predict(const std::string& model_path, const std::string& data, const std::string& at, int topk,
                const std::string& out) {
  const Model model = io::load_model(model_path);
  const Dataset ds = load_data(data, model.space);
  std::optional<double> fixed;
  if (at != "last-event") {
    try {
      std::size_t used = 0;
      fixed = std::stod(at, &used);
      if (used != at.size()) throw std::invalid_argument(at);
    } catch (const std::exception&) {
      throw ConfigError("--at expects 'last-event' or a time, got '" + at + "'");
    }
  }
  std::ostringstream os;
  for (const auto& seq : ds.sequences) {
    const double t = fixed ? *fixed : (seq.events.empty() ? seq.start : seq.events.back().t);
    os << io::prediction_to_json(model.space, seq.id, t, predict_next(model, seq, t, topk)) << "\n";
  }
  if (out.empty()) {
    std::cout << os.str();
  } else {
    io::write_file_atomic(out, os.str());
  }
  return 0;
}

int run_eval(const std::string& model_path, const std::string& data, int topk, const std::string& prefix) {
  const Model model = io::load_model(model_path);
  const Dataset ds = load_data(data, model.space);
  const EvalReport r = evaluate(model, ds, topk);
  std::cout << io::report_to_text(model.space, r);
  if (!prefix.empty()) {
    io::write_file_atomic(prefix + ".json", io::report_to_json(model.space, r));
    io::write_file_atomic(prefix + ".txt", io::report_to_text(model.space, r));
    io::write_file_atomic(prefix + ".topk.csv", io::top_k_csv(model.space, r));
  }
  return 0;
}

int run_cv(const TrainFlags& f, int folds, std::uint64_t seed, int jobs, int topk, const std::string& prefix) {
  const TrainConfig cfg = make_config(f);
  const MarkerSpace space = io::load_marker_space(f.space);
  const Dataset ds = load_data(f.data, space);
  const CrossValidationReport r = cross_validate(ds, folds, cfg, seed, topk, jobs);
  std::cout << io::cv_report_to_text(space, r);
  if (!prefix.empty()) {
    io::write_file_atomic(prefix + ".json", io::cv_report_to_json(space, r));
    io::write_file_atomic(prefix + ".txt", io::cv_report_to_text(space, r));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoupled learning of factorial marked point processes"};
  app.name("fmpp");
  app.require_subcommand(1);
  app.set_config("--config", "", "read flags from a TOML/INI file");

  std::string spec_path, out_dir;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset and its ground truth");
  synth->add_option("--spec", spec_path, "generator spec (JSON)")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", out_dir, "output directory")->required();

  TrainFlags train_flags;
  std::string model_out, trace_out;
  bool timing = false;
  auto* train = app.add_subcommand("train", "fit a model");
  add_train_flags(train, train_flags);
  train->add_option("--out", model_out, "model file to write")->required();
  train->add_option("--trace", trace_out, "convergence trace CSV (default MODEL.trace.csv)");
  train->add_flag("--timing", timing, "record wall-clock seconds in the trace");

  std::string model_in, data_in, at = "last-event", pred_out;
  int topk = 5;
  auto* predict = app.add_subcommand("predict", "predict the next markers of every sequence");
  predict->add_option("--model", model_in, "model file")->required()->check(CLI::ExistingFile);
  predict->add_option("--data", data_in, "sequences (JSON lines)")->required()->check(CLI::ExistingFile);
  predict->add_option("--at", at, "last-event or a time")->capture_default_str();
  predict->add_option("--topk", topk, "length of the ranked lists")->capture_default_str()->check(CLI::PositiveNumber);
  predict->add_option("--out", pred_out, "write JSON lines here instead of stdout");

  std::string eval_prefix;
  auto* eval = app.add_subcommand("eval", "score a model on a dataset");
  eval->add_option("--model", model_in, "model file")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data_in, "test sequences (JSON lines)")->required()->check(CLI::ExistingFile);
  eval->add_option("--topk", topk, "largest K of the top-K curves")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--out", eval_prefix, "write PREFIX.json, PREFIX.txt and PREFIX.topk.csv");

  TrainFlags cv_flags;
  int folds = 10, jobs = 1;
  std::uint64_t cv_seed = 0;
  std::string cv_prefix;
  auto* cv = app.add_subcommand("cv", "sequence-level k-fold cross validation");
  add_train_flags(cv, cv_flags);
  cv->add_option("--folds", folds, "number of folds")->capture_default_str();
  cv->add_option("--fold-seed", cv_seed, "seed of the fold assignment")->capture_default_str();
  cv->add_option("--jobs", jobs, "folds trained concurrently")->capture_default_str()->check(CLI::PositiveNumber);
  cv->add_option("--topk", topk, "largest K of the top-K curves")->capture_default_str()->check(CLI::PositiveNumber);
  cv->add_option("--out", cv_prefix, "write PREFIX.json and PREFIX.txt");

  auto* inspect = app.add_subcommand("inspect", "column norms of a trained model");
  inspect->add_option("--model", model_in, "model file")->required()->check(CLI::ExistingFile);

  std::string space_in;
  auto* params = app.add_subcommand("params", "decoupled versus coupled parameter counts");
  params->add_option("--space", space_in, "marker-space file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return run_synth(spec_path, out_dir);
    if (*train) return run_train(train_flags, model_out, trace_out, timing);
    if (*predict) return run_predict(model_in, data_in, at, topk, pred_out);
    if (*eval) return run_eval(model_in, data_in, topk, eval_prefix);
    if (*cv) {
      if (cv->count("--seed") > 0 && cv->count("--fold-seed") == 0) cv_seed = cv_flags.seed;
      return run_cv(cv_flags, folds, cv_seed, jobs, topk, cv_prefix);
    }
    if (*inspect) {
      std::cout << io::sparsity_table(inspect_sparsity(io::load_model(model_in)));
      return 0;
    }
    if (*params) {
      std::cout << io::param_count_table(io::load_marker_space(space_in));
      return 0;
    }
  } catch (const NumericError& e) {
    std::cerr << "fmpp: numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "fmpp: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
