#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "fmpp/generator.hpp"
#include "fmpp/io.hpp"
#include "support.hpp"

using namespace fmpp;
using fmpp::testing::random_dataset;
using fmpp::testing::random_matrix;

namespace {

const char* kSpaceJson = R"({
  "format": "fmpp-marker-space",
  "version": 1,
  "profile_dim": 1,
  "time_unit": "years",
  "dimensions": [
    {"name": "company", "cardinality": 3, "labels": ["a", "b", "c"]},
    {"name": "duration", "cardinality": 2,
     "duration": {"intervals": [[0, 1], [1, null]], "midpoints": [0.5, 3]}}
  ]
})";

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fmpp_test_io_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("marker space round trip") {
  const auto space = io::parse_marker_space(kSpaceJson);
  CHECK(space.num_dims() == 2);
  CHECK(space.profile_dim() == 1);
  CHECK(space.time_unit() == "years");
  CHECK(space.dimension(0).labels[2] == "c");
  REQUIRE(space.duration_dim() == std::optional<int>(1));
  CHECK(std::isinf(space.dimension(1).duration->upper[1]));
  CHECK(io::parse_marker_space(io::marker_space_to_json(space)) == space);
  CHECK_THROWS_AS(io::parse_marker_space("{\"dimensions\": ["), ParseError);
  CHECK_THROWS_AS(io::parse_marker_space(R"({"version": 2, "dimensions": [{"cardinality": 2}]})"), ConfigError);
}

TEST_CASE("dataset parsing") {
  const auto space = io::parse_marker_space(kSpaceJson);

  SUBCASE("two well-formed lines") {
    std::istringstream in(
        R"({"id": "u1", "profile": [0.5], "events": [{"t": 1.0, "markers": [1, 1], "duration": 0.5}]})"
        "\n\n"
        R"({"id": 7, "profile": [1.5], "start": 0.5, "events": [{"t": 1.0, "markers": [3, 2]}, {"t": 4.0, "markers": [2, 1]}]})"
        "\n");
    const auto ds = io::parse_dataset(in, space);
    REQUIRE(ds.sequences.size() == 2);
    CHECK(ds.sequences[0].events[0].markers == std::vector<int>{0, 0});
    CHECK(ds.sequences[0].events[0].duration == std::optional<double>(0.5));
    CHECK(ds.sequences[1].id == "7");
    CHECK(ds.sequences[1].start == 0.5);
    CHECK(ds.sequences[1].events[0].markers == std::vector<int>{2, 1});
  }
  SUBCASE("marker out of range names line and dimension") {
    std::istringstream in(
        R"({"id": "u1", "profile": [0.5], "events": [{"t": 1.0, "markers": [1, 1]}]})"
        "\n"
        R"({"id": "u2", "profile": [0.5], "events": [{"t": 1.0, "markers": [4, 1]}]})"
        "\n");
    try {
      io::parse_dataset(in, space);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      const std::string what = e.what();
      CHECK(what.find("line 2") != std::string::npos);
      CHECK(what.find("company") != std::string::npos);
    }
  }
  SUBCASE("violations are collected") {
    std::istringstream in(
        R"({"id": "u1", "profile": [0.5, 1], "events": [{"t": 1.0, "markers": [1, 1]}]})"
        "\n"
        R"({"id": "u2", "profile": [0.5], "events": [{"t": 2.0, "markers": [1, 1]}, {"t": 1.0, "markers": [1, 1]}]})"
        "\n");
    try {
      io::parse_dataset(in, space);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
      const std::string what = e.what();
      CHECK(what.find("2 invalid entries") != std::string::npos);
      CHECK(what.find("line 2") != std::string::npos);
    }
  }
  SUBCASE("syntax error reports the line") {
    std::istringstream in("{\"id\": \"u1\", \"events\": []}\n{not json\n");
    try {
      io::parse_dataset(in, space);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("empty file is an empty dataset with a warning") {
    std::istringstream in("");
    std::vector<std::string> warnings;
    const auto ds = io::parse_dataset(in, space, &warnings);
    CHECK(ds.sequences.empty());
    CHECK(warnings.size() == 1);
  }
}

TEST_CASE("dataset write and read back") {
  std::mt19937_64 rng(71);
  const auto space = MarkerSpace::from_cardinalities({4, 3}, 2);
  const auto ds = random_dataset(rng, space, 15, 6);
  std::ostringstream out;
  io::write_dataset(out, ds);
  std::istringstream in(out.str());
  const auto back = io::parse_dataset(in, space);
  REQUIRE(back.sequences.size() == ds.sequences.size());
  for (std::size_t s = 0; s < ds.sequences.size(); ++s) {
    CHECK(back.sequences[s].id == ds.sequences[s].id);
    CHECK(back.sequences[s].profile == ds.sequences[s].profile);
    REQUIRE(back.sequences[s].events.size() == ds.sequences[s].events.size());
    for (std::size_t i = 0; i < ds.sequences[s].events.size(); ++i) {
      CHECK(back.sequences[s].events[i].t == ds.sequences[s].events[i].t);
      CHECK(back.sequences[s].events[i].markers == ds.sequences[s].events[i].markers);
    }
  }
}

TEST_CASE("model round trip is bit exact") {
  std::mt19937_64 rng(72);
  const auto space = io::parse_marker_space(kSpaceJson);
  Model m = Model::zero(space, KernelSpec{KernelForm::MCP, 1.0, 0.37});
  m.theta.values() = random_matrix(rng, 5, 6);
  m.standardizer = Standardizer{{0.1234567890123}, {1.0 / 3.0}};
  m.regularization = {2.5, 0.3};
  m.info = {"admm", 12, 340, 17.25, true};
  m.mode = FeatureMode::History;
  const auto back = io::parse_model(io::model_to_json(m));
  CHECK(back.theta.values() == m.theta.values());
  CHECK(back.kernel.bandwidth == m.kernel.bandwidth);
  CHECK(back.kernel.form == KernelForm::MCP);
  CHECK(back.standardizer.mean == m.standardizer.mean);
  CHECK(back.standardizer.scale == m.standardizer.scale);
  CHECK(back.regularization.alpha == 0.3);
  CHECK(back.info.solver == "admm");
  CHECK(back.info.inner_iterations == 340);
  CHECK(back.space == space);
  CHECK(io::model_to_json(back) == io::model_to_json(m));

  EventSequence probe{"p", {0.7}, 0.0, {{1.0, {1, 0}, 0.2}, {2.5, {2, 1}, 4.0}}};
  const auto a = predict_after_last_event(m, probe, 3);
  const auto b = predict_after_last_event(back, probe, 3);
  for (std::size_t z = 0; z < 2; ++z) CHECK(a.probabilities[z] == b.probabilities[z]);
}

TEST_CASE("model version mismatch is rejected") {
  const auto json = io::model_to_json(Model::zero(MarkerSpace::from_cardinalities({2, 2}, 0)));
  auto bumped = json;
  const auto pos = bumped.find("\"version\": 1");
  REQUIRE(pos != std::string::npos);
  bumped.replace(pos, 12, "\"version\": 2");
  CHECK_THROWS_AS(io::parse_model(bumped), ConfigError);
  CHECK_THROWS_AS(io::parse_model("{\"format\": \"something-else\", \"version\": 1}"), ConfigError);
}

TEST_CASE("atomic writes") {
  const auto dir = scratch_dir("atomic");
  const auto path = dir / "out.txt";
  io::write_file_atomic(path, "first");
  io::write_file_atomic(path, "second");
  CHECK(io::read_file(path) == "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS_AS(io::write_file_atomic(dir / "missing" / "x.txt", "x"), ConfigError);
  CHECK_THROWS_AS(io::read_file(dir / "nope"), ConfigError);
}

TEST_CASE("generator determinism and shape") {
  GeneratorSpec spec{.space = io::parse_marker_space(kSpaceJson), .sequences = 20, .min_length = 2, .max_length = 6, .seed = 73};
  const auto a = generate(spec);
  const auto b = generate(spec);
  std::ostringstream sa, sb;
  io::write_dataset(sa, a.dataset);
  io::write_dataset(sb, b.dataset);
  CHECK(sa.str() == sb.str());
  CHECK(io::truth_to_json(spec.space, a) == io::truth_to_json(spec.space, b));
  CHECK(validate(a.dataset).empty());
  for (const auto& seq : a.dataset.sequences) {
    CHECK(seq.events.size() >= 2);
    CHECK(seq.events.size() <= 6);
    for (std::size_t i = 0; i < seq.events.size(); ++i) {
      const auto& ev = seq.events[i];
      REQUIRE(ev.duration.has_value());
      // the realized duration lies in the sampled class and is the next gap
      CHECK(spec.space.dimension(1).duration->classify(*ev.duration) == std::optional<int>(ev.markers[1]));
      if (i + 1 < seq.events.size()) CHECK(seq.events[i + 1].t == doctest::Approx(ev.t + *ev.duration));
    }
  }
  spec.seed = 74;
  std::ostringstream sc;
  io::write_dataset(sc, generate(spec).dataset);
  CHECK(sc.str() != sa.str());
}

TEST_CASE("generator with zero truth gives uniform markers") {
  GeneratorSpec spec{.space = MarkerSpace::from_cardinalities({4, 2}, 1),
                     .kernel = {KernelForm::MCP},
                     .theta = Eigen::MatrixXd::Zero(6, 7),
                     .sequences = 1000,
                     .min_length = 8,
                     .max_length = 14,
                     .seed = 75};
  const auto data = generate(spec);
  const double n = static_cast<double>(data.dataset.num_events());
  REQUIRE(n >= 10000);
  for (int z = 0; z < 2; ++z) {
    const int card = spec.space.cardinality(z);
    const double p = 1.0 / card;
    std::vector<double> counts(static_cast<std::size_t>(card), 0.0);
    for (const auto& seq : data.dataset.sequences) {
      for (const auto& ev : seq.events) counts[static_cast<std::size_t>(ev.markers[static_cast<std::size_t>(z)])] += 1.0;
    }
    for (double c : counts) CHECK(std::abs(c / n - p) <= 5.0 * std::sqrt(p * (1.0 - p) / n));
  }
}

TEST_CASE("generator self-transition calibration") {
  // weight 4 on "previous value k -> next value k" with HP decay 1 puts
  // more than 0.8 of the mass on repeating the previous marker
  const auto space = MarkerSpace::from_cardinalities({4}, 0);
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(4, 4);
  for (int k = 0; k < 4; ++k) theta(k, k) = 4.0;
  GeneratorSpec spec{.space = space, .kernel = {KernelForm::HP, 1.0}, .theta = theta,
                     .sequences = 300, .min_length = 10, .max_length = 10, .seed = 76};
  const auto data = generate(spec);
  double same = 0.0, total = 0.0;
  for (const auto& seq : data.dataset.sequences) {
    for (std::size_t i = 1; i < seq.events.size(); ++i) {
      same += seq.events[i].markers[0] == seq.events[i - 1].markers[0];
      total += 1.0;
    }
  }
  CHECK(same / total > 0.8);
}

TEST_CASE("generator spec parsing") {
  const std::string text = std::string(R"({"space": )") + kSpaceJson +
                           R"(, "kernel": {"form": "hp", "decay": 0.5}, "sequences": 5,
                              "length": {"min": 2, "max": 3}, "seed": 9,
                              "truth": {"active_fraction": 0.5, "magnitude": 2}})";
  const auto spec = io::parse_generator_spec(text);
  CHECK(spec.sequences == 5);
  CHECK(spec.kernel.form == KernelForm::HP);
  CHECK(spec.kernel.decay == 0.5);
  CHECK(spec.max_length == 3);
  CHECK(spec.seed == 9u);
  CHECK(spec.active_fraction == 0.5);
  CHECK_THROWS_AS(io::parse_generator_spec("{\"sequences\": 3}"), ParseError);
  CHECK_THROWS_AS(io::parse_generator_spec(std::string(R"({"space": )") + kSpaceJson + R"(, "length": {"min": 4, "max": 2}})"),
                  ConfigError);
}

TEST_CASE("reports") {
  const auto space = MarkerSpace::from_cardinalities({57, 10, 4}, 0);
  const auto table = io::param_count_table(space);
  CHECK(table.find("2280") != std::string::npos);
  CHECK(table.find("71") != std::string::npos);

  EvalReport r;
  r.events = 10;
  r.accuracy = {0.5, 0.25, 1.0};
  r.joint_accuracy = 0.2;
  r.top_k = {{0.5, 0.7}, {0.25, 0.5}, {1.0, 1.0}};
  r.joint_top_k = {0.2, 0.3};
  const auto csv = io::top_k_csv(space, r);
  CHECK(csv.rfind("k,dim1,dim2,dim3,joint\n", 0) == 0);
  CHECK(csv.find("\n2,") != std::string::npos);
  CHECK(io::report_to_json(space, r).find("fmpp-eval-report") != std::string::npos);
  CHECK(io::report_to_json(space, r) == io::report_to_json(space, r));

  ConvergenceTrace trace{"admm", {{0, 10.0, 1.0, 0.5, 0}, {1, 9.0, 0.1, 0.75, 3}}, std::nullopt};
  const auto timed = io::trace_csv(trace, true);
  const auto untimed = io::trace_csv(trace, false);
  CHECK(timed.rfind("iteration,objective,primal_residual,wall_seconds,inner_iterations\n", 0) == 0);
  CHECK(timed.find("0.75") != std::string::npos);
  CHECK(untimed.find("0.75") == std::string::npos);
  CHECK(trace.total_inner_iterations() == 3);
  CHECK(trace.max_increase() == -1.0);
}

}  // TEST_SUITE
