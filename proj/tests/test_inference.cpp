#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fmpp/generator.hpp"
#include "fmpp/inference.hpp"
#include "support.hpp"

using namespace fmpp;
using fmpp::testing::make_sequence;
using fmpp::testing::random_dataset;
using fmpp::testing::random_matrix;

namespace {

/// Every tuple with its product probability, best first, ties by tuple.
std::vector<JointCandidate> enumerate_joint(const std::vector<Eigen::VectorXd>& probs) {
  std::vector<JointCandidate> all{{{}, 1.0}};
  for (const auto& p : probs) {
    std::vector<JointCandidate> next;
    for (const auto& c : all) {
      for (Eigen::Index k = 0; k < p.size(); ++k) {
        auto m = c.markers;
        m.push_back(static_cast<int>(k));
        next.push_back({m, 0.0});
      }
    }
    all = std::move(next);
  }
  for (auto& c : all) {
    c.probability = 1.0;
    for (std::size_t z = 0; z < probs.size(); ++z) c.probability *= probs[z][c.markers[z]];
  }
  std::stable_sort(all.begin(), all.end(), [](const JointCandidate& a, const JointCandidate& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.markers < b.markers;
  });
  return all;
}

Eigen::VectorXd normalized(Eigen::VectorXd v) { return v / v.sum(); }

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("zero model predicts uniformly with the lowest index") {
  const auto space = MarkerSpace::from_cardinalities({3, 2}, 1);
  const auto model = Model::zero(space);
  const auto seq = make_sequence("a", {0.4}, {{1.0, {2, 1}}});
  const auto p = predict_after_last_event(model, seq, 3);
  REQUIRE(p.probabilities.size() == 2);
  for (Eigen::Index k = 0; k < 3; ++k) CHECK(p.probabilities[0][k] == doctest::Approx(1.0 / 3.0));
  CHECK(p.argmax == std::vector<int>{0, 0});
  CHECK(p.ranked[0][1].marker == 1);
  REQUIRE(p.joint.size() == 3);
  CHECK(p.joint[0].markers == std::vector<int>{0, 0});
  CHECK(p.joint[1].markers == std::vector<int>{0, 1});
  CHECK(p.joint[2].markers == std::vector<int>{1, 0});
}

TEST_CASE("dominant self-transition weight") {
  const auto space = MarkerSpace::from_cardinalities({4}, 0);
  auto model = Model::zero(space, KernelSpec{KernelForm::HP, 1.0});
  for (int k = 0; k < 4; ++k) model.theta.values()(k, k) = 5.0;
  for (int last = 0; last < 4; ++last) {
    const auto seq = make_sequence("a", {}, {{1.0, {(last + 1) % 4}}, {2.0, {last}}});
    CHECK(predict_after_last_event(model, seq, 1).argmax[0] == last);
  }
}

TEST_CASE("prediction errors") {
  const auto space = MarkerSpace::from_cardinalities({3, 2}, 1);
  const auto model = Model::zero(space);
  CHECK_THROWS_AS(predict_next(model, make_sequence("a", {0.4, 1.0}, {}), 0.0, 1), ConfigError);
  CHECK_THROWS_AS(predict_next(model, make_sequence("a", {0.4}, {{1.0, {0}}}), 2.0, 1), ConfigError);
  CHECK_THROWS_AS(predict_next(model, make_sequence("a", {0.4}, {{1.0, {0, 0}}}), 0.5, 1), DomainError);
}

TEST_CASE("ranking ties go to the lowest index") {
  Eigen::VectorXd p(5);
  p << 0.1, 0.3, 0.1, 0.3, 0.2;
  const auto r = rank_markers(p, 0);
  std::vector<int> order;
  for (const auto& m : r) order.push_back(m.marker);
  CHECK(order == std::vector<int>{1, 3, 4, 0, 2});
  CHECK(rank_markers(p, 2).size() == 2);
  CHECK(rank_markers(p, 10).size() == 5);
}

TEST_CASE("joint top-K matches explicit enumeration") {
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<int> card(2, 5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Eigen::VectorXd> probs;
    const int dims = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int z = 0; z < dims; ++z) {
      Eigen::VectorXd v = random_matrix(rng, card(rng), 1).array().exp();
      // force ties now and then
      if (trial % 3 == 0) v = v.array().round() + 1.0;
      probs.push_back(normalized(v));
    }
    const auto brute = enumerate_joint(probs);
    for (int k : {1, 3, 7}) {
      const auto got = top_joint(probs, k);
      REQUIRE(got.size() == std::min<std::size_t>(static_cast<std::size_t>(k), brute.size()));
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].markers == brute[i].markers);
        CHECK(got[i].probability == brute[i].probability);
      }
    }
  }
}

TEST_CASE("joint top-1 is the product of marginal top-1") {
  std::mt19937_64 rng(62);
  const auto space = MarkerSpace::from_cardinalities({4, 3, 2}, 2);
  for (int trial = 0; trial < 30; ++trial) {
    auto model = Model::zero(space, KernelSpec{KernelForm::MCP});
    model.theta.values() = random_matrix(rng, 9, 11);
    const auto seq = random_dataset(rng, space, 1, 5).sequences[0];
    const auto p = predict_after_last_event(model, seq, 5);
    double product = 1.0;
    for (int z = 0; z < 3; ++z) {
      CHECK(std::abs(p.probabilities[static_cast<std::size_t>(z)].sum() - 1.0) <= 1e-10);
      CHECK(p.ranked[static_cast<std::size_t>(z)].front().marker == p.argmax[static_cast<std::size_t>(z)]);
      product *= p.ranked[static_cast<std::size_t>(z)].front().probability;
    }
    CHECK(p.joint.front().probability == doctest::Approx(product).epsilon(1e-14));
    CHECK(p.joint.front().markers == p.argmax);
  }
}

TEST_CASE("argmax is invariant to a shift of all logits") {
  std::mt19937_64 rng(63);
  const auto space = MarkerSpace::from_cardinalities({5}, 3);
  for (int trial = 0; trial < 30; ++trial) {
    auto model = Model::zero(space);
    model.theta.values() = random_matrix(rng, 5, 8);
    const auto seq = random_dataset(rng, space, 1, 4).sequences[0];
    const auto before = predict_after_last_event(model, seq, 5);
    model.theta.values().rowwise() += random_matrix(rng, 1, 8, 4.0).row(0);
    const auto after = predict_after_last_event(model, seq, 5);
    CHECK(before.argmax == after.argmax);
    for (std::size_t i = 0; i < 5; ++i) CHECK(before.ranked[0][i].marker == after.ranked[0][i].marker);
  }
}

TEST_CASE("evaluate: zero model on balanced data stays within binomial bounds") {
  GeneratorSpec spec{.space = MarkerSpace::from_cardinalities({4, 4}, 1),
                     .kernel = {KernelForm::HP},
                     .theta = Eigen::MatrixXd::Zero(8, 9),
                     .sequences = 200,
                     .min_length = 5,
                     .max_length = 15,
                     .seed = 64};
  const auto data = generate(spec);
  const auto r = evaluate(Model::zero(spec.space), data.dataset, 5);
  REQUIRE(r.events >= 1000);
  const double n = static_cast<double>(r.events);
  const double sigma = std::sqrt(0.25 * 0.75 / n);
  for (double ac : r.accuracy) CHECK(std::abs(ac - 0.25) <= 5.0 * sigma);
  for (const auto& curve : r.top_k) {
    CHECK(curve[3] == 1.0);  // K = M_z
    for (std::size_t k = 1; k < curve.size(); ++k) CHECK(curve[k] >= curve[k - 1]);
  }
  CHECK(r.joint_accuracy <= *std::min_element(r.accuracy.begin(), r.accuracy.end()));
  for (std::size_t k = 1; k < r.joint_top_k.size(); ++k) CHECK(r.joint_top_k[k] >= r.joint_top_k[k - 1]);
}

TEST_CASE("evaluate: perfect model on deterministic data") {
  std::vector<double> lower{0.0, 1.0, 3.0};
  std::vector<double> upper{1.0, 3.0, 6.0};
  const MarkerSpace space({{"c", 3, {}, std::nullopt}, {"d", 3, {}, DurationBins{lower, upper, {0.5, 2.0, 4.5}}}}, 0);
  // next markers repeat the previous ones
  Dataset ds{space, {}};
  for (int s = 0; s < 6; ++s) {
    EventSequence seq{"s" + std::to_string(s), {}, 0.0, {}};
    for (int i = 0; i < 5; ++i) {
      seq.events.push_back(Event{1.0 + 2.0 * i, {s % 3, s % 3}, 0.5 + 2.0 * (s % 3) + 0.25});
    }
    ds.sequences.push_back(seq);
  }
  auto model = Model::zero(space, KernelSpec{KernelForm::HP, 0.1});
  for (int k = 0; k < 6; ++k) model.theta.values()(k, k) = 50.0;
  const auto r_all = evaluate(model, ds, 3);
  CHECK(r_all.top_k[0][2] == 1.0);
  // every event with history is right; a first event is right only when
  // its marker is the tie winner 0
  std::size_t first_correct = 0;
  for (const auto& seq : ds.sequences) first_correct += seq.events[0].markers[0] == 0;
  const double expected = (static_cast<double>(ds.num_events()) - static_cast<double>(ds.sequences.size() - first_correct)) /
                          static_cast<double>(ds.num_events());
  CHECK(r_all.accuracy[0] == doctest::Approx(expected));
  REQUIRE(r_all.duration_mse.has_value());
  CHECK(r_all.duration_events == ds.num_events());
}

TEST_CASE("evaluate errors and purity") {
  const auto space = MarkerSpace::from_cardinalities({3, 2}, 0);
  CHECK_THROWS_AS(evaluate(Model::zero(space), Dataset{space, {}}, 5), ConfigError);
  CHECK_THROWS_AS(evaluate(Model::zero(space), Dataset{MarkerSpace::from_cardinalities({3, 3}, 0), {}}, 5), ConfigError);
  std::mt19937_64 rng(65);
  const auto ds = random_dataset(rng, space, 20, 5);
  auto model = Model::zero(space);
  model.theta.values() = random_matrix(rng, 5, 5);
  const auto a = evaluate(model, ds, 4);
  const auto b = evaluate(model, ds, 4);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.top_k == b.top_k);
  CHECK(a.joint_top_k == b.joint_top_k);
}

TEST_CASE("fold assignment") {
  const auto folds = assign_folds(23, 5, 7);
  std::vector<int> sizes(5, 0);
  for (int f : folds) ++sizes[static_cast<std::size_t>(f)];
  CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
  CHECK(assign_folds(23, 5, 7) == folds);
  CHECK(assign_folds(23, 5, 8) != folds);
  CHECK_THROWS_AS(assign_folds(3, 5, 0), ConfigError);
  CHECK_THROWS_AS(assign_folds(10, 1, 0), ConfigError);
}

TEST_CASE("cross validation") {
  GeneratorSpec spec{.space = MarkerSpace::from_cardinalities({3, 2}, 1),
                     .kernel = {KernelForm::HP},
                     .active_fraction = 0.5,
                     .magnitude = 2.0,
                     .sequences = 40,
                     .min_length = 3,
                     .max_length = 8,
                     .seed = 66};
  const auto data = generate(spec);
  TrainConfig cfg{.kernel = spec.kernel, .regularization = {1.0, 0.5}};

  SUBCASE("identical sequences give identical folds") {
    Dataset same{spec.space, std::vector<EventSequence>(10, data.dataset.sequences[0])};
    const auto r = cross_validate(same, 10, cfg, 1);
    for (const auto& fold : r.per_fold) CHECK(fold.accuracy == r.per_fold[0].accuracy);
    CHECK(r.joint_accuracy.stddev == 0.0);
  }
  SUBCASE("deterministic and independent of jobs") {
    const auto a = cross_validate(data.dataset, 4, cfg, 3, 3, 1);
    const auto b = cross_validate(data.dataset, 4, cfg, 3, 3, 4);
    REQUIRE(a.per_fold.size() == 4);
    for (std::size_t f = 0; f < 4; ++f) {
      CHECK(a.per_fold[f].accuracy == b.per_fold[f].accuracy);
      CHECK(a.per_fold[f].top_k == b.per_fold[f].top_k);
    }
    CHECK(a.joint_accuracy.mean == b.joint_accuracy.mean);
    double mean0 = 0.0;
    for (const auto& f : a.per_fold) mean0 += f.accuracy[0];
    CHECK(a.accuracy[0].mean == doctest::Approx(mean0 / 4.0));
  }
  SUBCASE("too few sequences") {
    Dataset few{spec.space, {data.dataset.sequences[0], data.dataset.sequences[1]}};
    CHECK_THROWS_AS(cross_validate(few, 3, cfg, 0), ConfigError);
  }
}

TEST_CASE("two-fold CV stays close to the single-split estimate") {
  GeneratorSpec spec{.space = MarkerSpace::from_cardinalities({3, 3}, 2),
                     .kernel = {KernelForm::HP},
                     .active_fraction = 0.4,
                     .magnitude = 3.0,
                     .sequences = 300,
                     .min_length = 3,
                     .max_length = 8,
                     .seed = 67};
  const auto data = generate(spec);
  TrainConfig cfg{.kernel = spec.kernel, .regularization = {1.0, 0.5}};
  const auto cv = cross_validate(data.dataset, 2, cfg, 5);
  // oracle: one explicit split, the same fold assignment, trained on fold 0
  const auto fold = assign_folds(data.dataset.sequences.size(), 2, 5);
  Dataset train{spec.space, {}}, test{spec.space, {}};
  for (std::size_t s = 0; s < fold.size(); ++s) (fold[s] == 1 ? test : train).sequences.push_back(data.dataset.sequences[s]);
  const auto single = evaluate(fit_model(train, cfg).model, test);
  CHECK(std::abs(cv.joint_accuracy.mean - single.joint_accuracy) <= 0.05);
  // and against the full-data training accuracy
  const auto full = evaluate(fit_model(data.dataset, cfg).model, data.dataset);
  CHECK(std::abs(cv.joint_accuracy.mean - full.joint_accuracy) <= 0.05);
}

TEST_CASE("sparsity inspection") {
  const auto space = MarkerSpace::from_cardinalities({2, 2}, 1);
  const auto zero = inspect_sparsity(Model::zero(space));
  REQUIRE(zero.size() == 5);
  for (const auto& c : zero) {
    CHECK(c.norm == 0.0);
    CHECK_FALSE(c.active);
  }
  CHECK(zero[0].column == 0);
  CHECK(zero[0].label == "profile[0]");

  auto model = Model::zero(space);
  model.theta.values()(0, 3) = 3.0;
  model.theta.values()(1, 3) = 4.0;
  model.theta.values()(2, 1) = 1.0;
  const auto s = inspect_sparsity(model);
  CHECK(s[0].column == 3);
  CHECK(s[0].norm == doctest::Approx(5.0));
  CHECK(s[0].label == "dim2=1");
  CHECK(s[1].column == 1);
  CHECK(s[2].column == 0);
  CHECK(s[2].active == false);

  GeneratorSpec spec{.space = MarkerSpace::from_cardinalities({3, 2}, 2), .sequences = 30, .seed = 68};
  const auto data = generate(spec);
  TrainConfig cfg{.regularization = RegularizationSpec::from_weights(0.0, 1e6)};
  const auto fitted = fit_model(data.dataset, cfg);
  for (const auto& c : inspect_sparsity(fitted.model)) CHECK_FALSE(c.active);
}

TEST_CASE("sparse truth is recovered") {
  GeneratorSpec spec{.space = MarkerSpace::from_cardinalities({4, 3}, 8),
                     .kernel = {KernelForm::HP},
                     .active_fraction = 0.2,
                     .magnitude = 1.5,
                     .sequences = 400,
                     .min_length = 4,
                     .max_length = 10,
                     .seed = 69};
  const auto data = generate(spec);
  REQUIRE(!data.active_columns.empty());
  TrainConfig cfg{.kernel = spec.kernel, .regularization = {20.0, 0.2}};
  const auto fitted = fit_model(data.dataset, cfg);
  std::size_t found = 0;
  for (const auto& c : inspect_sparsity(fitted.model)) {
    if (c.active && std::find(data.active_columns.begin(), data.active_columns.end(), c.column) != data.active_columns.end()) {
      ++found;
    }
  }
  CHECK(static_cast<double>(found) >= 0.8 * static_cast<double>(data.active_columns.size()));
}

}  // TEST_SUITE
