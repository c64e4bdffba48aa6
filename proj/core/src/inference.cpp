#include "fmpp/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <queue>
#include <random>
#include <set>
#include <thread>

namespace fmpp {

namespace {

constexpr std::uint64_t kMaxJointEnumeration = 5'000'000;

bool joint_before(const JointCandidate& a, const JointCandidate& b) {
  if (a.probability != b.probability) return a.probability > b.probability;
  return a.markers < b.markers;
}

void check_compatible(const Model& model, const MarkerSpace& space) {
  if (model.space.cardinalities() != space.cardinalities() ||
      model.space.profile_dim() != space.profile_dim()) {
    throw ConfigError("model and data use different marker spaces");
  }
}

MetricSummary summarize(const std::vector<double>& xs) {
  MetricSummary s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace

std::vector<RankedMarker> rank_markers(const Eigen::VectorXd& probabilities, int k) {
  std::vector<RankedMarker> out;
  out.reserve(static_cast<std::size_t>(probabilities.size()));
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    out.push_back({static_cast<int>(i), probabilities[i]});
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedMarker& a, const RankedMarker& b) {
    return a.probability > b.probability;
  });
  if (k > 0 && static_cast<std::size_t>(k) < out.size()) out.resize(static_cast<std::size_t>(k));
  return out;
}

std::vector<JointCandidate> top_joint(const std::vector<Eigen::VectorXd>& probabilities, int k) {
  const std::size_t dims = probabilities.size();
  if (dims == 0) return {};
  std::vector<std::vector<RankedMarker>> ranked;
  std::uint64_t total = 1;
  for (const auto& p : probabilities) {
    ranked.push_back(rank_markers(p, 0));
    total = total > kMaxJointEnumeration ? total : total * static_cast<std::uint64_t>(p.size());
  }
  const std::uint64_t want = k > 0 ? std::min<std::uint64_t>(static_cast<std::uint64_t>(k), total) : total;
  if (k <= 0 && total > kMaxJointEnumeration) throw ConfigError("joint marker space too large to enumerate");

  auto make = [&](const std::vector<int>& ranks) {
    JointCandidate c;
    c.markers.resize(dims);
    c.probability = 1.0;
    for (std::size_t z = 0; z < dims; ++z) {
      const auto& r = ranked[z][static_cast<std::size_t>(ranks[z])];
      c.markers[z] = r.marker;
    }
    // Multiply in dimension order so equal tuples of probabilities give equal products.
    for (std::size_t z = 0; z < dims; ++z) c.probability *= probabilities[z][c.markers[z]];
    return c;
  };

  // Best-first search over rank tuples. Every tuple with probability at
  // least that of the k-th popped one is reached through predecessors that
  // are at least as probable, so draining ties gives an exact top-k.
  using Entry = std::pair<JointCandidate, std::vector<int>>;
  auto cmp = [](const Entry& a, const Entry& b) { return joint_before(b.first, a.first); };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
  std::set<std::vector<int>> seen;
  std::vector<int> origin(dims, 0);
  heap.push({make(origin), origin});
  seen.insert(origin);

  std::vector<JointCandidate> out;
  double cutoff = -1.0;
  while (!heap.empty()) {
    if (out.size() >= want && heap.top().first.probability < cutoff) break;
    Entry top = heap.top();
    heap.pop();
    out.push_back(top.first);
    if (out.size() == want) cutoff = top.first.probability;
    for (std::size_t z = 0; z < dims; ++z) {
      auto next = top.second;
      if (static_cast<std::size_t>(++next[z]) >= ranked[z].size()) continue;
      if (seen.insert(next).second) heap.push({make(next), next});
    }
  }
  std::sort(out.begin(), out.end(), joint_before);
  if (out.size() > want) out.resize(static_cast<std::size_t>(want));
  return out;
}

Prediction predict_from_features(const Model& model, const Eigen::VectorXd& features, int k) {
  Prediction p;
  const int dims = model.space.num_dims();
  for (int z = 0; z < dims; ++z) {
    p.probabilities.push_back(marker_probabilities(model.theta.block(z), features));
    p.ranked.push_back(rank_markers(p.probabilities.back(), k));
    p.argmax.push_back(p.ranked.back().front().marker);
  }
  p.joint = top_joint(p.probabilities, k);
  return p;
}

Prediction predict_next(const Model& model, const EventSequence& seq, double t, int k) {
  if (seq.profile.size() != static_cast<std::size_t>(model.space.profile_dim())) {
    throw ConfigError("sequence '" + seq.id + "' has a profile of the wrong length for this model");
  }
  for (const auto& ev : seq.events) {
    if (ev.markers.size() != static_cast<std::size_t>(model.space.num_dims())) {
      throw ConfigError("sequence '" + seq.id + "' has events of the wrong arity for this model");
    }
  }
  const FeatureVector f = build_features(seq, model.space, model.feature_options(), t, seq.events.size());
  return predict_from_features(model, f.values, k);
}

Prediction predict_after_last_event(const Model& model, const EventSequence& seq, int k) {
  const double t = seq.events.empty() ? seq.start : seq.events.back().t;
  return predict_next(model, seq, t, k);
}

EvalReport evaluate(const Model& model, const Dataset& test, int k_max) {
  check_compatible(model, test.space);
  if (k_max < 1) throw ConfigError("k_max must be at least 1");
  const auto& space = model.space;
  const int dims = space.num_dims();
  EvalReport r;
  r.events = test.num_events();
  if (r.events == 0) throw ConfigError("evaluation needs at least one event");

  std::vector<std::size_t> correct(static_cast<std::size_t>(dims), 0);
  std::size_t joint_correct = 0;
  std::vector<std::vector<std::size_t>> hits(static_cast<std::size_t>(dims),
                                             std::vector<std::size_t>(static_cast<std::size_t>(k_max), 0));
  std::vector<std::size_t> joint_hits(static_cast<std::size_t>(k_max), 0);
  const auto duration_dim = space.duration_dim();
  double squared_error = 0.0;

  const FeatureOptions opts = model.feature_options();
  Eigen::VectorXd f(space.feature_dim());
  for (const auto& seq : test.sequences) {
    for (std::size_t i = 0; i < seq.events.size(); ++i) {
      build_features_into(seq, space, opts, prediction_time(seq, i), i, f);
      const Prediction p = predict_from_features(model, f, k_max);
      const auto& truth = seq.events[i].markers;
      bool all = true;
      for (int z = 0; z < dims; ++z) {
        const auto zz = static_cast<std::size_t>(z);
        const bool ok = p.argmax[zz] == truth[zz];
        all = all && ok;
        correct[zz] += ok ? 1 : 0;
        const auto& ranked = p.ranked[zz];
        for (std::size_t pos = 0; pos < ranked.size(); ++pos) {
          if (ranked[pos].marker == truth[zz]) {
            for (std::size_t kk = pos; kk < static_cast<std::size_t>(k_max); ++kk) ++hits[zz][kk];
            break;
          }
        }
      }
      joint_correct += all ? 1 : 0;
      for (std::size_t pos = 0; pos < p.joint.size(); ++pos) {
        if (p.joint[pos].markers == truth) {
          for (std::size_t kk = pos; kk < static_cast<std::size_t>(k_max); ++kk) ++joint_hits[kk];
          break;
        }
      }
      if (duration_dim && seq.events[i].duration) {
        const auto& bins = *space.dimension(*duration_dim).duration;
        const double predicted = bins.midpoints[static_cast<std::size_t>(p.argmax[static_cast<std::size_t>(*duration_dim)])];
        const double err = predicted - *seq.events[i].duration;
        squared_error += err * err;
        ++r.duration_events;
      }
    }
  }
  const auto n = static_cast<double>(r.events);
  for (int z = 0; z < dims; ++z) {
    const auto zz = static_cast<std::size_t>(z);
    r.accuracy.push_back(static_cast<double>(correct[zz]) / n);
    std::vector<double> curve;
    for (auto h : hits[zz]) curve.push_back(static_cast<double>(h) / n);
    r.top_k.push_back(std::move(curve));
  }
  r.joint_accuracy = static_cast<double>(joint_correct) / n;
  for (auto h : joint_hits) r.joint_top_k.push_back(static_cast<double>(h) / n);
  if (r.duration_events > 0) r.duration_mse = squared_error / static_cast<double>(r.duration_events);
  return r;
}

std::vector<int> assign_folds(std::size_t sequences, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("cross validation needs at least 2 folds");
  if (sequences < static_cast<std::size_t>(folds)) {
    throw ConfigError("cross validation needs at least as many sequences (" + std::to_string(sequences) +
                      ") as folds (" + std::to_string(folds) + ")");
  }
  std::vector<std::size_t> order(sequences);
  for (std::size_t i = 0; i < sequences; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = sequences; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<int> fold(sequences, 0);
  for (std::size_t pos = 0; pos < sequences; ++pos) fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  return fold;
}

CrossValidationReport cross_validate(const Dataset& dataset, int folds, const TrainConfig& cfg,
                                     std::uint64_t seed, int k_max, int jobs) {
  const std::vector<int> fold_of = assign_folds(dataset.sequences.size(), folds, seed);
  CrossValidationReport report;
  report.folds = folds;
  report.seed = seed;
  report.per_fold.resize(static_cast<std::size_t>(folds));

  auto run_fold = [&](int f) {
    Dataset train{dataset.space, {}};
    Dataset test{dataset.space, {}};
    for (std::size_t s = 0; s < dataset.sequences.size(); ++s) {
      (fold_of[s] == f ? test : train).sequences.push_back(dataset.sequences[s]);
    }
    const TrainOutput trained = fit_model(train, cfg);
    if (test.num_events() == 0) throw ConfigError("fold " + std::to_string(f) + " has no test events");
    report.per_fold[static_cast<std::size_t>(f)] = evaluate(trained.model, test, k_max);
  };

  const int workers = std::clamp(jobs, 1, folds);
  if (workers == 1) {
    for (int f = 0; f < folds; ++f) run_fold(f);
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int f = next++; f < folds; f = next++) run_fold(f);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  const auto& first = report.per_fold.front();
  const std::size_t dims = first.accuracy.size();
  auto collect = [&](auto getter) {
    std::vector<double> xs;
    for (const auto& r : report.per_fold) xs.push_back(getter(r));
    return summarize(xs);
  };
  for (std::size_t z = 0; z < dims; ++z) {
    report.accuracy.push_back(collect([z](const EvalReport& r) { return r.accuracy[z]; }));
    std::vector<MetricSummary> curve;
    for (std::size_t k = 0; k < first.top_k[z].size(); ++k) {
      curve.push_back(collect([z, k](const EvalReport& r) { return r.top_k[z][k]; }));
    }
    report.top_k.push_back(std::move(curve));
  }
  report.joint_accuracy = collect([](const EvalReport& r) { return r.joint_accuracy; });
  for (std::size_t k = 0; k < first.joint_top_k.size(); ++k) {
    report.joint_top_k.push_back(collect([k](const EvalReport& r) { return r.joint_top_k[k]; }));
  }
  std::vector<double> mses;
  for (const auto& r : report.per_fold) {
    if (r.duration_mse) mses.push_back(*r.duration_mse);
  }
  if (!mses.empty()) report.duration_mse = summarize(mses);
  return report;
}

std::vector<ColumnStat> inspect_sparsity(const Model& model) {
  const auto& theta = model.theta.values();
  std::vector<ColumnStat> out;
  for (Eigen::Index j = 0; j < theta.cols(); ++j) {
    const double norm = theta.col(j).norm();
    out.push_back({static_cast<int>(j), model.space.column_label(static_cast<int>(j)), norm, norm > 1e-8});
  }
  std::stable_sort(out.begin(), out.end(), [](const ColumnStat& a, const ColumnStat& b) { return a.norm > b.norm; });
  return out;
}

}  // namespace fmpp
