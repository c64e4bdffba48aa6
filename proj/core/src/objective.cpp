#include "fmpp/objective.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace fmpp {

namespace {

constexpr Eigen::Index kChunkRows = 1024;
constexpr Eigen::Index kParallelRows = 8 * kChunkRows;

struct Partial {
  double value = 0.0;
  Eigen::MatrixXd gradient;
};

void check_shapes(const Eigen::MatrixXd& theta, const TrainingMatrix& tm) {
  if (theta.rows() != tm.param_rows() || theta.cols() != tm.feature_dim()) {
    throw ConfigError("parameter matrix is " + std::to_string(theta.rows()) + "x" +
                      std::to_string(theta.cols()) + ", training data needs " +
                      std::to_string(tm.param_rows()) + "x" + std::to_string(tm.feature_dim()));
  }
}

Partial chunk_contribution(const Eigen::MatrixXd& theta, const TrainingMatrix& tm,
                           Eigen::Index begin, Eigen::Index end, bool with_gradient) {
  Partial out;
  if (with_gradient) out.gradient = Eigen::MatrixXd::Zero(theta.rows(), theta.cols());
  const auto n = end - begin;
  const auto features = tm.features.middleRows(begin, n);
  for (int z = 0; z < tm.num_dims(); ++z) {
    const int off = tm.block_offset(z);
    const int card = tm.cardinalities[z];
    Eigen::MatrixXd logits = features * theta.middleRows(off, card).transpose();  // n x card
    for (Eigen::Index r = 0; r < n; ++r) {
      auto row = logits.row(r);
      const double mx = row.maxCoeff();
      const int target = tm.targets(begin + r, z);
      const double shifted_target = row(target) - mx;
      row.array() = (row.array() - mx).exp();
      const double sum = row.sum();
      const double term = std::log(sum) - shifted_target;
      if (!std::isfinite(term) || !std::isfinite(mx)) {
        const auto& o = tm.origins.empty() ? RowOrigin{} : tm.origins[begin + r];
        throw NumericError("non-finite loss at training row " + std::to_string(begin + r) +
                           " (sequence " + std::to_string(o.sequence) + ", event " +
                           std::to_string(o.event) + ", dimension " + std::to_string(z) + ")");
      }
      out.value += term;
      if (with_gradient) {
        row /= sum;
        row(target) -= 1.0;
      }
    }
    if (with_gradient) out.gradient.middleRows(off, card).noalias() += logits.transpose() * features;
  }
  return out;
}

Partial reduce_pairwise(std::vector<Partial>& parts, std::size_t lo, std::size_t hi, bool with_gradient) {
  if (hi - lo == 1) return std::move(parts[lo]);
  const std::size_t mid = lo + (hi - lo) / 2;
  Partial left = reduce_pairwise(parts, lo, mid, with_gradient);
  Partial right = reduce_pairwise(parts, mid, hi, with_gradient);
  left.value += right.value;
  if (with_gradient) left.gradient += right.gradient;
  return left;
}

}  // namespace

RegularizationSpec RegularizationSpec::from_weights(double l1, double l2) {
  RegularizationSpec r;
  r.lambda = l1 + l2;
  r.alpha = r.lambda > 0.0 ? l1 / r.lambda : 0.5;
  r.validate();
  return r;
}

void RegularizationSpec::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be non-negative");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
}

int TrainingMatrix::param_rows() const {
  return std::accumulate(cardinalities.begin(), cardinalities.end(), 0);
}

int TrainingMatrix::block_offset(int z) const {
  return std::accumulate(cardinalities.begin(), cardinalities.begin() + z, 0);
}

TrainingMatrix TrainingMatrix::restrict_to_dimension(int z) const {
  TrainingMatrix out;
  out.features = features;
  out.targets = targets.col(z);
  out.cardinalities = {cardinalities.at(z)};
  out.origins = origins;
  return out;
}

TrainingMatrix TrainingMatrix::select_rows(const std::vector<Eigen::Index>& rows) const {
  TrainingMatrix out;
  out.cardinalities = cardinalities;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()), targets.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
    out.targets.row(static_cast<Eigen::Index>(i)) = targets.row(rows[i]);
    if (!origins.empty()) out.origins.push_back(origins[rows[i]]);
  }
  return out;
}

TrainingMatrix build_training_matrix(const Dataset& dataset, const FeatureOptions& opts) {
  opts.kernel.validate();
  const auto& space = dataset.space;
  const auto n = static_cast<Eigen::Index>(dataset.num_events());
  TrainingMatrix tm;
  tm.cardinalities = space.cardinalities();
  tm.features.resize(n, space.feature_dim());
  tm.targets.resize(n, space.num_dims());
  tm.origins.reserve(static_cast<std::size_t>(n));
  Eigen::VectorXd buffer(space.feature_dim());
  Eigen::Index row = 0;
  for (std::size_t s = 0; s < dataset.sequences.size(); ++s) {
    const auto& seq = dataset.sequences[s];
    for (std::size_t i = 0; i < seq.events.size(); ++i) {
      try {
        build_features_into(seq, space, opts, prediction_time(seq, i), i, buffer);
      } catch (const DomainError& e) {
        throw DomainError("training row " + std::to_string(row) + " (sequence '" + seq.id +
                          "', event " + std::to_string(i + 1) + "): " + e.what());
      }
      tm.features.row(row) = buffer.transpose();
      for (int z = 0; z < space.num_dims(); ++z) tm.targets(row, z) = seq.events[i].markers.at(z);
      tm.origins.push_back({s, i});
      ++row;
    }
  }
  return tm;
}

TrainingMatrix build_training_matrix(const Dataset& dataset, const KernelSpec& kernel) {
  return build_training_matrix(dataset, FeatureOptions{.kernel = kernel});
}

double loss_and_gradient(const Eigen::MatrixXd& theta, const TrainingMatrix& tm,
                         Eigen::MatrixXd* gradient) {
  check_shapes(theta, tm);
  const bool with_gradient = gradient != nullptr;
  const Eigen::Index n = tm.rows();
  if (n == 0) {
    if (with_gradient) *gradient = Eigen::MatrixXd::Zero(theta.rows(), theta.cols());
    return 0.0;
  }
  const auto chunks = static_cast<std::size_t>((n + kChunkRows - 1) / kChunkRows);
  std::vector<Partial> parts(chunks);
  auto run_chunk = [&](std::size_t c) {
    const Eigen::Index begin = static_cast<Eigen::Index>(c) * kChunkRows;
    parts[c] = chunk_contribution(theta, tm, begin, std::min(n, begin + kChunkRows), with_gradient);
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = std::min<std::size_t>({chunks, hw, 8});
  if (n < kParallelRows || workers < 2) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t c = next++; c < chunks; c = next++) run_chunk(c);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  Partial total = reduce_pairwise(parts, 0, chunks, with_gradient);
  if (with_gradient) *gradient = std::move(total.gradient);
  return total.value;
}

double loss(const Eigen::MatrixXd& theta, const TrainingMatrix& tm) {
  return loss_and_gradient(theta, tm, nullptr);
}

double loss(const ParamMatrix& theta, const TrainingMatrix& tm) { return loss(theta.values(), tm); }

Eigen::MatrixXd loss_gradient(const Eigen::MatrixXd& theta, const TrainingMatrix& tm) {
  Eigen::MatrixXd g;
  loss_and_gradient(theta, tm, &g);
  return g;
}

double penalty(const Eigen::MatrixXd& theta, const RegularizationSpec& reg) {
  double out = 0.0;
  if (reg.l1() > 0.0) out += reg.l1() * theta.cwiseAbs().sum();
  if (reg.l2() > 0.0) out += reg.l2() * theta.colwise().norm().sum();
  return out;
}

double regularized_objective(const Eigen::MatrixXd& theta, const TrainingMatrix& tm,
                             const RegularizationSpec& reg) {
  return loss(theta, tm) + penalty(theta, reg);
}

}  // namespace fmpp
