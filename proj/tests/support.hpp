#pragma once

// Shared fixtures and independent oracles for the unit tests.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fmpp/core.hpp"
#include "fmpp/objective.hpp"

namespace fmpp::testing {

inline EventSequence make_sequence(std::string id, std::vector<double> profile,
                                   std::vector<std::pair<double, std::vector<int>>> events) {
  EventSequence s{std::move(id), std::move(profile), 0.0, {}};
  for (auto& [t, m] : events) s.events.push_back(Event{t, m, std::nullopt});
  return s;
}

/// Random valid dataset: sequence lengths in [1, max_len], unit-ish gaps.
inline Dataset random_dataset(std::mt19937_64& rng, const MarkerSpace& space, int sequences, int max_len) {
  Dataset ds{space, {}};
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> gap(0.1, 2.0);
  std::uniform_int_distribution<int> len(1, max_len);
  for (int s = 0; s < sequences; ++s) {
    EventSequence seq;
    seq.id = "r" + std::to_string(s);
    for (int j = 0; j < space.profile_dim(); ++j) seq.profile.push_back(normal(rng));
    double t = 0.0;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      t += gap(rng);
      Event ev{t, {}, std::nullopt};
      for (int z = 0; z < space.num_dims(); ++z) {
        ev.markers.push_back(std::uniform_int_distribution<int>(0, space.cardinality(z) - 1)(rng));
      }
      seq.events.push_back(std::move(ev));
    }
    ds.sequences.push_back(std::move(seq));
  }
  return ds;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

/// Loss by explicit enumeration: for every row and dimension, sum exp over
/// all marker values and take -log of the target's normalized share.
inline double brute_force_loss(const Eigen::MatrixXd& theta, const TrainingMatrix& tm) {
  double total = 0.0;
  for (Eigen::Index r = 0; r < tm.rows(); ++r) {
    int offset = 0;
    for (int z = 0; z < tm.num_dims(); ++z) {
      const int card = tm.cardinalities[static_cast<std::size_t>(z)];
      double denom = 0.0;
      double numer = 0.0;
      for (int k = 0; k < card; ++k) {
        double logit = 0.0;
        for (Eigen::Index j = 0; j < tm.feature_dim(); ++j) logit += theta(offset + k, j) * tm.features(r, j);
        denom += std::exp(logit);
        if (k == tm.targets(r, z)) numer = std::exp(logit);
      }
      total -= std::log(numer / denom);
      offset += card;
    }
  }
  return total;
}

/// Central finite differences of the loss.
inline Eigen::MatrixXd finite_difference_gradient(const Eigen::MatrixXd& theta, const TrainingMatrix& tm,
                                                  double step = 1e-5) {
  Eigen::MatrixXd g(theta.rows(), theta.cols());
  Eigen::MatrixXd probe = theta;
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
      probe(i, j) = theta(i, j) + step;
      const double up = loss(probe, tm);
      probe(i, j) = theta(i, j) - step;
      const double down = loss(probe, tm);
      probe(i, j) = theta(i, j);
      g(i, j) = (up - down) / (2.0 * step);
    }
  }
  return g;
}

/// Minimizer of threshold*|x| + (x - r)^2 / 2 by scanning a grid.
inline double grid_min_scalar_l1(double r, double threshold, double grid_step = 1e-4) {
  const double span = std::abs(r) + 1.0;
  double best_x = 0.0;
  double best = threshold * 0.0 + 0.5 * r * r;
  for (double x = -span; x <= span; x += grid_step) {
    const double v = threshold * std::abs(x) + 0.5 * (x - r) * (x - r);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

/// Minimizer of threshold*||x|| + ||x - r||^2 / 2 along the ray x = rho r/||r||.
inline Eigen::VectorXd grid_min_radial(const Eigen::VectorXd& r, double threshold, double grid_step = 1e-4) {
  const double norm = r.norm();
  if (norm == 0.0) return Eigen::VectorXd::Zero(r.size());
  const Eigen::VectorXd dir = r / norm;
  double best_rho = 0.0;
  double best = 0.5 * norm * norm;
  for (double rho = 0.0; rho <= norm + 1.0; rho += grid_step) {
    const double v = threshold * rho + 0.5 * (rho * dir - r).squaredNorm();
    if (v < best) {
      best = v;
      best_rho = rho;
    }
  }
  return best_rho * dir;
}

}  // namespace fmpp::testing
