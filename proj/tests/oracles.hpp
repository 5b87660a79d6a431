#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "cyclecast/models.hpp"
#include "cyclecast/random.hpp"

namespace testing {

using Mat5 = std::array<std::array<long double, 5>, 5>;

inline Mat5 covariance5(const Eigen::MatrixXd& x) {
  Mat5 c{};
  const int n = static_cast<int>(x.rows());
  std::array<long double, 5> mean{};
  for (int j = 0; j < 5; ++j) {
    for (int r = 0; r < n; ++r) mean[j] += x(r, j);
    mean[j] /= n;
  }
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      long double acc = 0;
      for (int r = 0; r < n; ++r) acc += (x(r, i) - mean[i]) * (x(r, j) - mean[j]);
      c[i][j] = acc / (n - 1);
    }
  }
  return c;
}

// Determinant by Gaussian elimination with partial pivoting.
template <std::size_t N>
long double det(std::array<std::array<long double, N>, N> a) {
  long double d = 1;
  for (std::size_t k = 0; k < N; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < N; ++i) {
      if (std::fabs(a[i][k]) > std::fabs(a[p][k])) p = i;
    }
    if (a[p][k] == 0) return 0;
    if (p != k) {
      std::swap(a[p], a[k]);
      d = -d;
    }
    d *= a[k][k];
    for (std::size_t i = k + 1; i < N; ++i) {
      long double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < N; ++j) a[i][j] -= f * a[k][j];
    }
  }
  return d;
}

inline long double char_poly(const Mat5& c, long double lambda) {
  Mat5 m = c;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) m[i][j] = (i == j ? lambda : 0) - c[i][j];
  }
  return det(m);
}

// Largest eigenpair of a 5x5 covariance from its characteristic polynomial:
// scan down from the trace for the first sign change, bisect, then take the
// null vector of (C - lambda I) by fixing its first coordinate.
inline std::pair<long double, std::array<long double, 5>> brute_force_leading(const Mat5& c) {
  long double trace = 0;
  for (int i = 0; i < 5; ++i) trace += c[i][i];
  long double hi = trace * 1.0001L + 1e-12L;
  long double step = hi / 20000;
  long double lo = hi - step;
  while (lo > 0 && (char_poly(c, lo) > 0) == (char_poly(c, hi) > 0)) {
    hi = lo;
    lo -= step;
  }
  for (int it = 0; it < 200; ++it) {
    long double mid = (lo + hi) / 2;
    if ((char_poly(c, mid) > 0) == (char_poly(c, hi) > 0)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const long double lambda = (lo + hi) / 2;

  std::array<std::array<long double, 4>, 4> a{};
  std::array<long double, 4> b{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) a[i][j] = c[i + 1][j + 1] - (i == j ? lambda : 0);
    b[i] = -c[i + 1][0];
  }
  // Cramer's rule keeps the oracle free of any shared solver.
  const long double d = det(a);
  std::array<long double, 5> v{1, 0, 0, 0, 0};
  for (int k = 0; k < 4; ++k) {
    auto ak = a;
    for (int i = 0; i < 4; ++i) ak[i][k] = b[i];
    v[k + 1] = det(ak) / d;
  }
  long double norm = 0;
  for (auto x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return {lambda, v};
}

// ---------------------------------------------------------------------------
// Finite-difference gradient checks. Relative error is
// ||analytic - numeric|| / max(||analytic||, ||numeric||, 1e-12) over all parameters.

inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

struct GradientCase {
  Eigen::MatrixXd x;
  std::vector<cyclecast::PhaseLabel> y;
  double l2 = 0.0;
  std::optional<std::array<double, cyclecast::kNumPhases>> class_weights;
};

inline GradientCase random_gradient_case(cyclecast::Rng& rng, int n, int d) {
  GradientCase c;
  c.x.resize(n, d);
  for (int r = 0; r < n; ++r) {
    for (int j = 0; j < d; ++j) c.x(r, j) = rng.normal();
  }
  for (int r = 0; r < n; ++r) {
    c.y.push_back(cyclecast::phase_from_index(static_cast<std::size_t>(rng.uniform(0, 4)) % 4));
  }
  c.l2 = rng.bernoulli(0.5) ? rng.uniform(0, 0.5) : 0.0;
  if (rng.bernoulli(0.3)) {
    c.class_weights = std::array<double, 4>{rng.uniform(0.5, 2), rng.uniform(0.5, 2), rng.uniform(0.5, 2),
                                            rng.uniform(0.5, 2)};
  }
  return c;
}

// Central differences with step h on every MLR parameter.
inline double mlr_gradient_error(cyclecast::Rng& rng, double h = 1e-5) {
  using namespace cyclecast;
  const int d = 2 + static_cast<int>(rng.uniform(0, 5));
  const int n = 5 + static_cast<int>(rng.uniform(0, 20));
  auto c = random_gradient_case(rng, n, d);
  MlrModel m = MlrModel::zeros(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < m.weights.size(); ++i) m.weights.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < m.bias.size(); ++i) m.bias(i) = rng.normal();

  auto g = mlr_loss_gradient(m, c.x, c.y, c.l2, c.class_weights);
  std::vector<double> analytic, numeric;
  auto probe = [&](double& param, double grad) {
    const double saved = param;
    param = saved + h;
    double up = mlr_loss_gradient(m, c.x, c.y, c.l2, c.class_weights).loss;
    param = saved - h;
    double down = mlr_loss_gradient(m, c.x, c.y, c.l2, c.class_weights).loss;
    param = saved;
    analytic.push_back(grad);
    numeric.push_back((up - down) / (2 * h));
  };
  for (Eigen::Index i = 0; i < m.weights.size(); ++i) probe(m.weights.data()[i], g.grad_weights.data()[i]);
  for (Eigen::Index i = 0; i < m.bias.size(); ++i) probe(m.bias(i), g.grad_bias(i));
  return relative_error(analytic, numeric);
}

// Central differences on every weight and bias of a small random MLP, with a
// fixed dropout mask on the last hidden layer.
inline double mlp_gradient_error(cyclecast::Rng& rng, double h = 1e-5) {
  using namespace cyclecast;
  const int d = 2 + static_cast<int>(rng.uniform(0, 4));
  const int n = 4 + static_cast<int>(rng.uniform(0, 10));
  auto c = random_gradient_case(rng, n, d);
  TrainConfig cfg;
  cfg.hidden_layers = 1 + static_cast<std::size_t>(rng.uniform(0, 4));
  cfg.hidden_units = 3 + static_cast<std::size_t>(rng.uniform(0, 6));
  cfg.seed = rng.next_u64();
  MlpModel m = MlpModel::init(static_cast<std::size_t>(d), cfg);
  for (auto& layer : m.layers) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = 0.1 * rng.normal();
  }
  Eigen::MatrixXd mask = dropout_mask(n, static_cast<Eigen::Index>(cfg.hidden_units), 0.2, rng);
  const Eigen::MatrixXd* mask_ptr = rng.bernoulli(0.5) ? &mask : nullptr;

  auto g = mlp_loss_gradient(m, c.x, c.y, c.l2, mask_ptr, c.class_weights);
  std::vector<double> analytic, numeric;
  auto probe = [&](double& param, double grad) {
    const double saved = param;
    param = saved + h;
    double up = mlp_loss_gradient(m, c.x, c.y, c.l2, mask_ptr, c.class_weights).loss;
    param = saved - h;
    double down = mlp_loss_gradient(m, c.x, c.y, c.l2, mask_ptr, c.class_weights).loss;
    param = saved;
    analytic.push_back(grad);
    numeric.push_back((up - down) / (2 * h));
  };
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    auto& layer = m.layers[l];
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
      probe(layer.weights.data()[i], g.grads[l].weights.data()[i]);
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) probe(layer.bias(i), g.grads[l].bias(i));
  }
  return relative_error(analytic, numeric);
}

// Panel with one common factor plus noise; the leading eigenvalue is well separated.
inline Eigen::MatrixXd factor_panel(cyclecast::Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    double f = rng.normal();
    for (int c = 0; c < cols; ++c) m(r, c) = (0.5 + 0.2 * c) * f + 0.7 * rng.normal();
  }
  return m;
}

}  // namespace testing
