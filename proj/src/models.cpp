#include "cyclecast/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "cyclecast/error.hpp"

namespace cyclecast {

namespace {

using Weights = std::optional<std::array<double, kNumPhases>>;

void check_training_input(const Eigen::MatrixXd& x, std::span<const PhaseLabel> y) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(Errc::LengthMismatch, "X has " + std::to_string(x.rows()) + " rows, y has " +
                                          std::to_string(y.size()));
  }
  if (y.empty() || x.cols() == 0) throw Error(Errc::Empty, "no training samples");
  if (!x.allFinite()) throw Error(Errc::DegenerateInput, "X has non-finite entries");
  bool varies = false;
  for (Eigen::Index j = 0; j < x.cols() && !varies; ++j) {
    varies = x.col(j).maxCoeff() > x.col(j).minCoeff();
  }
  if (!varies) throw Error(Errc::DegenerateInput, "every feature column is constant");
  std::set<PhaseLabel> classes(y.begin(), y.end());
  if (classes.size() < 2) throw Error(Errc::SingleClass, "training labels contain one phase only");
}

Eigen::VectorXd sample_weights(std::span<const PhaseLabel> y, const Weights& cw) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(y.size()));
  if (cw) {
    for (std::size_t i = 0; i < y.size(); ++i) w(static_cast<Eigen::Index>(i)) = (*cw)[phase_index(y[i])];
  }
  return w;
}

// Row-wise softmax of logits; returns probabilities and adds the weighted
// cross-entropy sum into `ce`.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits, std::span<const PhaseLabel> y,
                             const Eigen::VectorXd& w, double& ce) {
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  ce = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double hi = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - hi).exp().matrix();
    double sum = e.sum();
    p.row(i) = e / sum;
    double lse = hi + std::log(sum);
    ce += w(i) * (lse - logits(i, static_cast<Eigen::Index>(phase_index(y[static_cast<std::size_t>(i)]))));
  }
  return p;
}

Eigen::MatrixXd one_hot(std::span<const PhaseLabel> y) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(y.size()), kNumPhases);
  for (std::size_t i = 0; i < y.size(); ++i) {
    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(phase_index(y[i]))) = 1.0;
  }
  return out;
}

Eigen::MatrixXd affine(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w, const Eigen::VectorXd& b) {
  Eigen::MatrixXd out = x * w.transpose();
  out.rowwise() += b.transpose();
  return out;
}

PhaseDistribution row_distribution(const Eigen::MatrixXd& logits, Eigen::Index i) {
  std::array<double, kNumPhases> l{};
  for (std::size_t k = 0; k < kNumPhases; ++k) l[k] = logits(i, static_cast<Eigen::Index>(k));
  return softmax(l);
}

Eigen::MatrixXd as_row(std::span<const double> x) {
  Eigen::MatrixXd row(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) row(0, static_cast<Eigen::Index>(j)) = x[j];
  return row;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(Errc::ConfigError, "learning_rate must be positive");
  if (epochs < 1) throw Error(Errc::ConfigError, "epochs must be at least 1");
  if (l2 < 0.0) throw Error(Errc::ConfigError, "l2 must be non-negative");
  if (dropout < 0.0 || dropout >= 1.0) throw Error(Errc::ConfigError, "dropout must be in [0,1)");
  if (hidden_layers < 1 || hidden_units < 1) throw Error(Errc::ConfigError, "MLP needs hidden units");
  if (max_iterations < 1) throw Error(Errc::ConfigError, "max_iterations must be at least 1");
  if (!(svm_step > 0.0) || svm_epochs < 1) throw Error(Errc::ConfigError, "bad SVM schedule");
  if (calibration_fraction < 0.0 || calibration_fraction >= 1.0) {
    throw Error(Errc::ConfigError, "calibration_fraction must be in [0,1)");
  }
  if (class_weights) {
    for (double w : *class_weights) {
      if (!(w > 0.0)) throw Error(Errc::ConfigError, "class weights must be positive");
    }
  }
}

// ---------------------------------------------------------------------------
// MLR

MlrModel MlrModel::zeros(std::size_t dim) {
  MlrModel m;
  m.weights = Eigen::MatrixXd::Zero(kNumPhases, static_cast<Eigen::Index>(dim));
  m.bias = Eigen::VectorXd::Zero(kNumPhases);
  return m;
}

Eigen::MatrixXd MlrModel::logits(const Eigen::MatrixXd& x) const { return affine(x, weights, bias); }

MlrLossGradient mlr_loss_gradient(const MlrModel& model, const Eigen::MatrixXd& x,
                                  std::span<const PhaseLabel> y, double l2, const Weights& class_weights) {
  const double n = static_cast<double>(y.size());
  Eigen::VectorXd w = sample_weights(y, class_weights);
  double ce = 0.0;
  Eigen::MatrixXd p = softmax_rows(model.logits(x), y, w, ce);
  Eigen::MatrixXd d = (p - one_hot(y)).array().colwise() * (w.array() / n);

  MlrLossGradient out;
  out.loss = ce / n + 0.5 * l2 * model.weights.squaredNorm();
  out.grad_weights = d.transpose() * x + l2 * model.weights;
  out.grad_bias = d.colwise().sum().transpose();
  return out;
}

MlrModel train_mlr(const Eigen::MatrixXd& x, std::span<const PhaseLabel> y, const TrainConfig& cfg,
                   MlrTrainLog* log) {
  cfg.validate();
  check_training_input(x, y);
  MlrModel model = MlrModel::zeros(static_cast<std::size_t>(x.cols()));
  model.l2 = cfg.l2;

  constexpr double kArmijo = 1e-4;
  MlrTrainLog local;
  MlrLossGradient cur = mlr_loss_gradient(model, x, y, cfg.l2, cfg.class_weights);
  double step = 1.0;
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    local.loss_history.push_back(cur.loss);
    double g2 = cur.grad_weights.squaredNorm() + cur.grad_bias.squaredNorm();
    local.final_gradient_norm = std::sqrt(g2);
    if (local.final_gradient_norm < cfg.tolerance) {
      local.converged = true;
      break;
    }
    step = std::min(step * 2.0, 1e6);
    bool accepted = false;
    while (step > 1e-30) {
      MlrModel cand = model;
      cand.weights -= step * cur.grad_weights;
      cand.bias -= step * cur.grad_bias;
      MlrLossGradient next = mlr_loss_gradient(cand, x, y, cfg.l2, cfg.class_weights);
      if (next.loss <= cur.loss - kArmijo * step * g2) {
        model = std::move(cand);
        cur = std::move(next);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No representable descent step left; we are at the optimum to machine precision.
      local.converged = true;
      break;
    }
  }
  local.iterations = it;
  local.final_loss = cur.loss;
  if (log) *log = std::move(local);
  return model;
}

// ---------------------------------------------------------------------------
// SVM

Eigen::MatrixXd SvmModel::margins(const Eigen::MatrixXd& x) const { return affine(x, weights, bias); }

PhaseDistribution calibrated_distribution(std::span<const double, kNumPhases> margins, double temperature) {
  std::array<double, kNumPhases> l{};
  for (std::size_t k = 0; k < kNumPhases; ++k) l[k] = margins[k] / temperature;
  return softmax(l);
}

double fit_temperature(const Eigen::MatrixXd& margins, std::span<const PhaseLabel> y) {
  auto nll = [&](double log_beta) {
    double beta = std::exp(log_beta);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < margins.rows(); ++i) {
      Eigen::RowVectorXd z = beta * margins.row(i);
      double hi = z.maxCoeff();
      double lse = hi + std::log((z.array() - hi).exp().sum());
      acc += lse - z(static_cast<Eigen::Index>(phase_index(y[static_cast<std::size_t>(i)])));
    }
    return acc;
  };
  // Golden-section search over log(1/T) in [log 1e-3, log 1e3]; the NLL is
  // convex in 1/T and therefore unimodal in its logarithm.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(1e-3);
  double b = std::log(1e3);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = nll(c);
  double fd = nll(d);
  for (int i = 0; i < 200 && (b - a) > 1e-10; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = nll(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = nll(d);
    }
  }
  return 1.0 / std::exp(0.5 * (a + b));
}

namespace {

struct BinarySvm {
  Eigen::VectorXd w;
  double b = 0.0;
};

// Full-batch subgradient descent on (lambda/2)||w||^2 + mean hinge, keeping
// the best objective iterate.
BinarySvm fit_binary_svm(const Eigen::MatrixXd& x, const Eigen::VectorXd& s, double lambda,
                         double eta0, int epochs) {
  const double n = static_cast<double>(x.rows());
  BinarySvm cur{Eigen::VectorXd::Zero(x.cols()), 0.0};
  BinarySvm best = cur;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= epochs + 1; ++t) {
    Eigen::VectorXd m = (x * cur.w).array() + cur.b;
    Eigen::VectorXd slack = (1.0 - s.array() * m.array()).max(0.0);
    double obj = 0.5 * lambda * cur.w.squaredNorm() + slack.sum() / n;
    if (obj < best_obj) {
      best_obj = obj;
      best = cur;
    }
    if (t > epochs) break;
    Eigen::VectorXd coef = (slack.array() > 0.0).select(s, 0.0);
    Eigen::VectorXd gw = lambda * cur.w - (x.transpose() * coef) / n;
    double gb = -coef.sum() / n;
    double eta = eta0 / std::sqrt(static_cast<double>(t));
    cur.w -= eta * gw;
    cur.b -= eta * gb;
  }
  return best;
}

SvmModel fit_one_vs_rest(const Eigen::MatrixXd& x, std::span<const PhaseLabel> y, const TrainConfig& cfg) {
  SvmModel model;
  model.weights.resize(kNumPhases, x.cols());
  model.bias.resize(kNumPhases);
  for (std::size_t k = 0; k < kNumPhases; ++k) {
    Eigen::VectorXd s(x.rows());
    for (std::size_t i = 0; i < y.size(); ++i) {
      s(static_cast<Eigen::Index>(i)) = phase_index(y[i]) == k ? 1.0 : -1.0;
    }
    auto fit = fit_binary_svm(x, s, cfg.l2, cfg.svm_step, cfg.svm_epochs);
    model.weights.row(static_cast<Eigen::Index>(k)) = fit.w.transpose();
    model.bias(static_cast<Eigen::Index>(k)) = fit.b;
  }
  return model;
}

}  // namespace

SvmModel train_svm(const Eigen::MatrixXd& x, std::span<const PhaseLabel> y, const TrainConfig& cfg) {
  cfg.validate();
  check_training_input(x, y);
  const auto n = static_cast<std::size_t>(x.rows());
  const auto n_cal = static_cast<std::size_t>(std::floor(static_cast<double>(n) * cfg.calibration_fraction));
  const std::size_t n_fit = n - n_cal;

  double temperature = 1.0;
  bool held_out = false;
  if (n_cal >= 4 && n_fit >= 2) {
    auto head = y.subspan(0, n_fit);
    std::set<PhaseLabel> classes(head.begin(), head.end());
    const auto rows = static_cast<Eigen::Index>(n_fit);
    bool varies = false;
    for (Eigen::Index j = 0; j < x.cols() && !varies; ++j) {
      varies = x.col(j).head(rows).maxCoeff() > x.col(j).head(rows).minCoeff();
    }
    if (classes.size() >= 2 && varies) {
      SvmModel partial = fit_one_vs_rest(x.topRows(rows), head, cfg);
      temperature = fit_temperature(partial.margins(x.bottomRows(static_cast<Eigen::Index>(n_cal))),
                                    y.subspan(n_fit));
      held_out = true;
    }
  }
  SvmModel model = fit_one_vs_rest(x, y, cfg);
  if (!held_out) temperature = fit_temperature(model.margins(x), y);
  model.temperature = temperature;
  return model;
}

// ---------------------------------------------------------------------------
// MLP

MlpModel MlpModel::init(std::size_t input_dim, const TrainConfig& cfg) {
  MlpModel m;
  m.dropout_rate = cfg.dropout;
  m.rng_seed = cfg.seed;
  Rng rng(cfg.seed);
  std::size_t fan_in = input_dim;
  for (std::size_t l = 0; l <= cfg.hidden_layers; ++l) {
    std::size_t fan_out = l == cfg.hidden_layers ? kNumPhases : cfg.hidden_units;
    DenseLayer layer;
    layer.weights.resize(static_cast<Eigen::Index>(fan_out), static_cast<Eigen::Index>(fan_in));
    const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = sd * rng.normal();
    }
    layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fan_out));
    m.layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return m;
}

Eigen::MatrixXd MlpModel::logits(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    a = affine(a, layers[l].weights, layers[l].bias).cwiseMax(0.0);
  }
  return affine(a, layers.back().weights, layers.back().bias);
}

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Eigen::MatrixXd mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) mask(r, c) = rng.bernoulli(rate) ? 0.0 : keep_scale;
  }
  return mask;
}

MlpLossGradient mlp_loss_gradient(const MlpModel& model, const Eigen::MatrixXd& x,
                                  std::span<const PhaseLabel> y, double l2, const Eigen::MatrixXd* mask,
                                  const Weights& class_weights) {
  const std::size_t n_hidden = model.layers.size() - 1;
  const double n = static_cast<double>(y.size());

  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // hidden pre-activations
  inputs.reserve(model.layers.size());
  pre.reserve(n_hidden);
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < n_hidden; ++l) {
    inputs.push_back(a);
    pre.push_back(affine(a, model.layers[l].weights, model.layers[l].bias));
    a = pre.back().cwiseMax(0.0);
    if (l + 1 == n_hidden && mask) a = a.cwiseProduct(*mask);
  }
  inputs.push_back(a);
  const auto& out_layer = model.layers.back();
  Eigen::MatrixXd logits = affine(a, out_layer.weights, out_layer.bias);

  Eigen::VectorXd w = sample_weights(y, class_weights);
  double ce = 0.0;
  Eigen::MatrixXd p = softmax_rows(logits, y, w, ce);

  MlpLossGradient out;
  out.loss = ce / n;
  for (const auto& layer : model.layers) out.loss += 0.5 * l2 * layer.weights.squaredNorm();
  out.grads.resize(model.layers.size());

  Eigen::MatrixXd delta = (p - one_hot(y)).array().colwise() * (w.array() / n);
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const auto& layer = model.layers[l];
    out.grads[l].weights = delta.transpose() * inputs[l] + l2 * layer.weights;
    out.grads[l].bias = delta.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd d_act = delta * layer.weights;
    if (l == n_hidden && mask) d_act = d_act.cwiseProduct(*mask);
    delta = d_act.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return out;
}

MlpModel train_mlp(const Eigen::MatrixXd& x, std::span<const PhaseLabel> y, const TrainConfig& cfg,
                   const Validation* validation, MlpTrainLog* log) {
  cfg.validate();
  check_training_input(x, y);
  if (validation && static_cast<std::size_t>(validation->x.rows()) != validation->y.size()) {
    throw Error(Errc::LengthMismatch, "validation X and y differ in length");
  }
  if (validation && validation->y.empty()) validation = nullptr;

  MlpModel model = MlpModel::init(static_cast<std::size_t>(x.cols()), cfg);
  Rng rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  std::vector<DenseLayer> m1;
  std::vector<DenseLayer> m2;
  for (const auto& layer : model.layers) {
    DenseLayer z{Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()),
                 Eigen::VectorXd::Zero(layer.bias.size())};
    m1.push_back(z);
    m2.push_back(z);
  }

  const auto n = static_cast<std::size_t>(x.rows());
  const std::size_t batch = (cfg.batch_size == 0 || cfg.batch_size >= n) ? n : cfg.batch_size;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  MlpTrainLog local;
  MlpModel best = model;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  long step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (batch < n) {
      for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(order[i], order[static_cast<std::size_t>(rng.next_u64() % (i + 1))]);
      }
    }
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      Eigen::MatrixXd xb(static_cast<Eigen::Index>(len), x.cols());
      std::vector<PhaseLabel> yb(len);
      for (std::size_t i = 0; i < len; ++i) {
        xb.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(order[start + i]));
        yb[i] = y[order[start + i]];
      }
      Eigen::MatrixXd mask;
      if (model.dropout_rate > 0.0) {
        mask = dropout_mask(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(cfg.hidden_units),
                            model.dropout_rate, rng);
      }
      auto lg = mlp_loss_gradient(model, xb, yb, cfg.l2, model.dropout_rate > 0.0 ? &mask : nullptr,
                                  cfg.class_weights);
      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto update = [&](auto& param, auto& mo, auto& ve, const auto& g) {
          mo = kBeta1 * mo + (1.0 - kBeta1) * g;
          ve = kBeta2 * ve + (1.0 - kBeta2) * g.cwiseProduct(g);
          param.array() -= cfg.learning_rate * (mo.array() / c1) / ((ve.array() / c2).sqrt() + kEps);
        };
        update(model.layers[l].weights, m1[l].weights, m2[l].weights, lg.grads[l].weights);
        update(model.layers[l].bias, m1[l].bias, m2[l].bias, lg.grads[l].bias);
      }
    }
    local.epochs_run = epoch;
    if (validation) {
      double vl = log_loss(Classifier(model), validation->x, validation->y);
      if (vl < best_val) {
        best_val = vl;
        best = model;
        local.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= cfg.early_stopping_patience) {
        break;
      }
    }
  }
  if (validation) {
    model = std::move(best);
    local.best_validation_loss = best_val;
  } else {
    local.best_epoch = local.epochs_run;
  }
  local.final_train_loss = log_loss(Classifier(model), x, y);
  if (log) *log = local;
  return model;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ModelKind k) noexcept {
  switch (k) {
    case ModelKind::Rbbcp: return "rbbcp";
    case ModelKind::Mlr: return "mlr";
    case ModelKind::Svm: return "svm";
    case ModelKind::Mlp: return "mlp";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  for (auto k : {ModelKind::Rbbcp, ModelKind::Mlr, ModelKind::Svm, ModelKind::Mlp}) {
    if (to_string(k) == text) return k;
  }
  throw Error(Errc::ConfigError, "unknown model kind '" + std::string(text) + "'");
}

std::size_t input_dim(const Classifier& model) {
  return std::visit([](const auto& m) { return m.input_dim(); }, model);
}

std::vector<PhaseDistribution> predict_proba(const Classifier& model, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.cols()) != input_dim(model)) {
    throw Error(Errc::DimensionMismatch, "model expects " + std::to_string(input_dim(model)) +
                                             " features, got " + std::to_string(x.cols()));
  }
  std::vector<PhaseDistribution> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, SvmModel>) {
          Eigen::MatrixXd margins = m.margins(x);
          for (Eigen::Index i = 0; i < x.rows(); ++i) {
            std::array<double, kNumPhases> row{};
            for (std::size_t k = 0; k < kNumPhases; ++k) row[k] = margins(i, static_cast<Eigen::Index>(k));
            out.push_back(calibrated_distribution(row, m.temperature));
          }
        } else {
          Eigen::MatrixXd logits = m.logits(x);
          for (Eigen::Index i = 0; i < x.rows(); ++i) out.push_back(row_distribution(logits, i));
        }
      },
      model);
  return out;
}

PhaseDistribution predict_proba(const Classifier& model, std::span<const double> x) {
  return predict_proba(model, as_row(x)).front();
}

std::vector<RankedPhase> predict_topk(const Classifier& model, std::span<const double> x, std::size_t k) {
  if (k < 1 || k > kNumPhases) throw Error(Errc::BadK, "k must be in 1..4, got " + std::to_string(k));
  return predict_topk(predict_proba(model, x), k);
}

double log_loss(const Classifier& model, const Eigen::MatrixXd& x, std::span<const PhaseLabel> y) {
  auto dists = predict_proba(model, x);
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    acc -= std::log(std::max(dists[i][y[i]], 1e-300));
  }
  return y.empty() ? 0.0 : acc / static_cast<double>(y.size());
}

}  // namespace cyclecast
