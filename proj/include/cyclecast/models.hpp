#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "cyclecast/dataset.hpp"
#include "cyclecast/distribution.hpp"
#include "cyclecast/random.hpp"

namespace cyclecast {

struct TrainConfig {
  double learning_rate = 0.005;
  int epochs = 500;
  std::size_t batch_size = 0;  // 0 means full batch
  double l2 = 1e-3;
  std::uint64_t seed = 42;
  int early_stopping_patience = 25;

  // MLR: gradient descent with backtracking line search.
  int max_iterations = 50'000;
  double tolerance = 1e-8;

  // MLP shape.
  std::size_t hidden_layers = 4;
  std::size_t hidden_units = 50;
  double dropout = 0.2;

  // SVM: subgradient step eta0 / sqrt(t); last fraction of rows calibrates the temperature.
  double svm_step = 0.5;
  int svm_epochs = 3000;
  double calibration_fraction = 0.2;

  // Per-phase loss weights; all ones when unset.
  std::optional<std::array<double, kNumPhases>> class_weights;

  void validate() const;
};

struct Validation {
  const Eigen::MatrixXd& x;
  std::span<const PhaseLabel> y;
};

// ---------------------------------------------------------------------------
// Multinomial logistic regression

struct MlrModel {
  Eigen::MatrixXd weights;  // 4 x d
  Eigen::VectorXd bias;     // 4
  double l2 = 0.0;

  static MlrModel zeros(std::size_t dim);
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(weights.cols()); }
  Eigen::MatrixXd logits(const Eigen::MatrixXd& x) const;  // n x 4
};

struct MlrLossGradient {
  double loss = 0.0;
  Eigen::MatrixXd grad_weights;
  Eigen::VectorXd grad_bias;
};

// Mean (class-weighted) softmax cross-entropy plus (l2/2)*||W||^2; bias is not penalized.
MlrLossGradient mlr_loss_gradient(const MlrModel& model, const Eigen::MatrixXd& x,
                                  std::span<const PhaseLabel> y, double l2,
                                  const std::optional<std::array<double, kNumPhases>>& class_weights = {});

struct MlrTrainLog {
  int iterations = 0;
  bool converged = false;
  double final_loss = 0.0;
  double final_gradient_norm = 0.0;
  std::vector<double> loss_history;
};

MlrModel train_mlr(const Eigen::MatrixXd& x, std::span<const PhaseLabel> y, const TrainConfig& cfg,
                   MlrTrainLog* log = nullptr);

// ---------------------------------------------------------------------------
// One-vs-rest linear SVM

struct SvmModel {
  Eigen::MatrixXd weights;  // 4 x d
  Eigen::VectorXd bias;     // 4
  double temperature = 1.0;

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(weights.cols()); }
  Eigen::MatrixXd margins(const Eigen::MatrixXd& x) const;  // n x 4
};

// softmax(margins / temperature)
PhaseDistribution calibrated_distribution(std::span<const double, kNumPhases> margins, double temperature);

// Temperature minimizing the negative log-likelihood of softmax(margins / T).
double fit_temperature(const Eigen::MatrixXd& margins, std::span<const PhaseLabel> y);

SvmModel train_svm(const Eigen::MatrixXd& x, std::span<const PhaseLabel> y, const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// Multilayer perceptron: d -> H x units (ReLU) -> dropout -> 4 (softmax)

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

struct MlpModel {
  std::vector<DenseLayer> layers;  // hidden layers then the output layer
  double dropout_rate = 0.2;
  std::uint64_t rng_seed = 0;

  static MlpModel init(std::size_t input_dim, const TrainConfig& cfg);
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(layers.front().weights.cols()); }
  // Inference logits (dropout off), n x 4.
  Eigen::MatrixXd logits(const Eigen::MatrixXd& x) const;
};

// Inverted-dropout mask: each entry 0 with probability `rate`, else 1/(1-rate).
Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng);

struct MlpLossGradient {
  double loss = 0.0;
  std::vector<DenseLayer> grads;
};

// Loss and gradients for every layer. `mask`, when given, multiplies the last
// hidden activation (n x units).
MlpLossGradient mlp_loss_gradient(const MlpModel& model, const Eigen::MatrixXd& x,
                                  std::span<const PhaseLabel> y, double l2,
                                  const Eigen::MatrixXd* mask = nullptr,
                                  const std::optional<std::array<double, kNumPhases>>& class_weights = {});

struct MlpTrainLog {
  int epochs_run = 0;
  int best_epoch = 0;
  double final_train_loss = 0.0;
  std::optional<double> best_validation_loss;
};

MlpModel train_mlp(const Eigen::MatrixXd& x, std::span<const PhaseLabel> y, const TrainConfig& cfg,
                   const Validation* validation = nullptr, MlpTrainLog* log = nullptr);

// ---------------------------------------------------------------------------

enum class ModelKind { Rbbcp, Mlr, Svm, Mlp };
std::string_view to_string(ModelKind k) noexcept;
ModelKind parse_model_kind(std::string_view text);

using Classifier = std::variant<MlrModel, SvmModel, MlpModel>;

std::size_t input_dim(const Classifier& model);
// Throws DimensionMismatch.
PhaseDistribution predict_proba(const Classifier& model, std::span<const double> x);
std::vector<PhaseDistribution> predict_proba(const Classifier& model, const Eigen::MatrixXd& x);
std::vector<RankedPhase> predict_topk(const Classifier& model, std::span<const double> x, std::size_t k);

// Mean cross-entropy of the model's distributions against labels.
double log_loss(const Classifier& model, const Eigen::MatrixXd& x, std::span<const PhaseLabel> y);

}  // namespace cyclecast
