#pragma once
// Tier 1: linear classifiers trained by per-example SGD (hinge or logistic
// loss, L2 penalty) over embedding vectors.
//
// Hinge models are calibrated with a Platt sigmoid fitted on held-out
// margins; logistic models use sigmoid(margin) directly.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "toxcascade/vectorize.hpp"

namespace toxcascade::linear {

using vectorize::EmbeddingVector;
using vectorize::Label;

enum class Loss { Hinge, Log };

const char* to_string(Loss loss);
Loss loss_from_string(std::string_view s);

struct TrainConfig {
  Loss loss = Loss::Hinge;
  double alpha = 1e-4;
  std::size_t max_iter = 1000;
  double tol = 1e-3;
  // {clean, toxic} multipliers; unset means inverse class frequency n / (2 n_c).
  std::optional<std::array<double, 2>> class_weights;
  std::uint64_t seed = 0;
  // Hinge only: fraction of each class held out for the Platt fit. When a
  // class would get fewer than `min_calibration_per_class` held-out examples
  // the sigmoid is fitted on the training margins instead.
  double calibration_fraction = 0.1;
  std::size_t min_calibration_per_class = 5;

  void validate() const;
  std::string fingerprint() const;
};

struct PlattParams {
  double a = 0.0;
  double b = 0.0;
};

struct LinearModel {
  Loss loss = Loss::Hinge;
  std::vector<double> weights;
  double bias = 0.0;
  std::optional<PlattParams> calibration;
  std::string config_fingerprint;
  std::size_t epochs_run = 0;

  std::size_t dims() const { return weights.size(); }
};

struct ToxicityScore {
  double p_toxic = 0.0;
  double margin = 0.0;
  std::string tier;
};

struct LabeledVector {
  EmbeddingVector x;
  Label label = Label::Clean;
};

inline int sign_of(Label l) { return l == Label::Toxic ? 1 : -1; }

// Throws SingleClassData, DimensionMismatch.
LinearModel train_sgd(const std::vector<LabeledVector>& examples, const TrainConfig& cfg);

double decision(const LinearModel& model, const EmbeddingVector& v);
// Throws UncalibratedModel for hinge models without a fitted sigmoid.
ToxicityScore predict_proba(const LinearModel& model, const EmbeddingVector& v, std::string tier = "1");
double probability_from_margin(const LinearModel& model, double margin);

double hinge_loss(int label, double margin);
double log_loss(int label, double margin);
double loss_value(Loss loss, int label, double margin);
// d loss / d margin
double loss_derivative(Loss loss, int label, double margin);

// Per-example objective: weight * loss(y, w.x + b) + alpha/2 * |w|^2
double example_objective(Loss loss, std::span<const double> w, double b, std::span<const float> x, int label,
                         double alpha, double sample_weight);

struct Gradient {
  std::vector<double> dw;
  double db = 0.0;
};

Gradient example_gradient(Loss loss, std::span<const double> w, double b, std::span<const float> x, int label,
                          double alpha, double sample_weight);

// One SGD update, w <- w - eta * grad_w, b <- b - eta * grad_b (the bias is not penalized).
// Returns the example loss evaluated before the update.
double sgd_step(Loss loss, std::vector<double>& w, double& b, std::span<const float> x, int label, double alpha,
                double sample_weight, double eta);

// Maximum-likelihood sigmoid p = 1 / (1 + exp(a*m + b)) on labels in {-1, +1}.
PlattParams fit_platt(std::span<const double> margins, std::span<const int> labels);
double platt_probability(const PlattParams& p, double margin);

void save_model(const LinearModel& model, const std::string& path);
LinearModel load_model(const std::string& path);

}  // namespace toxcascade::linear
