#include "toxcascade/linear.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "toxcascade/errors.hpp"
#include "toxcascade/kernels.hpp"
#include "rng.hpp"

namespace toxcascade::linear {

namespace {

using detail::shuffle;

// Epochs without a tol-sized drop in mean loss before training stops.
constexpr std::size_t kNoImprovementEpochs = 5;

double stable_sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

const char* to_string(Loss loss) { return loss == Loss::Hinge ? "hinge" : "log"; }

Loss loss_from_string(std::string_view s) {
  if (s == "hinge") return Loss::Hinge;
  if (s == "log" || s == "log_loss") return Loss::Log;
  throw FormatError("unknown loss: " + std::string(s));
}

void TrainConfig::validate() const {
  if (!(alpha > 0)) throw InvalidArgument("alpha must be > 0");
  if (max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
  if (!(tol > 0)) throw InvalidArgument("tol must be > 0");
  if (!(calibration_fraction >= 0 && calibration_fraction < 1)) {
    throw InvalidArgument("calibration_fraction must lie in [0, 1)");
  }
  if (class_weights && ((*class_weights)[0] <= 0 || (*class_weights)[1] <= 0)) {
    throw InvalidArgument("class weights must be positive");
  }
}

std::string TrainConfig::fingerprint() const {
  nlohmann::json j{{"loss", to_string(loss)}, {"alpha", alpha},        {"max_iter", max_iter},
                   {"tol", tol},              {"seed", seed},          {"calibration_fraction", calibration_fraction},
                   {"min_calibration_per_class", min_calibration_per_class}};
  if (class_weights) j["class_weights"] = *class_weights;
  const auto h = vectorize::stable_hash(j.dump(), 0);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double hinge_loss(int label, double margin) { return std::max(0.0, 1.0 - label * margin); }

double log_loss(int label, double margin) {
  const double z = label * margin;
  return z > 18 ? std::exp(-z) : (z < -18 ? -z : std::log1p(std::exp(-z)));
}

double loss_value(Loss loss, int label, double margin) {
  return loss == Loss::Hinge ? hinge_loss(label, margin) : log_loss(label, margin);
}

double loss_derivative(Loss loss, int label, double margin) {
  const double z = label * margin;
  if (loss == Loss::Hinge) return z < 1.0 ? -label : 0.0;
  if (z > 18) return -label * std::exp(-z);
  if (z < -18) return -label;
  return -label / (1.0 + std::exp(z));
}

double example_objective(Loss loss, std::span<const double> w, double b, std::span<const float> x, int label,
                         double alpha, double sample_weight) {
  if (w.size() != x.size()) throw DimensionMismatch(w.size(), x.size());
  const double m = kernels::dot(w, x) + b;
  double sq = 0;
  for (double wi : w) sq += wi * wi;
  return sample_weight * loss_value(loss, label, m) + 0.5 * alpha * sq;
}

Gradient example_gradient(Loss loss, std::span<const double> w, double b, std::span<const float> x, int label,
                          double alpha, double sample_weight) {
  if (w.size() != x.size()) throw DimensionMismatch(w.size(), x.size());
  const double m = kernels::dot(w, x) + b;
  const double d = sample_weight * loss_derivative(loss, label, m);
  Gradient g;
  g.dw.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) g.dw[i] = alpha * w[i] + d * static_cast<double>(x[i]);
  g.db = d;
  return g;
}

double sgd_step(Loss loss, std::vector<double>& w, double& b, std::span<const float> x, int label, double alpha,
                double sample_weight, double eta) {
  if (w.size() != x.size()) throw DimensionMismatch(w.size(), x.size());
  const double m = kernels::dot(std::span<const double>(w), x) + b;
  const double d = sample_weight * loss_derivative(loss, label, m);
  kernels::scale(1.0 - eta * alpha, w);
  if (d != 0.0) {
    kernels::axpy(-eta * d, x, w);
    b -= eta * d;
  }
  return sample_weight * loss_value(loss, label, m);
}

double platt_probability(const PlattParams& p, double margin) { return stable_sigmoid(-(p.a * margin + p.b)); }

PlattParams fit_platt(std::span<const double> margins, std::span<const int> labels) {
  if (margins.size() != labels.size()) throw DimensionMismatch(margins.size(), labels.size());
  std::size_t npos = 0;
  for (int y : labels) npos += (y > 0);
  const std::size_t nneg = labels.size() - npos;
  if (npos == 0 || nneg == 0) throw SingleClassData("Platt calibration needs both classes");

  // Newton's method with backtracking on the negative log-likelihood.
  auto nll = [&](double a, double b) {
    double f = 0;
    for (std::size_t i = 0; i < margins.size(); ++i) {
      const double t = labels[i] > 0 ? 1.0 : 0.0;
      const double fapb = a * margins[i] + b;
      // log(1 + e^fapb) - (1 - t) * fapb, arranged for stability
      f += (fapb >= 0) ? t * fapb + std::log1p(std::exp(-fapb)) : (t - 1) * fapb + std::log1p(std::exp(fapb));
    }
    return f;
  };
  PlattParams p{0.0, std::log((nneg + 1.0) / (npos + 1.0))};
  double fval = nll(p.a, p.b);
  constexpr double kSigma = 1e-12;
  for (int iter = 0; iter < 100; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < margins.size(); ++i) {
      const double t = labels[i] > 0 ? 1.0 : 0.0;
      const double q = stable_sigmoid(p.a * margins[i] + p.b);  // 1 - P(toxic)
      const double prob = 1.0 - q;
      const double d2 = prob * q;
      h11 += margins[i] * margins[i] * d2;
      h22 += d2;
      h21 += margins[i] * d2;
      const double d1 = t - prob;
      g1 += margins[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    bool moved = false;
    while (step >= 1e-10) {
      const double na = p.a + step * da, nb = p.b + step * db;
      const double nf = nll(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        p = {na, nb};
        fval = nf;
        moved = true;
        break;
      }
      step /= 2;
    }
    if (!moved) break;
  }
  return p;
}

LinearModel train_sgd(const std::vector<LabeledVector>& examples, const TrainConfig& cfg) {
  cfg.validate();
  if (examples.empty()) throw SingleClassData("no training examples");
  const std::size_t dims = examples.front().x.dims();
  std::array<std::size_t, 2> counts{0, 0};
  for (const auto& e : examples) {
    if (e.x.dims() != dims) throw DimensionMismatch(dims, e.x.dims());
    ++counts[static_cast<std::size_t>(e.label)];
  }
  if (counts[0] == 0 || counts[1] == 0) throw SingleClassData("training data must contain both classes");

  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = examples.size();

  // Stratified calibration hold-out for hinge models.
  std::vector<std::size_t> train_idx, calib_idx;
  bool holdout = false;
  if (cfg.loss == Loss::Hinge && cfg.calibration_fraction > 0) {
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(examples[i].label)].push_back(i);
    std::array<std::size_t, 2> take{};
    holdout = true;
    for (std::size_t c = 0; c < 2; ++c) {
      take[c] = static_cast<std::size_t>(std::llround(cfg.calibration_fraction * static_cast<double>(by_class[c].size())));
      if (take[c] < cfg.min_calibration_per_class || take[c] >= by_class[c].size()) holdout = false;
    }
    if (holdout) {
      for (std::size_t c = 0; c < 2; ++c) {
        shuffle(by_class[c], rng);
        calib_idx.insert(calib_idx.end(), by_class[c].begin(), by_class[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
        train_idx.insert(train_idx.end(), by_class[c].begin() + static_cast<std::ptrdiff_t>(take[c]), by_class[c].end());
      }
      std::sort(train_idx.begin(), train_idx.end());
    }
  }
  if (!holdout) {
    train_idx.resize(n);
    std::iota(train_idx.begin(), train_idx.end(), 0);
  }

  std::array<double, 2> cw{};
  if (cfg.class_weights) {
    cw = *cfg.class_weights;
  } else {
    std::array<std::size_t, 2> tc{0, 0};
    for (auto i : train_idx) ++tc[static_cast<std::size_t>(examples[i].label)];
    for (std::size_t c = 0; c < 2; ++c) {
      cw[c] = tc[c] ? static_cast<double>(train_idx.size()) / (2.0 * static_cast<double>(tc[c])) : 1.0;
    }
  }

  LinearModel model;
  model.loss = cfg.loss;
  model.weights.assign(dims, 0.0);
  model.config_fingerprint = cfg.fingerprint();

  // Optimal learning-rate schedule eta_t = 1 / (alpha (t0 + t)), t0 from the
  // typical-weight heuristic.
  const double typw = std::sqrt(1.0 / std::sqrt(cfg.alpha));
  const double eta0 = typw / std::max(1.0, std::abs(loss_derivative(cfg.loss, 1, -typw)));
  const double t0 = 1.0 / (eta0 * cfg.alpha);

  // The returned model is the running average of the iterates, which damps
  // the oscillation of the large early steps.
  std::vector<double> w = model.weights;
  double b = 0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t no_improvement = 0;
  double t = 0;
  std::vector<std::size_t> order = train_idx;
  for (std::size_t epoch = 0; epoch < cfg.max_iter; ++epoch) {
    shuffle(order, rng);
    double total = 0;
    for (std::size_t i : order) {
      const auto& e = examples[i];
      const double eta = 1.0 / (cfg.alpha * (t0 + t));
      total += sgd_step(cfg.loss, w, b, e.x.values, sign_of(e.label), cfg.alpha, cw[static_cast<std::size_t>(e.label)],
                        eta);
      t += 1;
      const double k = 1.0 / t;
      for (std::size_t d = 0; d < dims; ++d) model.weights[d] += (w[d] - model.weights[d]) * k;
      model.bias += (b - model.bias) * k;
    }
    model.epochs_run = epoch + 1;
    const double mean = total / static_cast<double>(order.size());
    if (mean > best - cfg.tol) {
      if (++no_improvement >= kNoImprovementEpochs) break;
    } else {
      no_improvement = 0;
    }
    best = std::min(best, mean);
  }

  if (cfg.loss == Loss::Hinge) {
    const auto& src = holdout ? calib_idx : train_idx;
    std::vector<double> margins;
    std::vector<int> labels;
    for (std::size_t i : src) {
      margins.push_back(decision(model, examples[i].x));
      labels.push_back(sign_of(examples[i].label));
    }
    model.calibration = fit_platt(margins, labels);
  }
  return model;
}

double decision(const LinearModel& model, const EmbeddingVector& v) {
  if (v.dims() != model.dims()) throw DimensionMismatch(model.dims(), v.dims());
  return kernels::dot(std::span<const double>(model.weights), std::span<const float>(v.values)) + model.bias;
}

double probability_from_margin(const LinearModel& model, double margin) {
  if (model.loss == Loss::Log) return stable_sigmoid(margin);
  if (!model.calibration) throw UncalibratedModel("hinge model has no fitted calibration");
  return platt_probability(*model.calibration, margin);
}

ToxicityScore predict_proba(const LinearModel& model, const EmbeddingVector& v, std::string tier) {
  const double m = decision(model, v);
  return {std::clamp(probability_from_margin(model, m), 0.0, 1.0), m, std::move(tier)};
}

void save_model(const LinearModel& model, const std::string& path) {
  nlohmann::json j{{"format", "toxcascade.linear.v1"},
                   {"loss", to_string(model.loss)},
                   {"dims", model.dims()},
                   {"weights", model.weights},
                   {"bias", model.bias},
                   {"epochs_run", model.epochs_run},
                   {"train_config_fingerprint", model.config_fingerprint}};
  j["calibration"] = model.calibration ? nlohmann::json{{"a", model.calibration->a}, {"b", model.calibration->b}}
                                       : nlohmann::json(nullptr);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write model: " + path);
  out << j.dump(1) << '\n';
}

LinearModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open model: " + path);
  try {
    const auto j = nlohmann::json::parse(in);
    LinearModel m;
    m.loss = loss_from_string(j.at("loss").get<std::string>());
    m.weights = j.at("weights").get<std::vector<double>>();
    if (m.weights.size() != j.at("dims").get<std::size_t>()) throw FormatError("model dims mismatch: " + path);
    m.bias = j.at("bias").get<double>();
    m.epochs_run = j.value("epochs_run", std::size_t{0});
    m.config_fingerprint = j.value("train_config_fingerprint", std::string());
    if (j.contains("calibration") && !j["calibration"].is_null()) {
      m.calibration = PlattParams{j["calibration"].at("a").get<double>(), j["calibration"].at("b").get<double>()};
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad model file " + path + ": " + e.what());
  }
}

}  // namespace toxcascade::linear
