#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "toxcascade/errors.hpp"
#include "toxcascade/linear.hpp"

namespace ln = toxcascade::linear;
namespace vz = toxcascade::vectorize;

namespace {

std::vector<ln::LabeledVector> separable(std::size_t n, std::size_t dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.f, 1.f);
  std::vector<ln::LabeledVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<float> v(dims);
    for (auto& x : v) x = 0.3f * g(rng);
    const bool toxic = i % 3 == 0;
    v[0] = toxic ? 2.f + std::abs(g(rng)) : -2.f - std::abs(g(rng));
    out.push_back({vz::make_unit(v), toxic ? vz::Label::Toxic : vz::Label::Clean});
  }
  return out;
}

}  // namespace

TEST(Losses, Values) {
  EXPECT_DOUBLE_EQ(ln::hinge_loss(1, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(ln::hinge_loss(1, 0.25), 0.75);
  EXPECT_DOUBLE_EQ(ln::hinge_loss(-1, 0.25), 1.25);
  EXPECT_NEAR(ln::log_loss(1, 0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(ln::log_loss(-1, 800.0), 800.0, 1e-9);  // no overflow
  EXPECT_TRUE(std::isfinite(ln::log_loss(1, -800.0)));
}

TEST(Gradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 1);
  const std::size_t dims = 16;
  for (auto loss : {ln::Loss::Log, ln::Loss::Hinge}) {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> w(dims);
      std::vector<float> x(dims);
      for (auto& v : w) v = 0.5 * g(rng);
      for (auto& v : x) v = static_cast<float>(g(rng));
      const double b = 0.1 * g(rng);
      const int y = trial % 2 ? 1 : -1;
      const double alpha = 1e-3, sw = 1.7;
      // keep hinge away from its kink
      double m = b;
      for (std::size_t i = 0; i < dims; ++i) m += w[i] * x[i];
      if (loss == ln::Loss::Hinge && std::abs(1 - y * m) < 1e-3) continue;
      const auto grad = ln::example_gradient(loss, w, b, x, y, alpha, sw);
      const double h = 1e-6;
      for (std::size_t i = 0; i < dims; ++i) {
        auto wp = w, wm = w;
        wp[i] += h;
        wm[i] -= h;
        const double fd = (ln::example_objective(loss, wp, b, x, y, alpha, sw) -
                           ln::example_objective(loss, wm, b, x, y, alpha, sw)) / (2 * h);
        EXPECT_NEAR(grad.dw[i], fd, 1e-5);
      }
      const double fdb = (ln::example_objective(loss, w, b + h, x, y, alpha, sw) -
                          ln::example_objective(loss, w, b - h, x, y, alpha, sw)) / (2 * h);
      EXPECT_NEAR(grad.db, fdb, 1e-5);
    }
  }
}

TEST(SgdStep, MovesAgainstGradient) {
  std::vector<double> w{0.0, 0.0};
  double b = 0;
  const std::vector<float> x{1.f, 0.f};
  const double before = ln::sgd_step(ln::Loss::Log, w, b, x, 1, 0.0, 1.0, 0.5);
  EXPECT_NEAR(before, std::log(2.0), 1e-12);
  EXPECT_NEAR(w[0], 0.25, 1e-12);
  EXPECT_NEAR(b, 0.25, 1e-12);
  EXPECT_EQ(w[1], 0.0);
}

TEST(Train, SeparableIsPerfect) {
  const auto data = separable(300, 32, 1);
  for (auto loss : {ln::Loss::Hinge, ln::Loss::Log}) {
    ln::TrainConfig cfg;
    cfg.loss = loss;
    cfg.seed = 4;
    const auto model = ln::train_sgd(data, cfg);
    std::vector<double> scores;
    std::vector<vz::Label> truth;
    std::size_t correct = 0;
    for (const auto& ex : data) {
      const auto s = ln::predict_proba(model, ex.x);
      EXPECT_GE(s.p_toxic, 0.0);
      EXPECT_LE(s.p_toxic, 1.0);
      correct += ((s.p_toxic >= 0.5) == (ex.label == vz::Label::Toxic));
      scores.push_back(s.p_toxic);
      truth.push_back(ex.label);
    }
    EXPECT_EQ(correct, data.size()) << ln::to_string(loss);
    EXPECT_DOUBLE_EQ(oracle::pairwise_auc(scores, truth), 1.0);
    if (loss == ln::Loss::Hinge) {
      EXPECT_TRUE(model.calibration.has_value());
    }
  }
}

TEST(Train, DeterministicForSeed) {
  const auto data = separable(120, 16, 2);
  ln::TrainConfig cfg;
  cfg.seed = 9;
  const auto a = ln::train_sgd(data, cfg);
  const auto b = ln::train_sgd(data, cfg);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.bias, b.bias);
  cfg.seed = 10;
  EXPECT_NE(ln::train_sgd(data, cfg).weights, a.weights);
}

TEST(Train, Errors) {
  auto data = separable(20, 8, 3);
  for (auto& d : data) d.label = vz::Label::Clean;
  EXPECT_THROW(ln::train_sgd(data, {}), toxcascade::SingleClassData);
  auto mixed = separable(20, 8, 3);
  mixed[1].x = vz::make_unit({1, 2, 3});
  EXPECT_THROW(ln::train_sgd(mixed, {}), toxcascade::DimensionMismatch);
  ln::TrainConfig bad;
  bad.alpha = -1;
  EXPECT_THROW(bad.validate(), toxcascade::InvalidArgument);
}

TEST(Train, IdenticalFeaturesGiveNeutralScore) {
  std::vector<ln::LabeledVector> data;
  for (int i = 0; i < 40; ++i) data.push_back({vz::make_unit({1, 0, 0}), i % 2 ? vz::Label::Toxic : vz::Label::Clean});
  ln::TrainConfig cfg;
  cfg.loss = ln::Loss::Log;
  cfg.class_weights = std::array<double, 2>{1.0, 1.0};
  const auto m = ln::train_sgd(data, cfg);
  EXPECT_NEAR(ln::predict_proba(m, data[0].x).p_toxic, 0.5, 0.1);
}

TEST(Platt, RecoversSigmoid) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-4, 4), c(0, 1);
  std::vector<double> m;
  std::vector<int> y;
  for (int i = 0; i < 4000; ++i) {
    const double x = u(rng);
    const double p = 1 / (1 + std::exp(-1.5 * x + 0.3));
    m.push_back(x);
    y.push_back(c(rng) < p ? 1 : -1);
  }
  const auto fit = ln::fit_platt(m, y);
  EXPECT_NEAR(fit.a, -1.5, 0.2);
  EXPECT_NEAR(fit.b, 0.3, 0.2);
  EXPECT_NEAR(ln::platt_probability(fit, 0.0), 1 / (1 + std::exp(fit.b)), 1e-12);
}

TEST(Predict, UncalibratedHingeThrows) {
  ln::LinearModel m;
  m.weights = {1.0, 0.0};
  EXPECT_THROW(ln::predict_proba(m, vz::make_unit({1, 0})), toxcascade::UncalibratedModel);
  m.loss = ln::Loss::Log;
  EXPECT_NEAR(ln::predict_proba(m, vz::make_unit({1, 0})).p_toxic, 1 / (1 + std::exp(-1.0)), 1e-12);
}

TEST(Model, SaveLoadRoundTrip) {
  const auto data = separable(90, 12, 5);
  const auto m = ln::train_sgd(data, {});
  const auto path = (std::filesystem::temp_directory_path() / "tc_model.json").string();
  ln::save_model(m, path);
  const auto back = ln::load_model(path);
  EXPECT_EQ(back.weights, m.weights);
  EXPECT_EQ(back.bias, m.bias);
  ASSERT_TRUE(back.calibration);
  EXPECT_EQ(back.calibration->a, m.calibration->a);
  EXPECT_EQ(back.config_fingerprint, m.config_fingerprint);
  for (const auto& ex : data) EXPECT_EQ(ln::predict_proba(back, ex.x).p_toxic, ln::predict_proba(m, ex.x).p_toxic);
  std::filesystem::remove(path);
}
