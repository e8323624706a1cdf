#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "oracles.hpp"
#include "toxcascade/corpus.hpp"
#include "toxcascade/errors.hpp"
#include "toxcascade/evalharness.hpp"

namespace ev = toxcascade::evalharness;
namespace cp = toxcascade::corpus;
using toxcascade::vectorize::Label;

namespace {

double r3(double x) { return ev::round_half_even(x, 3); }

}  // namespace

TEST(Metrics, ConfusionFixtures) {
  struct Row {
    ev::ConfusionMatrix cm;
    double acc, p, r, f1;
  };
  const Row rows[] = {{{27, 16, 5, 52}, 0.790, 0.628, 0.844, 0.720},
                      {{29, 6, 3, 62}, 0.910, 0.829, 0.906, 0.866},
                      {{31, 32, 1, 36}, 0.670, 0.492, 0.969, 0.653}};
  for (const auto& row : rows) {
    const auto m = ev::metrics(row.cm);
    EXPECT_EQ(r3(m.accuracy), row.acc);
    EXPECT_EQ(r3(m.precision), row.p);
    EXPECT_EQ(r3(m.recall), row.r);
    EXPECT_EQ(r3(m.f1), row.f1);
  }
}

TEST(Metrics, ZeroDenominators) {
  const auto m = ev::metrics({0, 0, 4, 6});
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f1, 0.0);
  EXPECT_THROW(ev::metrics({}), toxcascade::InvalidArgument);
  EXPECT_EQ(ev::f1_score(0, 0), 0.0);
}

TEST(Metrics, F1SweepOverPublishedRows) {
  struct Row {
    const char* name;
    double p, r, f1;
  };
  const Row rows[] = {{"DistilBERT", .954, .918, .936},  {"GPT-4 Zero", .829, .906, .866},
                      {"GPT-4 RAG", .750, .938, .833},   {"GPT-4 Few", .714, .781, .746},
                      {"SGD-SVM", .938, .612, .741},     {"GPT-3.5 Zero", .628, .844, .720},
                      {"SGD-LR", .906, .585, .711},      {"GPT-3.5 RAG", .492, .969, .653},
                      {"GPT-3.5 Few", .492, .938, .645}, {"DialoGPT", .683, .514, .586}};
  for (const auto& row : rows) EXPECT_NEAR(ev::f1_score(row.p, row.r), row.f1, 0.001 + 1e-12) << row.name;
}

TEST(Metrics, PerfectAndFlipSymmetry) {
  std::mt19937_64 rng(1);
  std::vector<ev::PredictedPair> pairs, perfect, flipped;
  for (int i = 0; i < 300; ++i) {
    const Label t = rng() % 3 == 0 ? Label::Toxic : Label::Clean;
    const Label p = rng() % 4 == 0 ? (t == Label::Toxic ? Label::Clean : Label::Toxic) : t;
    pairs.push_back({p, t});
    perfect.push_back({t, t});
    flipped.push_back({p == Label::Toxic ? Label::Clean : Label::Toxic, t});
  }
  const auto pm = ev::metrics(ev::confusion(perfect));
  EXPECT_EQ(pm.accuracy, 1.0);
  EXPECT_EQ(pm.precision, 1.0);
  EXPECT_EQ(pm.recall, 1.0);
  EXPECT_EQ(pm.f1, 1.0);
  const auto a = ev::confusion(pairs), b = ev::confusion(flipped);
  EXPECT_EQ(b, (ev::ConfusionMatrix{a.fn, a.tn, a.tp, a.fp}));
  EXPECT_THROW(ev::confusion(std::vector<ev::PredictedPair>{}), toxcascade::EmptyInput);
}

TEST(Rounding, HalfEven) {
  EXPECT_EQ(ev::round_half_even(0.0625, 3), 0.062);
  EXPECT_EQ(ev::round_half_even(0.0635, 3), 0.064);
  EXPECT_EQ(ev::round_half_even(0.7201, 3), 0.720);
  EXPECT_EQ(ev::round_half_even(2.5, 0), 2.0);
}

TEST(Auc, FourPointCase) {
  const std::vector<ev::ScoredLabel> s = {
      {0.9, Label::Toxic}, {0.6, Label::Clean}, {0.6, Label::Toxic}, {0.2, Label::Clean}};
  EXPECT_DOUBLE_EQ(ev::roc_auc(s), 0.875);
  EXPECT_THROW(ev::roc_auc(std::vector<ev::ScoredLabel>{{0.1, Label::Clean}}), toxcascade::SingleClassInput);
}

TEST(Auc, MatchesPairwiseOracle) {
  std::mt19937_64 rng(2);
  for (int set = 0; set < 50; ++set) {
    const std::size_t n = 2 + rng() % 300;
    std::vector<ev::ScoredLabel> s;
    std::vector<double> scores;
    std::vector<Label> truth;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = static_cast<double>(rng() % 40) / 40.0;  // plenty of ties
      const Label l = i == 0 ? Label::Toxic : (i == 1 ? Label::Clean : (rng() % 2 ? Label::Toxic : Label::Clean));
      s.push_back({sc, l});
      scores.push_back(sc);
      truth.push_back(l);
    }
    EXPECT_NEAR(ev::roc_auc(s), oracle::pairwise_auc(scores, truth), 1e-12);
  }
}

TEST(Ranking, PrecisionAtK) {
  ev::RankedPredictions items;
  std::unordered_map<std::string, Label> labels;
  for (int i = 0; i < 10; ++i) {
    const std::string id = "i" + std::to_string(i);
    items.push_back({id, 1.0 - i * 0.01, std::nullopt});
    labels[id] = i < 7 ? Label::Toxic : Label::Clean;
  }
  const auto ranked = ev::rank(items);
  EXPECT_DOUBLE_EQ(ev::precision_at_k(ranked, labels, 10), 0.7);
  EXPECT_DOUBLE_EQ(ev::precision_at_k(ranked, labels, 1), 1.0);
  EXPECT_THROW(ev::precision_at_k(ranked, labels, 11), toxcascade::InvalidArgument);
  labels.erase("i0");
  EXPECT_THROW(ev::precision_at_k(ranked, labels, 3), toxcascade::InsufficientLabels);
}

TEST(Ranking, PrecisionAtKMatchesRecount) {
  std::mt19937_64 rng(3);
  ev::RankedPredictions items;
  std::unordered_map<std::string, Label> labels;
  for (int i = 0; i < 200; ++i) {
    const std::string id = "x" + std::to_string(i);
    items.push_back({id, static_cast<double>(rng() % 50), std::nullopt});
    labels[id] = rng() % 2 ? Label::Toxic : Label::Clean;
  }
  auto copy = items;
  std::sort(copy.begin(), copy.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  const auto ranked = ev::rank(items);
  for (std::size_t k : {1u, 7u, 50u, 200u}) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < k; ++i) hits += labels[copy[i].id] == Label::Toxic;
    EXPECT_DOUBLE_EQ(ev::precision_at_k(ranked, labels, k), static_cast<double>(hits) / k);
  }
}

TEST(Ranking, TriageTopFraction) {
  ev::RankedPredictions items;
  for (int i = 0; i < 100; ++i) items.push_back({"t" + std::to_string(i), static_cast<double>(i % 17), std::nullopt});
  const auto top = ev::triage_top_fraction(items);
  ASSERT_EQ(top.size(), 5u);
  for (const auto& id : top) EXPECT_EQ(std::stoi(id.substr(1)) % 17, 16);
  EXPECT_EQ(ev::triage_top_fraction({{"only", 0.1, std::nullopt}}).size(), 1u);
  EXPECT_THROW(ev::triage_top_fraction(items, 0.0), toxcascade::InvalidArgument);
}

TEST(Ranking, RecallAndHumanAccuracy) {
  const std::vector<double> scores = {0.9, 0.5, 0.6, 0.2};
  EXPECT_DOUBLE_EQ(ev::recall_estimate(scores, 0.5), 0.5);
  const std::vector<ev::PredictedPair> pairs = {
      {Label::Toxic, Label::Toxic}, {Label::Clean, Label::Toxic}, {Label::Clean, Label::Clean}, {Label::Toxic, Label::Toxic}};
  EXPECT_DOUBLE_EQ(ev::human_validated_accuracy(pairs), 0.75);
  EXPECT_THROW(ev::recall_estimate(std::vector<double>{}, 0.5), toxcascade::EmptyInput);
}

TEST(Cost, PublishedRows) {
  const std::vector<ev::MethodProfile> profiles = {
      {"SGD-SVM", 35, 0.5e-6, 28.2, 0.50},       {"DistilBERT", 100, 5e-6, 10.0, 5.00},
      {"GPT-3.5 Zero", 713, 1400e-6, 1.4, 1400}, {"GPT-3.5 RAG", 913, 1650e-6, 1.1, 1650}};
  const auto r = ev::cost_report(profiles);
  ASSERT_EQ(r.rows.size(), 4u);
  for (const auto& row : r.rows) {
    EXPECT_NEAR(row.throughput * row.latency_ms, 1000.0, 1e-9);
    EXPECT_LE(std::abs(row.throughput - *row.reference_throughput) / *row.reference_throughput, 0.05) << row.name;
    EXPECT_EQ(std::llround(row.cost * 100), std::llround(*row.reference_cost * 100)) << row.name;
  }
  EXPECT_NEAR(r.rows[0].throughput, 28.571, 1e-3);
  EXPECT_THROW(ev::cost_report({{"bad", 0, 1}}), toxcascade::InvalidArgument);
  EXPECT_NE(ev::format_text(r).find("SGD-SVM"), std::string::npos);
  EXPECT_NE(ev::format_csv(r).find("GPT-3.5 RAG,913,1.095290,1650.00,1.1,1650.00"), std::string::npos);
}

TEST(Cost, ModerationSavings) {
  const auto s = ev::moderation_savings({0.8, 10, 50}, 1e6);
  EXPECT_NEAR(s.hours_avoided, 0.8 * 1e6 * 10 / 3600, 1e-9);
  EXPECT_NEAR(s.usd_saved, s.hours_avoided * 50, 1e-9);
  const auto pf = ev::parse_profiles(nlohmann::json::parse(
      R"({"profiles": [{"name": "a", "latency_ms": 10, "unit_cost": 1e-6}], "savings": {"automated_fraction": 0.5}})"));
  ASSERT_TRUE(pf.savings);
  EXPECT_EQ(pf.savings->review_seconds_per_message, 10.0);
  EXPECT_EQ(pf.profiles[0].name, "a");
}

TEST(Subset, StratifiedAndSeeded) {
  const auto corpus = cp::synthesize({400, 0.4, 1});
  const auto spec = ev::parse_subset("100:0.32:7");
  EXPECT_EQ(spec.size, 100u);
  EXPECT_EQ(spec.seed, 7u);
  const auto a = ev::stratified_subset(corpus, spec);
  ASSERT_EQ(a.size(), 100u);
  std::size_t toxic = 0;
  for (auto i : a) toxic += corpus[i].label == Label::Toxic;
  EXPECT_EQ(toxic, 32u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(ev::stratified_subset(corpus, spec), a);
  EXPECT_NE(ev::stratified_subset(corpus, {100, 0.32, 8}), a);
  EXPECT_THROW(ev::stratified_subset(corpus, {400, 0.9, 1}), toxcascade::CorpusTooSmall);
  EXPECT_THROW(ev::parse_subset("100:abc:7"), toxcascade::InvalidArgument);
}

TEST(Benchmark, Tier1FullSetAndThreadDeterminism) {
  const auto corpus = cp::synthesize({654, 0.32, 3});
  auto prep = std::make_shared<toxcascade::textprep::Preprocessor>();
  auto emb = std::make_shared<toxcascade::vectorize::HashingEmbedder>();
  const auto train = cp::synthesize({600, 0.32, 4});
  auto model = std::make_shared<toxcascade::linear::LinearModel>(ev::train_tier1(train, *prep, *emb, {}));
  ev::Tier1Adapter adapter(prep, emb, model);
  const auto one = ev::run_benchmark(corpus, adapter, std::nullopt, 1);
  const auto four = ev::run_benchmark(corpus, adapter, std::nullopt, 4);
  EXPECT_EQ(one.cm.n(), 654u);
  EXPECT_EQ(one.cm, four.cm);
  ASSERT_TRUE(one.metrics.roc_auc);
  EXPECT_EQ(*one.metrics.roc_auc, *four.metrics.roc_auc);
  EXPECT_GT(one.metrics.accuracy, 0.7);

  const auto path = (std::filesystem::temp_directory_path() / "tc_predlog.jsonl").string();
  ev::write_prediction_log(one, path);
  EXPECT_EQ(ev::replay_prediction_log(path), one.cm);
  std::filesystem::remove(path);

  const auto sub = ev::run_benchmark(corpus, adapter, ev::SubsetSpec{100, 0.32, 5}, 2);
  EXPECT_EQ(sub.cm.n(), 100u);
  EXPECT_EQ(sub.cm.tp + sub.cm.fn, 32u);
}

TEST(Benchmark, MockLlmAdapter) {
  const auto corpus = cp::synthesize({300, 0.32, 6});
  std::unordered_map<std::string, Label> truth;
  for (const auto& m : corpus) truth[m.id] = m.label;
  auto provider = std::make_shared<toxcascade::llmgate::MockProvider>(
      toxcascade::llmgate::gpt35_zero_shot_profile(), 1, [truth](std::string_view id, std::string_view) {
        const auto it = truth.find(std::string(id));
        return it == truth.end() ? std::optional<Label>() : std::optional<Label>(it->second);
      });
  toxcascade::llmgate::LlmParams params;
  params.backoff_base = std::chrono::milliseconds(0);
  ev::LlmAdapter adapter(std::make_shared<toxcascade::textprep::Preprocessor>(), provider, params);
  const auto r = ev::run_benchmark(corpus, adapter, ev::SubsetSpec{100, 0.32, 1}, 3);
  EXPECT_EQ(r.method, "mock-llm");
  EXPECT_EQ(r.cm.n(), 100u);
  EXPECT_GT(r.mean_latency_ms, 400);
  EXPECT_NEAR(r.cost_total, 100 * 1400e-6, 1e-9);
}
