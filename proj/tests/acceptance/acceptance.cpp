// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "oracles.hpp"
#include "toxcascade/cascade.hpp"
#include "toxcascade/corpus.hpp"
#include "toxcascade/evalharness.hpp"
#include "toxcascade/kernels.hpp"
#include "toxcascade/linear.hpp"
#include "toxcascade/llmgate.hpp"
#include "toxcascade/rulefilter.hpp"
#include "toxcascade/service/moderation_service.hpp"
#include "toxcascade/textprep.hpp"
#include "toxcascade/vectorize.hpp"

namespace cc = toxcascade::cascade;
namespace cp = toxcascade::corpus;
namespace ev = toxcascade::evalharness;
namespace lg = toxcascade::llmgate;
namespace ln = toxcascade::linear;
namespace rf = toxcascade::rulefilter;
namespace sv = toxcascade::service;
namespace tp = toxcascade::textprep;
namespace vz = toxcascade::vectorize;
namespace fs = std::filesystem;
using vz::Label;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome metric_fixtures() {
  struct Row {
    const char* name;
    ev::ConfusionMatrix cm;
    double acc, p, r, f1;
  };
  const Row rows[] = {{"GPT-3.5 zero", {27, 16, 5, 52}, 0.790, 0.628, 0.844, 0.720},
                      {"GPT-4 zero", {29, 6, 3, 62}, 0.910, 0.829, 0.906, 0.866},
                      {"GPT-3.5 RAG", {31, 32, 1, 36}, 0.670, 0.492, 0.969, 0.653}};
  for (const auto& row : rows) {
    const auto m = ev::metrics(row.cm);
    const double got[] = {m.accuracy, m.precision, m.recall, m.f1};
    const double want[] = {row.acc, row.p, row.r, row.f1};
    for (int i = 0; i < 4; ++i) {
      if (ev::round_half_even(got[i], 3) != want[i]) {
        return {false, std::string(row.name) + " field " + std::to_string(i) + " = " + fmt("%.6f", got[i])};
      }
    }
  }
  return {true, "3 matrices x 4 metrics"};
}

Outcome f1_sweep() {
  struct Row {
    const char* name;
    double p, r, f1;
  };
  const Row rows[] = {{"DistilBERT", .954, .918, .936},  {"GPT-4 Zero", .829, .906, .866},
                      {"GPT-4 RAG", .750, .938, .833},   {"GPT-4 Few", .714, .781, .746},
                      {"SGD-SVM", .938, .612, .741},     {"GPT-3.5 Zero", .628, .844, .720},
                      {"SGD-LR", .906, .585, .711},      {"GPT-3.5 RAG", .492, .969, .653},
                      {"GPT-3.5 Few", .492, .938, .645}, {"DialoGPT", .683, .514, .586}};
  double worst = 0;
  for (const auto& row : rows) {
    const double err = std::abs(ev::f1_score(row.p, row.r) - row.f1);
    worst = std::max(worst, err);
    if (err > 0.001 + 1e-12) return {false, std::string(row.name) + fmt(" off by %.5f", err)};
  }
  return {true, "10 rows, max deviation " + fmt("%.5f", worst)};
}

Outcome cost_table() {
  // latency ms, per-message cost, published msg/s, published cost per 1M
  const std::vector<ev::MethodProfile> profiles = {
      {"SGD-SVM", 35, 0.5e-6, 28.2, 0.50},        {"DistilBERT", 100, 5e-6, 10.0, 5.00},
      {"DialoGPT", 156, 5e-6, 6.4, 5.00},         {"SGD-LR", 161, 2.2e-6, 6.2, 2.20},
      {"GPT-3.5 Few", 694, 1360e-6, 1.4, 1360},   {"GPT-3.5 Zero", 713, 1400e-6, 1.4, 1400},
      {"GPT-3.5 RAG", 913, 1650e-6, 1.1, 1650},   {"GPT-4 Few/Zero", 1100, 1400e-6, 0.9, 1400},
      {"GPT-4 RAG", 1300, 1650e-6, 0.8, 1650}};
  const auto report = ev::cost_report(profiles, 1e6);
  double worst = 0;
  for (const auto& row : report.rows) {
    const double rel = std::abs(row.throughput - *row.reference_throughput) / *row.reference_throughput;
    worst = std::max(worst, rel);
    if (rel > 0.05) return {false, row.name + fmt(" throughput off by %.1f%%", rel * 100)};
    if (std::llround(row.cost * 100) != std::llround(*row.reference_cost * 100)) {
      return {false, row.name + fmt(" cost %.2f", row.cost)};
    }
  }
  return {true, std::to_string(report.rows.size()) + " rows, worst throughput deviation " + fmt("%.1f%%", worst * 100)};
}

Outcome auc_oracle() {
  std::mt19937_64 rng(2024);
  double worst = 0;
  for (int set = 0; set < 200; ++set) {
    const std::size_t n = 2 + rng() % 499;
    std::vector<ev::ScoredLabel> scored;
    std::vector<double> scores;
    std::vector<Label> truth;
    const bool coarse = set % 2 == 0;  // half the sets carry many ties
    for (std::size_t i = 0; i < n; ++i) {
      const double s = coarse ? static_cast<double>(rng() % 25) / 25.0
                              : std::uniform_real_distribution<double>(0, 1)(rng);
      const Label l = i == 0 ? Label::Toxic : (i == 1 ? Label::Clean : (rng() % 3 == 0 ? Label::Toxic : Label::Clean));
      scored.push_back({s, l});
      scores.push_back(s);
      truth.push_back(l);
    }
    const double err = std::abs(ev::roc_auc(scored) - oracle::pairwise_auc(scores, truth));
    worst = std::max(worst, err);
    if (err > 1e-12) return {false, "set " + std::to_string(set) + fmt(" differs by %.3g", err)};
  }
  return {true, "200 sets, max |diff| " + fmt("%.2g", worst)};
}

Outcome knn_oracle() {
  std::mt19937_64 rng(77);
  std::normal_distribution<float> g(0.f, 1.f);
  const std::size_t dims = vz::kDefaultDims;
  std::vector<std::vector<float>> centers(20, std::vector<float>(dims));
  for (auto& c : centers)
    for (auto& x : c) x = g(rng);
  auto sample = [&](std::size_t cluster, float noise) {
    auto v = centers[cluster];
    for (auto& x : v) x += noise * g(rng);
    return vz::make_unit(v);
  };
  vz::KnnIndex index(dims, 0);
  std::vector<std::vector<float>> rows;
  for (std::size_t i = 0; i < 1000; ++i) {
    auto v = sample(i % centers.size(), i % 3 == 0 ? 0.4f : 0.9f);
    rows.push_back(v.values);
    index.insert("e" + std::to_string(i), v, i % 2 ? Label::Toxic : Label::Clean, "");
  }
  const vz::RetrievalConfig cfg{5, 0.7};
  std::size_t total_hits = 0, truncated = 0, filtered = 0;
  for (int q = 0; q < 100; ++q) {
    const auto query = sample(rng() % centers.size(), 0.3f + 0.5f * static_cast<float>(q % 3));
    const auto got = index.query(query, cfg);
    const auto want = oracle::brute_force_knn(rows, query.values, cfg.k, cfg.min_similarity);
    if (got.size() != want.size()) return {false, "query " + std::to_string(q) + " size mismatch"};
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (got[i].position != want[i].position) return {false, "query " + std::to_string(q) + " order mismatch"};
      if (std::abs(got[i].similarity - static_cast<double>(want[i].similarity)) > 1e-9) {
        return {false, "query " + std::to_string(q) + " similarity mismatch"};
      }
    }
    const auto all = oracle::brute_force_knn(rows, query.values, rows.size(), cfg.min_similarity);
    truncated += all.size() > cfg.k;
    filtered += all.size() < cfg.k;
    total_hits += got.size();
  }
  if (truncated == 0 || filtered == 0) return {false, "query mix did not exercise both k and threshold cut-offs"};
  return {true, std::to_string(total_hits) + " hits; " + std::to_string(truncated) + " queries truncated at k, " +
                    std::to_string(filtered) + " thinned by the 0.7 floor"};
}

Outcome tier0_latency() {
  std::vector<rf::RuleSpec> specs;
  std::mt19937_64 rng(5);
  const char* stems[] = {"trash", "noob", "idiot", "loser", "uninstall", "feeder", "scrub", "clown", "bot", "garbage"};
  for (int i = 0; i < 200; ++i) {
    std::string pat = std::string("\\b") + stems[i % 10] + std::to_string(i) + "(?:s|z+)?\\b";
    if (i % 7 == 0) pat = std::string("\\bkys") + std::to_string(i) + "\\b";
    specs.push_back({"r" + std::to_string(i), pat, i % 5 ? rf::RuleAction::Remove : rf::RuleAction::Flag, ""});
  }
  const auto rules = rf::RuleSet::compile(specs);
  const auto corpus = cp::synthesize({2000, 0.32, 9});
  tp::Preprocessor prep;
  std::vector<tp::NormalizedMessage> msgs;
  for (const auto& m : corpus) {
    auto r = prep.normalize({m.id, m.text, std::nullopt, 0});
    if (auto* n = std::get_if<tp::NormalizedMessage>(&r)) msgs.push_back(std::move(*n));
  }
  // a slice of the traffic trips a rule
  for (std::size_t i = 0; i < msgs.size(); i += 40) msgs[i].normalized += " noob11";
  const std::size_t n = 100000;
  std::size_t hits = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < n; ++i) hits += rules.screen(msgs[i % msgs.size()]).matched.has_value();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double mean_ms = secs * 1000.0 / static_cast<double>(n);
  return {mean_ms < 1.0 && hits > 0,
          fmt("mean %.4f ms/message", mean_ms) + " over 10^5 messages, " + std::to_string(hits) + " rule hits"};
}

Outcome cascade_properties() {
  const cc::TierThresholds th;
  const double boundary[] = {0.05, 0.95, 0.10, 0.90, 0.80};
  const double interior[] = {0.0, 0.01, 0.04, 0.3, 0.5, 0.7, 0.85, 0.96, 0.99, 1.0};
  std::mt19937_64 rng(99);
  auto pick = [&]() -> std::optional<double> {
    const auto r = rng() % 20;
    if (r == 0) return std::nullopt;
    if (r < 8) return boundary[rng() % std::size(boundary)];
    return interior[rng() % std::size(interior)];
  };
  std::size_t n = 0, human = 0, oracle_human = 0, boundary_hits = 0;
  for (bool with_2b : {false, true}) {
    oracle::ScriptedCascade sc(th, with_2b, {{0.0, 0.5e-6, 1400e-6, 5e-6, 1650e-6}});
    for (int i = 0; i < 5000; ++i) {
      const oracle::TierScript s{rng() % 25 == 0, pick(), pick(), pick(), pick()};
      const auto id = "p" + std::to_string(i);
      const auto d = sc.cascade->route(sc.add(id, s));
      ++n;
      // totality
      if (d.id != id || d.trail.empty()) return {false, id + ": no decision trail"};
      // short-circuit: the trail ends at the terminal tier and no later tier ran
      if (d.terminal_tier != cc::Tier::Human && d.trail.back().tier != d.terminal_tier) {
        return {false, id + ": tiers ran past the terminal tier"};
      }
      const auto want = oracle::expected_route(s, th, with_2b);
      if (d.terminal_tier != want.tier || d.action != want.action) {
        return {false, id + ": routed to tier " + cc::to_string(d.terminal_tier) + ", oracle says " +
                           cc::to_string(want.tier)};
      }
      for (const auto& e : d.trail) {
        if (!e.p_toxic) continue;
        for (double b : boundary) {
          if (*e.p_toxic == b) {
            const auto band = th.band(e.tier);
            if (b == band.low || b == band.high) {
              ++boundary_hits;
              if (e.tier == d.terminal_tier) return {false, id + ": boundary value terminated"};
            }
          }
        }
      }
      human += d.terminal_tier == cc::Tier::Human;
      oracle_human += oracle::trail_inside_all_bands(d, th) && !s.rule_remove;
    }
  }
  if (human != oracle_human) {
    return {false, "human " + std::to_string(human) + " vs trail replay " + std::to_string(oracle_human)};
  }
  return {true, std::to_string(n) + " messages, " + std::to_string(boundary_hits) + " exact-boundary scores, human " +
                    fmt("%.4f", static_cast<double>(human) / static_cast<double>(n))};
}

Outcome mock_operating_point() {
  const auto op = lg::gpt35_zero_shot_profile();
  const int n_toxic = 3200, n_clean = 6800;
  lg::MockProvider mock(op, 7, [](std::string_view id, std::string_view) {
    return std::optional<Label>(id[0] == 't' ? Label::Toxic : Label::Clean);
  });
  tp::NormalizedMessage msg;
  msg.normalized = "placeholder chat message";
  lg::LlmParams params;
  params.backoff_base = std::chrono::milliseconds(0);
  int missed = 0, false_alarms = 0;
  for (int i = 0; i < n_toxic + n_clean; ++i) {
    const bool toxic = i < n_toxic;
    const std::string id = (toxic ? "t" : "c") + std::to_string(i);
    const auto out = lg::classify(mock, lg::build_zero_shot_prompt(msg), params, id);
    if (!out.ok()) return {false, "mock returned an error"};
    if (toxic && out.verdict->label == Label::Clean) ++missed;
    if (!toxic && out.verdict->label == Label::Toxic) ++false_alarms;
  }
  auto z = [](int k, int n, double p) { return (k - n * p) / std::sqrt(n * p * (1 - p)); };
  const double zm = z(missed, n_toxic, op.toxic_miss_rate);
  const double zf = z(false_alarms, n_clean, op.clean_false_alarm_rate);
  return {std::abs(zm) <= 3 && std::abs(zf) <= 3,
          fmt("miss %.4f", static_cast<double>(missed) / n_toxic) + fmt(" (z=%.2f)", zm) +
              fmt(", false alarm %.4f", static_cast<double>(false_alarms) / n_clean) + fmt(" (z=%.2f)", zf)};
}

Outcome gradient_check() {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0, 1);
  const std::size_t dims = 24;
  double worst = 0;
  int checked = 0;
  for (auto loss : {ln::Loss::Hinge, ln::Loss::Log}) {
    for (int inst = 0; inst < 100;) {
      std::vector<double> w(dims);
      std::vector<float> x(dims);
      for (auto& v : w) v = 0.4 * g(rng);
      for (auto& v : x) v = static_cast<float>(g(rng));
      const double b = 0.2 * g(rng), alpha = 1e-3, sw = 0.5 + std::abs(g(rng));
      const int y = inst % 2 ? 1 : -1;
      double m = b;
      for (std::size_t i = 0; i < dims; ++i) m += w[i] * x[i];
      if (loss == ln::Loss::Hinge && std::abs(1 - y * m) < 1e-3) continue;  // kink
      ++inst;
      const auto grad = ln::example_gradient(loss, w, b, x, y, alpha, sw);
      std::vector<double> fd(dims + 1);
      const double h = 1e-6;
      for (std::size_t i = 0; i <= dims; ++i) {
        auto wp = w, wm = w;
        double bp = b, bm = b;
        if (i < dims) {
          wp[i] += h;
          wm[i] -= h;
        } else {
          bp += h;
          bm -= h;
        }
        fd[i] = (ln::example_objective(loss, wp, bp, x, y, alpha, sw) - ln::example_objective(loss, wm, bm, x, y, alpha, sw)) /
                (2 * h);
      }
      double diff = 0, na = 0, nb = 0;
      for (std::size_t i = 0; i <= dims; ++i) {
        const double a = i < dims ? grad.dw[i] : grad.db;
        diff += (a - fd[i]) * (a - fd[i]);
        na += a * a;
        nb += fd[i] * fd[i];
      }
      const double rel = std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
      worst = std::max(worst, rel);
      ++checked;
      // the update is a step against the gradient
      auto w2 = w;
      double b2 = b;
      ln::sgd_step(loss, w2, b2, x, y, alpha, sw, 1e-3);
      for (std::size_t i = 0; i < dims; ++i) {
        if (std::abs((w2[i] - w[i]) + 1e-3 * grad.dw[i]) > 1e-12) return {false, "sgd_step disagrees with gradient"};
      }
    }
  }
  if (worst > 1e-5) return {false, fmt("max relative error %.3g", worst)};

  // separable toy set
  std::vector<ln::LabeledVector> data;
  std::normal_distribution<float> gf(0.f, 1.f);
  for (int i = 0; i < 400; ++i) {
    std::vector<float> v(32);
    for (auto& x : v) x = 0.3f * gf(rng);
    const bool toxic = i % 3 == 0;
    v[0] = toxic ? 1.5f + std::abs(gf(rng)) : -1.5f - std::abs(gf(rng));
    data.push_back({vz::make_unit(v), toxic ? Label::Toxic : Label::Clean});
  }
  for (auto loss : {ln::Loss::Hinge, ln::Loss::Log}) {
    ln::TrainConfig cfg;
    cfg.loss = loss;
    cfg.seed = 3;
    const auto model = ln::train_sgd(data, cfg);
    std::vector<ev::ScoredLabel> margins;
    std::size_t correct = 0;
    for (const auto& e : data) {
      const double m = ln::decision(model, e.x);
      margins.push_back({m, e.label});
      correct += (m > 0) == (e.label == Label::Toxic);
    }
    const double acc = static_cast<double>(correct) / data.size();
    const double auc = ev::roc_auc(margins);
    if (acc != 1.0 || auc != 1.0) {
      return {false, std::string(ln::to_string(loss)) + fmt(" accuracy %.4f", acc) + fmt(" auc %.4f", auc)};
    }
  }
  return {true, std::to_string(checked) + fmt(" instances, max relative error %.2g", worst) +
                    "; separable set accuracy 1.0, AUC 1.0 for both losses"};
}

// ---------------------------------------------------------------------------

sv::ServiceParts desk_parts(const sv::ServiceConfig& cfg, const std::vector<cp::LabeledMessage>& traffic,
                            const std::vector<cp::LabeledMessage>& history) {
  sv::ServiceParts p;
  p.prep = std::make_shared<tp::Preprocessor>(cfg.prep);
  p.rules = std::make_shared<rf::RuleSetHandle>(rf::RuleSet::compile(
      {{"threat", R"(\bkys\b)", rf::RuleAction::Remove, ""}, {"spam", R"(\bfree\s+gold\b)", rf::RuleAction::Flag, ""}}));
  auto embedder = std::make_shared<vz::HashingEmbedder>(cfg.embed_dims, cfg.embed_seed);
  p.embedder = embedder;
  p.kb = sv::build_kb(history, *p.prep, *embedder);

  ln::TrainConfig svm;
  svm.seed = 1;
  auto tier1 = std::make_shared<ln::LinearModel>(ev::train_tier1(history, *p.prep, *embedder, svm));
  ln::TrainConfig lr = svm;
  lr.loss = ln::Loss::Log;
  auto tier2b = std::make_shared<ln::LinearModel>(ev::train_tier1(history, *p.prep, *embedder, lr));

  const auto truth = sv::truth_from_corpus(traffic);
  p.components.tier1 = std::make_shared<cc::LinearScorer>(embedder, tier1);
  p.components.tier2a = cc::LlmStage{sv::make_provider(cfg.tier2a, truth), cfg.tier2a.params, std::nullopt};
  p.components.tier2b = std::make_shared<cc::LinearScorer>(embedder, tier2b);
  p.components.tier3 = cc::RagStage{sv::make_provider(cfg.tier3, truth), cfg.tier3.params, embedder, p.kb, cfg.retrieval};
  return p;
}

bool same_counters(const cc::CostLedger::Snapshot& a, const cc::CostLedger::Snapshot& b) {
  return a.messages == b.messages && a.rejected == b.rejected && a.invocations == b.invocations &&
         a.terminal_counts == b.terminal_counts && a.action_counts == b.action_counts &&
         a.total_latency_us == b.total_latency_us && a.tier_latency_us == b.tier_latency_us &&
         std::abs(a.cost_total - b.cost_total) <= 1e-12 * std::max(1.0, a.cost_total);
}

Outcome end_to_end() {
  const fs::path dir = fs::temp_directory_path() / ("toxcascade_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  struct Cleanup {
    fs::path p;
    ~Cleanup() { fs::remove_all(p); }
  } cleanup{dir};

  auto cfg = sv::default_config();
  cfg.data_dir = (dir / "data").string();
  cfg.tier2a.params.backoff_base = std::chrono::milliseconds(0);
  cfg.tier3.params.backoff_base = std::chrono::milliseconds(0);
  // Hedged answers keep some traffic flowing past the LLM tiers.
  cfg.tier2a.profile.uncertain_rate = 0.3;
  cfg.tier2a.seed = 2;
  cfg.tier3.profile.uncertain_rate = 0.25;

  const auto traffic = cp::synthesize({1000, 0.32, 2026});
  auto history = cp::synthesize({1500, 0.32, 77});
  for (auto& m : history) m.id = "hist-" + m.id;
  std::size_t toxic = 0;
  for (const auto& m : traffic) toxic += m.label == Label::Toxic;
  if (toxic != 320) return {false, "synthetic corpus is not 32% toxic"};

  cc::CostLedger::Snapshot live;
  std::set<std::string> human_ids, band_ids;
  std::size_t responses = 0;
  {
    sv::ModerationService svc(cfg, desk_parts(cfg, traffic, history));
    for (const auto& m : traffic) {
      const auto r = svc.classify({{"id", m.id}, {"text", m.text}, {"channel", "desk"}});
      if (r.status != 200 && r.status != 202) return {false, m.id + ": status " + std::to_string(r.status)};
      ++responses;
    }
    live = svc.ledger_snapshot();
  }

  // (a) every message logged exactly once
  const auto records = sv::JsonlLog::read_all((fs::path(cfg.data_dir) / "decisions.jsonl").string());
  std::unordered_map<std::string, int> seen;
  std::vector<cc::Decision> decisions;
  for (const auto& j : records) {
    auto rec = sv::decision_record_from_json(j);
    ++seen[rec.decision.id];
    decisions.push_back(std::move(rec.decision));
  }
  if (records.size() != traffic.size()) return {false, std::to_string(records.size()) + " log lines for 1000 messages"};
  for (const auto& m : traffic) {
    if (seen[m.id] != 1) return {false, m.id + " logged " + std::to_string(seen[m.id]) + " times"};
  }

  // (b) crash-replay: torn tail plus a fresh process rebuilds the same counters
  {
    std::ofstream out(fs::path(cfg.data_dir) / "decisions.jsonl", std::ios::app);
    out << R"({"seq": 1001, "received_at_ms": 0, "decision": {"id": "torn)";
  }
  sv::ModerationService replayed(cfg, desk_parts(cfg, traffic, history));
  if (!same_counters(live, replayed.ledger_snapshot())) return {false, "replayed counters differ"};

  // (c) Human set equals the set whose every tier score sat inside its band
  for (const auto& d : decisions) {
    if (d.terminal_tier == cc::Tier::Human) human_ids.insert(d.id);
    if (oracle::trail_inside_all_bands(d, cfg.thresholds)) band_ids.insert(d.id);
  }
  if (human_ids != band_ids) {
    return {false, std::to_string(human_ids.size()) + " human vs " + std::to_string(band_ids.size()) + " inside bands"};
  }
  const auto report = cc::summarize(live);
  std::string inv;
  for (auto c : report.invocations) inv += " " + std::to_string(c);
  if (human_ids.empty()) return {false, "no message reached a human (tier invocations" + inv + ")"};
  for (std::size_t t = 1; t < cc::kScoringTiers; ++t) {
    if (report.invocations[t] == 0) return {false, "tier index " + std::to_string(t) + " never ran"};
  }
  return {true, std::to_string(responses) + " messages, " + std::to_string(human_ids.size()) + " to human; " +
                    fmt("automated fraction %.3f", report.automated_fraction) +
                    fmt(", cost per 1M $%.2f", report.cost_per_million)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"metric-arithmetic fixtures", 1, metric_fixtures},
      {"F1-consistency sweep", 1, f1_sweep},
      {"cost-table reproduction", 1, cost_table},
      {"ROC-AUC oracle equivalence", 30, auc_oracle},
      {"k-NN oracle equivalence", 30, knn_oracle},
      {"tier-0 latency budget", 120, tier0_latency},
      {"cascade routing property suite", 60, cascade_properties},
      {"mock-provider operating point", 60, mock_operating_point},
      {"linear-model gradient check", 60, gradient_check},
      {"end-to-end desk-scale run", 120, end_to_end},
  };
  std::printf("kernels: %s\n", toxcascade::kernels::active().name);
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt(" (over the %.0f s budget)", c.budget_s);
    }
    failed += !o.pass;
    std::printf("%s  %-32s %8.3fs  %s\n", o.pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
