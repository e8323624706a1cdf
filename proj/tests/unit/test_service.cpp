#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "oracles.hpp"
#include "toxcascade/service/config.hpp"
#include "toxcascade/service/http_api.hpp"
#include "toxcascade/service/moderation_service.hpp"
#include "toxcascade/service/review.hpp"

namespace sv = toxcascade::service;
namespace cc = toxcascade::cascade;
namespace fs = std::filesystem;
using toxcascade::vectorize::Label;

namespace {

// Message text decides the scripted probabilities: "sure clean ..." stops at
// Tier 1, "sure toxic ..." is removed at Tier 1, anything else goes to a human.
std::optional<double> tier1_p(const std::string& text) {
  if (text.rfind("sure clean", 0) == 0) return 0.01;
  if (text.rfind("sure toxic", 0) == 0) return 0.99;
  if (text.rfind("lean toxic", 0) == 0) return 0.96;
  return 0.5;
}

class TextScorer final : public cc::ProbabilityScorer {
 public:
  toxcascade::linear::ToxicityScore score(const toxcascade::textprep::NormalizedMessage& m) const override {
    return {*tier1_p(m.normalized), 0, "1"};
  }
};

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

sv::ServiceConfig test_config(const fs::path& dir) {
  auto cfg = sv::default_config();
  cfg.data_dir = (dir / "data").string();
  cfg.unit_costs = sv::default_unit_costs();
  return cfg;
}

sv::ServiceParts test_parts() {
  sv::ServiceParts p;
  p.components.tier1 = std::make_shared<TextScorer>();
  p.rules = std::make_shared<toxcascade::rulefilter::RuleSetHandle>(toxcascade::rulefilter::RuleSet::compile(
      {{"slur", R"(\bzapword\b)", toxcascade::rulefilter::RuleAction::Remove, ""},
       {"spam", R"(\bfree gold\b)", toxcascade::rulefilter::RuleAction::Flag, ""}}));
  return p;
}

}  // namespace

TEST(Review, QueueLifecycle) {
  sv::ReviewQueue q;
  cc::Decision human;
  human.id = "a";
  human.action = cc::Action::Human;
  human.terminal_tier = cc::Tier::Human;
  cc::Decision allow = human;
  allow.id = "b";
  allow.action = cc::Action::Allow;
  q.enqueue(human, 1, 0);
  EXPECT_THROW(q.enqueue(allow, 2, 0), toxcascade::InvalidArgument);
  EXPECT_THROW(q.enqueue(human, 3, 0), toxcascade::Conflict);
  EXPECT_EQ(q.next_pending()->item_id, "a");
  EXPECT_THROW(q.resolve({"zz", Label::Toxic, "", 0}), toxcascade::NotFound);
  q.resolve({"a", Label::Toxic, "mod", 0});
  EXPECT_THROW(q.resolve({"a", Label::Toxic, "mod", 0}), toxcascade::Conflict);
  EXPECT_FALSE(q.next_pending());
  EXPECT_EQ(q.resolved_count(), 1u);
}

TEST(Review, RetrainCheckExamples) {
  sv::RetrainPolicy policy;
  auto stats_with = [](std::size_t n, std::size_t agree) {
    sv::AgreementStats s(200);
    for (std::size_t i = 0; i < n; ++i) s.record(Label::Toxic, i < agree ? Label::Toxic : Label::Clean);
    return s;
  };
  auto c = sv::retrain_check(stats_with(100, 95), policy);
  EXPECT_TRUE(c.due);
  EXPECT_EQ(c.reason, "volume");
  c = sv::retrain_check(stats_with(10, 8), policy);
  EXPECT_TRUE(c.due);
  EXPECT_EQ(c.reason, "metric");
  c = sv::retrain_check(stats_with(20, 19), policy);
  EXPECT_FALSE(c.due);
  EXPECT_EQ(c.reason, "none");
  c = sv::retrain_check(stats_with(100, 80), policy);
  EXPECT_EQ(c.reason, "volume+metric");
  EXPECT_FALSE(sv::retrain_check(sv::AgreementStats(200), policy).due);
  auto s = stats_with(150, 150);
  s.set_retrained_at(100);
  EXPECT_EQ(s.new_since_retrain(), 50u);
  EXPECT_FALSE(sv::retrain_check(s, policy).due);
}

TEST(Review, ActiveLearningExample) {
  std::vector<sv::LoggedDecision> log;
  const double ps[] = {0.49, 0.9, 0.07};
  for (int i = 0; i < 3; ++i) {
    cc::Decision d;
    d.id = "m" + std::to_string(i);
    d.terminal_tier = cc::Tier::T1;
    d.action = ps[i] > 0.5 ? cc::Action::Remove : cc::Action::Allow;
    cc::TrailEntry t0, t1;
    t1.tier = cc::Tier::T1;
    t1.p_toxic = ps[i];
    d.trail = {t0, t1};
    log.push_back({static_cast<std::uint64_t>(i + 1), d});
  }
  EXPECT_EQ(sv::select_active_learning_batch(log, {}, 1), std::vector<std::string>{"m0"});
  EXPECT_EQ(sv::select_active_learning_batch(log, {}, 10), (std::vector<std::string>{"m0", "m1", "m2"}));
  EXPECT_EQ(sv::select_active_learning_batch(log, {"m0"}, 1), std::vector<std::string>{"m1"});
  // equal distance: newest first
  log[2].decision.trail[1].p_toxic = 0.51;
  EXPECT_EQ(sv::select_active_learning_batch(log, {}, 2), (std::vector<std::string>{"m2", "m0"}));
}

TEST(Service, FreshStatsAreZero) {
  TempDir tmp("tc_service_fresh");
  sv::ModerationService svc(test_config(tmp.path), test_parts());
  const auto s = svc.stats();
  EXPECT_EQ(s.status, 200);
  EXPECT_EQ(s.body["ledger"]["messages"], 0);
  EXPECT_EQ(s.body["queue"]["pending"], 0);
  EXPECT_EQ(s.body["agreement"]["rolling_rate"], 1.0);
  EXPECT_EQ(s.body["retrain"]["due"], false);
  EXPECT_EQ(s.body["rules"], 2);
}

TEST(Service, ClassifyValidationAndStatuses) {
  TempDir tmp("tc_service_classify");
  sv::ModerationService svc(test_config(tmp.path), test_parts());
  EXPECT_EQ(svc.classify({{"nope", 1}}).status, 400);
  EXPECT_EQ(svc.classify({{"text", ""}}).status, 400);
  EXPECT_EQ(svc.classify({{"text", "x y"}, {"channel", 3}}).status, 400);
  auto r = svc.classify({{"id", "a"}, {"text", "sure clean message"}});
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["action"], "allow");
  EXPECT_EQ(r.body["terminal_tier"], "1");
  EXPECT_EQ(svc.classify({{"id", "a"}, {"text", "again text"}}).status, 409);
  r = svc.classify({{"text", "you zapword now"}});
  EXPECT_EQ(r.body["action"], "remove");
  EXPECT_EQ(r.body["rule_id"], "slur");
  EXPECT_EQ(r.body["id"], "m-1");
  r = svc.classify({{"id", "h"}, {"text", "not sure about this one"}});
  EXPECT_EQ(r.status, 202);
  EXPECT_EQ(r.body["review_item_id"], "h");
  r = svc.classify({{"id", "f"}, {"text", "get free gold here"}});
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["action"], "flag");
  EXPECT_EQ(svc.pending_reviews(), 2u);
  EXPECT_EQ(svc.decisions_logged(), 4u);
  r = svc.classify({{"id", "rej"}, {"text", "!!"}});
  EXPECT_EQ(r.body["reason"], "rejected:too_few_tokens");
}

TEST(Service, ReviewFeedsKnowledgeBase) {
  TempDir tmp("tc_service_review");
  sv::ModerationService svc(test_config(tmp.path), test_parts());
  svc.classify({{"id", "h1"}, {"text", "not sure about this one"}});
  svc.classify({{"id", "h2"}, {"text", "another unsure message"}});
  const auto next = svc.next_review();
  EXPECT_EQ(next.body["item"]["item_id"], "h1");
  EXPECT_EQ(next.body["pending"], 2);
  const auto kb_before = svc.kb_size();
  EXPECT_EQ(svc.submit_review("h1", {{"label", "maybe"}}).status, 400);
  EXPECT_EQ(svc.submit_review("zz", {{"label", "toxic"}}).status, 404);
  auto r = svc.submit_review("h1", {{"label", "toxic"}, {"moderator", "mod1"}});
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(svc.kb_size(), kb_before + 1);
  EXPECT_EQ(r.body["feedback_size"], 1);
  EXPECT_EQ(svc.submit_review("h1", {{"label", "clean"}}).status, 409);
  EXPECT_EQ(svc.next_review().body["item"]["item_id"], "h2");
  const auto st = svc.stats();
  EXPECT_EQ(st.body["agreement"]["total"], 1);
  EXPECT_EQ(st.body["feedback_size"], 1);
}

TEST(Service, ReplayRebuildsState) {
  TempDir tmp("tc_service_replay");
  const auto cfg = test_config(tmp.path);
  cc::CostLedger::Snapshot before;
  std::size_t kb = 0;
  {
    sv::ModerationService svc(cfg, test_parts());
    const char* texts[] = {"sure clean a", "sure toxic b", "unsure c", "zapword d", "free gold e", "unsure f"};
    int i = 0;
    for (const char* t : texts) svc.classify({{"id", "r" + std::to_string(i++)}, {"text", t}});
    svc.submit_review("r2", {{"label", "clean"}});
    before = svc.ledger_snapshot();
    kb = svc.kb_size();
  }
  {
    // torn final line from a crash mid-write
    std::ofstream out(fs::path(cfg.data_dir) / "decisions.jsonl", std::ios::app);
    out << R"({"seq": 99, "decis)";
  }
  sv::ModerationService again(cfg, test_parts());
  const auto after = again.ledger_snapshot();
  EXPECT_EQ(after.messages, before.messages);
  EXPECT_EQ(after.invocations, before.invocations);
  EXPECT_EQ(after.terminal_counts, before.terminal_counts);
  EXPECT_EQ(after.action_counts, before.action_counts);
  EXPECT_DOUBLE_EQ(after.cost_total, before.cost_total);
  EXPECT_EQ(again.kb_size(), kb);
  EXPECT_EQ(again.pending_reviews(), 2u);
  EXPECT_EQ(again.decisions_logged(), 6u);
  EXPECT_EQ(again.classify({{"id", "r0"}, {"text", "dup id"}}).status, 409);
  EXPECT_EQ(again.classify({{"id", "new"}, {"text", "sure clean z"}}).status, 200);
  EXPECT_EQ(sv::JsonlLog::read_all(again.decisions_path()).size(), 7u);
}

TEST(Service, ActiveLearningEndpoint) {
  TempDir tmp("tc_service_al");
  sv::ModerationService svc(test_config(tmp.path), test_parts());
  svc.classify({{"id", "a"}, {"text", "sure clean one"}});
  svc.classify({{"id", "b"}, {"text", "lean toxic two"}});
  svc.classify({{"id", "c"}, {"text", "sure toxic three"}});
  const auto r = svc.active_learning(1);
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["ids"], nlohmann::json::array({"b"}));
  EXPECT_EQ(svc.active_learning(0).status, 400);
}

TEST(Service, RuleReload) {
  TempDir tmp("tc_service_rules");
  auto cfg = test_config(tmp.path);
  EXPECT_EQ(sv::ModerationService(cfg, test_parts()).reload_rules().status, 400);
  cfg.rules_path = (tmp.path / "rules.jsonl").string();
  {
    std::ofstream(cfg.rules_path) << R"({"id": "n1", "pattern": "\\bnoob\\b", "action": "remove"})" << '\n';
  }
  sv::ModerationService svc(cfg, test_parts());
  const auto ok = svc.reload_rules();
  EXPECT_EQ(ok.status, 200);
  EXPECT_EQ(ok.body["rules"], 1);
  EXPECT_EQ(svc.classify({{"text", "such a noob player"}}).body["rule_id"], "n1");
  {
    std::ofstream(cfg.rules_path) << R"({"id": "broken", "pattern": "(", "action": "remove"})" << '\n';
  }
  const auto bad = svc.reload_rules();
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(bad.body["rule_id"], "broken");
  EXPECT_EQ(svc.stats().body["rules"], 1);
}

TEST(Http, EndpointsOverLoopback) {
  TempDir tmp("tc_service_http");
  sv::ModerationService svc(test_config(tmp.path), test_parts());
  sv::HttpServer server(svc);
  const int port = server.bind_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  auto res = cli.Get("/healthz");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  res = cli.Post("/v1/classify", R"({"id": "x1", "text": "unsure words here"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 202);
  res = cli.Post("/v1/classify", "{not json", "application/json");
  EXPECT_EQ(res->status, 400);
  res = cli.Get("/v1/review/next");
  EXPECT_EQ(nlohmann::json::parse(res->body)["item"]["item_id"], "x1");
  res = cli.Post("/v1/review/x1", R"({"label": "clean"})", "application/json");
  EXPECT_EQ(res->status, 200);
  res = cli.Post("/v1/review/x1", R"({"label": "clean"})", "application/json");
  EXPECT_EQ(res->status, 409);
  res = cli.Post("/v1/review/nothing", R"({"label": "clean"})", "application/json");
  EXPECT_EQ(res->status, 404);
  res = cli.Get("/v1/stats");
  EXPECT_EQ(nlohmann::json::parse(res->body)["ledger"]["messages"], 1);
  res = cli.Get("/v1/active-learning?n=abc");
  EXPECT_EQ(res->status, 400);
  res = cli.Get("/v1/active-learning?n=3");
  EXPECT_EQ(res->status, 200);
  res = cli.Post("/admin/rules/reload", "", "application/json");
  EXPECT_EQ(res->status, 400);

  server.stop();
  t.join();
}

TEST(Config, ParseAndDefaults) {
  const auto cfg = sv::parse_config(nlohmann::json::parse(R"({"data_dir": "d", "listen": {"port": 9000},
      "thresholds": {"t3_act": 0.85}, "retrain": {"min_new_decisions": 50}})"),
                                    "/base");
  EXPECT_EQ(cfg.data_dir, "/base/d");
  EXPECT_EQ(cfg.port, 9000);
  EXPECT_DOUBLE_EQ(cfg.thresholds.t3_act, 0.85);
  EXPECT_DOUBLE_EQ(cfg.thresholds.t1_allow, 0.05);
  EXPECT_EQ(cfg.retrain.min_new_decisions, 50u);
  const auto costs = sv::default_unit_costs();
  EXPECT_DOUBLE_EQ(costs.of(cc::Tier::T1), 0.5e-6);
  EXPECT_DOUBLE_EQ(costs.of(cc::Tier::T3), 1650e-6);
  EXPECT_THROW(sv::parse_config(nlohmann::json::parse(R"({"thresholds": {"t1_allow": 0.99}})")),
               toxcascade::Error);
}
