#include "toxcascade/service/moderation_service.hpp"

#include <filesystem>
#include <iostream>
#include <unordered_map>

#include "toxcascade/errors.hpp"
#include "toxcascade/evalharness.hpp"

namespace toxcascade::service {

namespace fs = std::filesystem;

namespace {

nlohmann::json error_body(const std::string& msg) { return {{"error", msg}}; }

nlohmann::json decision_summary(const cascade::Decision& d) {
  nlohmann::json j{{"id", d.id},
                   {"action", cascade::to_string(d.action)},
                   {"terminal_tier", cascade::to_string(d.terminal_tier)},
                   {"reason", d.reason},
                   {"latency_us", d.latency_total_us},
                   {"cost", d.cost_total},
                   {"trail", cascade::to_json(d)["trail"]}};
  if (!d.trail.empty() && d.trail.front().rule_id) j["rule_id"] = *d.trail.front().rule_id;
  if (const auto p = d.final_p()) j["p_toxic"] = *p;
  return j;
}

vectorize::EmbeddingVector embed_or_zero(const vectorize::TextEmbedder& embedder, const textprep::Preprocessor& prep,
                                         const std::string& id, const std::string& text) {
  const auto r = prep.normalize({id, text, std::nullopt, 0});
  if (const auto* n = std::get_if<textprep::NormalizedMessage>(&r)) {
    try {
      return embedder.embed(*n);
    } catch (const DegenerateInput&) {
    }
  }
  return vectorize::make_unit(std::vector<float>(embedder.dims(), 0.0f));
}

}  // namespace

llmgate::GroundTruth truth_from_corpus(const std::vector<corpus::LabeledMessage>& corpus) {
  auto labels = std::make_shared<std::unordered_map<std::string, vectorize::Label>>();
  for (const auto& m : corpus) labels->emplace(m.id, m.label);
  return [labels](std::string_view id, std::string_view) -> std::optional<vectorize::Label> {
    const auto it = labels->find(std::string(id));
    if (it == labels->end()) return std::nullopt;
    return it->second;
  };
}

std::shared_ptr<llmgate::LlmProvider> make_provider(const ProviderConfig& cfg, llmgate::GroundTruth truth) {
  if (cfg.kind == "none") return nullptr;
  if (cfg.kind == "http") return std::make_shared<llmgate::HttpProvider>(cfg.endpoint, cfg.path);
  return std::make_shared<llmgate::MockProvider>(cfg.profile, cfg.seed, std::move(truth));
}

std::unique_ptr<vectorize::KnnIndex> build_kb(const std::vector<corpus::LabeledMessage>& corpus,
                                              const textprep::Preprocessor& prep,
                                              const vectorize::HashingEmbedder& embedder) {
  auto index = std::make_unique<vectorize::KnnIndex>(embedder.dims(), embedder.seed());
  for (const auto& m : corpus) {
    const auto r = prep.normalize({m.id, m.text, std::nullopt, 0});
    const auto* n = std::get_if<textprep::NormalizedMessage>(&r);
    if (!n || index->contains(m.id)) continue;
    try {
      index->insert(m.id, embedder.embed(*n), m.label, n->normalized);
    } catch (const DegenerateInput&) {
    }
  }
  return index;
}

ServiceParts build_parts(const ServiceConfig& cfg) {
  ServiceParts p;
  p.prep = std::make_shared<textprep::Preprocessor>(cfg.prep);
  p.rules = cfg.rules_path.empty() ? std::make_shared<rulefilter::RuleSetHandle>()
                                   : std::make_shared<rulefilter::RuleSetHandle>(
                                         rulefilter::RuleSet::compile(rulefilter::load_rules_file(cfg.rules_path)));
  auto embedder = std::make_shared<vectorize::HashingEmbedder>(cfg.embed_dims, cfg.embed_seed);
  p.embedder = embedder;

  if (!cfg.kb_snapshot.empty() && fs::exists(cfg.kb_snapshot)) {
    p.kb = vectorize::KnnIndex::load(cfg.kb_snapshot);
    if (p.kb->dims() != cfg.embed_dims) throw DimensionMismatch(cfg.embed_dims, p.kb->dims());
  } else if (!cfg.kb_corpus.empty()) {
    p.kb = build_kb(corpus::load(cfg.kb_corpus), *p.prep, *embedder);
  } else {
    p.kb = std::make_shared<vectorize::KnnIndex>(cfg.embed_dims, cfg.embed_seed);
  }

  llmgate::GroundTruth truth;
  if (!cfg.mock_truth_corpus.empty()) truth = truth_from_corpus(corpus::load(cfg.mock_truth_corpus));

  auto& c = p.components;
  if (!cfg.model_path.empty()) {
    if (!fs::exists(cfg.model_path)) throw Error("model file not found: " + cfg.model_path + " (run `train` first)");
    auto model = std::make_shared<linear::LinearModel>(linear::load_model(cfg.model_path));
    if (model->dims() != cfg.embed_dims) throw DimensionMismatch(cfg.embed_dims, model->dims());
    c.tier1 = std::make_shared<cascade::LinearScorer>(embedder, model);
  }
  if (auto prov = make_provider(cfg.tier2a, truth)) c.tier2a = cascade::LlmStage{prov, cfg.tier2a.params, std::nullopt};
  if (auto prov = make_provider(cfg.tier3, truth)) {
    c.tier3 = cascade::RagStage{prov, cfg.tier3.params, embedder, p.kb, cfg.retrieval};
  }
  return p;
}

ModerationService::ModerationService(const ServiceConfig& cfg) : ModerationService(cfg, build_parts(cfg)) {}

ModerationService::ModerationService(const ServiceConfig& cfg, ServiceParts parts)
    : cfg_(cfg),
      parts_(std::move(parts)),
      decisions_log_((fs::path(cfg.data_dir) / "decisions.jsonl").string()),
      human_log_((fs::path(cfg.data_dir) / "human_decisions.jsonl").string()),
      feedback_log_((fs::path(cfg.data_dir) / "feedback.jsonl").string()),
      ledger_(cfg.unit_costs),
      agreement_(cfg.retrain.agreement_window) {
  cfg_.validate();
  if (!parts_.prep) parts_.prep = std::make_shared<textprep::Preprocessor>(cfg_.prep);
  if (!parts_.rules) parts_.rules = std::make_shared<rulefilter::RuleSetHandle>();
  if (!parts_.embedder) parts_.embedder = std::make_shared<vectorize::HashingEmbedder>(cfg_.embed_dims, cfg_.embed_seed);
  if (!parts_.kb) parts_.kb = std::make_shared<vectorize::KnnIndex>(parts_.embedder->dims());
  parts_.components.prep = parts_.prep;
  parts_.components.rules = parts_.rules;
  cascade_ = std::make_unique<cascade::Cascade>(parts_.components, cfg_.thresholds, cfg_.unit_costs);
  replay();
}

std::string ModerationService::decisions_path() const { return decisions_log_.path(); }
std::string ModerationService::human_decisions_path() const { return human_log_.path(); }
std::string ModerationService::feedback_path() const { return feedback_log_.path(); }
std::string ModerationService::retrain_marker_path() const {
  return (fs::path(cfg_.data_dir) / "retrain.json").string();
}

void ModerationService::replay() {
  std::lock_guard lock(mu_);
  for (const auto& j : JsonlLog::read_all(decisions_path())) {
    auto rec = decision_record_from_json(j);
    ledger_.record(rec.decision);
    ids_.insert(rec.decision.id);
    if (rec.decision.action == cascade::Action::Human || rec.decision.action == cascade::Action::Flag) {
      queue_.enqueue(rec.decision, rec.seq, rec.received_at_ms);
    }
    next_seq_ = std::max(next_seq_, rec.seq + 1);
    log_.push_back({rec.seq, std::move(rec.decision)});
  }
  next_auto_id_ = log_.size() + 1;
  for (const auto& j : JsonlLog::read_all(human_decisions_path())) {
    const auto h = human_decision_from_json(j);
    const auto& item = queue_.resolve(h);
    resolved_.insert(h.item_id);
    if (!parts_.kb->contains(h.item_id)) {
      parts_.kb->insert(h.item_id, embed_or_zero(*parts_.embedder, *parts_.prep, h.item_id, item.decision.original),
                        h.label, item.decision.normalized);
    }
    agreement_.record(pipeline_label(item.decision), h.label);
  }
  refresh_retrain_marker();
}

void ModerationService::refresh_retrain_marker() const {
  if (const auto m = read_retrain_marker(retrain_marker_path())) agreement_.set_retrained_at(m->human_decisions_seen);
}

ServiceResponse ModerationService::classify(const nlohmann::json& body) {
  if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
    return {400, error_body("body must be a JSON object with a string \"text\"")};
  }
  textprep::RawMessage raw;
  raw.text = body["text"].get<std::string>();
  if (raw.text.empty()) return {400, error_body("text must not be empty")};
  if (body.contains("channel")) {
    if (!body["channel"].is_string()) return {400, error_body("channel must be a string")};
    raw.channel = body["channel"].get<std::string>();
  }
  if (body.contains("id") && !body["id"].is_string()) return {400, error_body("id must be a string")};
  raw.received_at_ms = now_ms();
  {
    std::lock_guard lock(mu_);
    if (body.contains("id")) {
      raw.id = body["id"].get<std::string>();
      if (raw.id.empty()) return {400, error_body("id must not be empty")};
      if (ids_.contains(raw.id)) return {409, error_body("message id already classified: " + raw.id)};
    } else {
      do {
        raw.id = "m-" + std::to_string(next_auto_id_++);
      } while (ids_.contains(raw.id));
    }
    ids_.insert(raw.id);
  }

  cascade::Decision d = cascade_->route(raw);

  std::lock_guard lock(mu_);
  DecisionRecord rec{next_seq_, raw.received_at_ms, raw.channel, d};
  try {
    decisions_log_.append(to_json(rec));
  } catch (const std::exception& e) {
    ids_.erase(raw.id);
    return {503, error_body(std::string("decision could not be persisted: ") + e.what())};
  }
  ++next_seq_;
  ledger_.record(d);
  auto summary = decision_summary(d);
  if (d.action == cascade::Action::Human || d.action == cascade::Action::Flag) {
    queue_.enqueue(d, rec.seq, rec.received_at_ms);
    summary["review_item_id"] = d.id;
  }
  log_.push_back({rec.seq, std::move(d)});
  return {log_.back().decision.action == cascade::Action::Human ? 202 : 200, std::move(summary)};
}

ServiceResponse ModerationService::next_review() const {
  std::lock_guard lock(mu_);
  const auto item = queue_.next_pending();
  return {200, {{"item", item ? to_json(*item) : nlohmann::json(nullptr)}, {"pending", queue_.pending_count()}}};
}

ServiceResponse ModerationService::submit_review(const std::string& item_id, const nlohmann::json& body) {
  if (!body.is_object() || !body.contains("label") || !body["label"].is_string()) {
    return {400, error_body("body must be a JSON object with \"label\": \"toxic\" or \"clean\"")};
  }
  HumanDecision h;
  h.item_id = item_id;
  const auto label = body["label"].get<std::string>();
  if (label == "toxic" || label == "remove") {
    h.label = vectorize::Label::Toxic;
  } else if (label == "clean" || label == "allow") {
    h.label = vectorize::Label::Clean;
  } else {
    return {400, error_body("label must be toxic or clean")};
  }
  if (body.contains("moderator")) {
    if (!body["moderator"].is_string()) return {400, error_body("moderator must be a string")};
    h.moderator = body["moderator"].get<std::string>();
  }
  h.decided_at_ms = now_ms();

  std::lock_guard lock(mu_);
  const ReviewItem* item = queue_.find(item_id);
  if (!item) return {404, error_body("no review item " + item_id)};
  if (item->status == ReviewStatus::Resolved) return {409, error_body("review item already resolved: " + item_id)};
  if (parts_.kb->contains(item_id)) return {409, error_body("knowledge base already holds " + item_id)};

  const auto vec = embed_or_zero(*parts_.embedder, *parts_.prep, item_id, item->decision.original);
  try {
    human_log_.append(to_json(h));
  } catch (const std::exception& e) {
    return {503, error_body(std::string("decision could not be persisted: ") + e.what())};
  }
  const auto& resolved = queue_.resolve(h);
  resolved_.insert(item_id);
  parts_.kb->insert(item_id, vec, h.label, resolved.decision.normalized);
  feedback_log_.append({{"id", item_id},
                        {"text", resolved.decision.original},
                        {"label", vectorize::to_string(h.label)},
                        {"moderator", h.moderator},
                        {"decided_at_ms", h.decided_at_ms}});
  agreement_.record(pipeline_label(resolved.decision), h.label);
  return {200,
          {{"item_id", item_id},
           {"status", "resolved"},
           {"label", vectorize::to_string(h.label)},
           {"kb_size", parts_.kb->size()},
           {"feedback_size", feedback_log_.lines_written()}}};
}

nlohmann::json ModerationService::stats_locked() const {
  const auto snap = ledger_.snapshot();
  cascade::CascadeReport report;
  if (snap.messages > 0) report = cascade::summarize(snap);
  refresh_retrain_marker();
  const auto check = retrain_check(agreement_, cfg_.retrain);
  evalharness::SavingsParams sp{report.automated_fraction, cfg_.review_seconds_per_message, cfg_.hourly_rate_usd};
  const auto savings = evalharness::moderation_savings(sp, 1e6);
  return {{"ledger", cascade::to_json(report)},
          {"queue",
           {{"pending", queue_.pending_count()}, {"resolved", queue_.resolved_count()}, {"total", queue_.size()}}},
          {"agreement",
           {{"rolling_rate", agreement_.rolling_rate()},
            {"total", agreement_.total()},
            {"agreements", agreement_.agreements()},
            {"new_since_retrain", agreement_.new_since_retrain()},
            {"window", cfg_.retrain.agreement_window},
            {"trend", std::vector<double>(agreement_.trend().begin(), agreement_.trend().end())}}},
          {"retrain", {{"due", check.due}, {"reason", check.reason}}},
          {"savings_per_million", {{"review_hours_avoided", savings.hours_avoided}, {"usd_saved", savings.usd_saved}}},
          {"kb_size", parts_.kb->size()},
          {"feedback_size", feedback_log_.lines_written()},
          {"decisions_logged", decisions_log_.lines_written()},
          {"rules", parts_.rules->get()->size()}};
}

ServiceResponse ModerationService::stats() const {
  std::lock_guard lock(mu_);
  return {200, stats_locked()};
}

ServiceResponse ModerationService::active_learning(std::size_t n) const {
  if (n < 1) return {400, error_body("n must be >= 1")};
  std::lock_guard lock(mu_);
  const auto ids = select_active_learning_batch(log_, resolved_, n);
  nlohmann::json items = nlohmann::json::array();
  std::unordered_map<std::string, const cascade::Decision*> by_id;
  for (const auto& e : log_) by_id[e.decision.id] = &e.decision;
  for (const auto& id : ids) {
    const auto* d = by_id.at(id);
    items.push_back({{"id", id}, {"p_toxic", *d->final_p()}, {"text", d->original}, {"terminal_tier", cascade::to_string(d->terminal_tier)}});
  }
  return {200, {{"ids", ids}, {"items", items}}};
}

ServiceResponse ModerationService::reload_rules() {
  if (cfg_.rules_path.empty()) return {400, error_body("no rules_path configured")};
  try {
    auto rules = rulefilter::RuleSet::compile(rulefilter::load_rules_file(cfg_.rules_path));
    const auto n = rules.size();
    parts_.rules->swap_in(std::move(rules));
    return {200, {{"rules", n}}};
  } catch (const CompileError& e) {
    return {400, {{"error", e.what()}, {"rule_id", e.rule_id()}}};
  } catch (const std::exception& e) {
    return {500, error_body(e.what())};
  }
}

cascade::CostLedger::Snapshot ModerationService::ledger_snapshot() const { return ledger_.snapshot(); }

std::size_t ModerationService::kb_size() const { return parts_.kb->size(); }

std::size_t ModerationService::feedback_size() const { return feedback_log_.lines_written(); }

std::size_t ModerationService::pending_reviews() const {
  std::lock_guard lock(mu_);
  return queue_.pending_count();
}

std::size_t ModerationService::decisions_logged() const { return decisions_log_.lines_written(); }

RetrainCheck ModerationService::retrain_status() const {
  std::lock_guard lock(mu_);
  refresh_retrain_marker();
  return retrain_check(agreement_, cfg_.retrain);
}

}  // namespace toxcascade::service
