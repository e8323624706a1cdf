#pragma once
// The moderation service core: routes messages through the cascade, persists
// every decision before answering, runs the human review queue and feeds
// resolved items back into the retrieval knowledge base.
//
// Transport-independent: each operation returns an HTTP-style status code and
// a JSON body, which http_api.hpp maps onto real endpoints.

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "toxcascade/cascade.hpp"
#include "toxcascade/corpus.hpp"
#include "toxcascade/service/config.hpp"
#include "toxcascade/service/persistence.hpp"
#include "toxcascade/service/review.hpp"

namespace toxcascade::service {

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

// Everything the service routes with. Components' prep and rules are
// replaced by the shared ones below.
struct ServiceParts {
  std::shared_ptr<const textprep::Preprocessor> prep;
  std::shared_ptr<rulefilter::RuleSetHandle> rules;
  std::shared_ptr<const vectorize::TextEmbedder> embedder;
  std::shared_ptr<vectorize::KnnIndex> kb;
  cascade::Components components;
};

// Ground truth for mock providers from a labeled corpus, looked up by message id.
llmgate::GroundTruth truth_from_corpus(const std::vector<corpus::LabeledMessage>& corpus);

// nullptr for kind "none".
std::shared_ptr<llmgate::LlmProvider> make_provider(const ProviderConfig& cfg, llmgate::GroundTruth truth);

// Builds the knowledge base from a corpus; messages that fail preprocessing are skipped.
std::unique_ptr<vectorize::KnnIndex> build_kb(const std::vector<corpus::LabeledMessage>& corpus,
                                              const textprep::Preprocessor& prep,
                                              const vectorize::HashingEmbedder& embedder);

// Loads rules, model, knowledge base and providers named in the config.
ServiceParts build_parts(const ServiceConfig& cfg);

class ModerationService {
 public:
  explicit ModerationService(const ServiceConfig& cfg);
  ModerationService(const ServiceConfig& cfg, ServiceParts parts);

  ModerationService(const ModerationService&) = delete;
  ModerationService& operator=(const ModerationService&) = delete;

  // {text, id?, channel?} -> 200 (allow/remove/flag), 202 (human), 400, 409
  // (duplicate id) or 503 (decision could not be persisted).
  ServiceResponse classify(const nlohmann::json& body);
  ServiceResponse next_review() const;
  // {label: toxic|clean, moderator?} -> 200, 400, 404, 409.
  ServiceResponse submit_review(const std::string& item_id, const nlohmann::json& body);
  ServiceResponse stats() const;
  ServiceResponse active_learning(std::size_t n) const;
  ServiceResponse reload_rules();

  cascade::CostLedger::Snapshot ledger_snapshot() const;
  std::size_t kb_size() const;
  std::size_t feedback_size() const;
  std::size_t pending_reviews() const;
  std::size_t decisions_logged() const;
  RetrainCheck retrain_status() const;
  const ServiceConfig& config() const { return cfg_; }

  std::string decisions_path() const;
  std::string human_decisions_path() const;
  std::string feedback_path() const;
  std::string retrain_marker_path() const;

 private:
  void replay();
  void refresh_retrain_marker() const;
  nlohmann::json stats_locked() const;

  ServiceConfig cfg_;
  ServiceParts parts_;
  std::unique_ptr<cascade::Cascade> cascade_;

  mutable std::mutex mu_;  // single writer for everything below
  JsonlLog decisions_log_;
  JsonlLog human_log_;
  JsonlLog feedback_log_;
  cascade::CostLedger ledger_;
  ReviewQueue queue_;
  mutable AgreementStats agreement_;
  std::vector<LoggedDecision> log_;
  std::unordered_set<std::string> ids_;
  std::unordered_set<std::string> resolved_;
  std::uint64_t next_seq_ = 1;
  std::atomic<std::uint64_t> next_auto_id_{1};
};

}  // namespace toxcascade::service
