#pragma once
// Confidence-guided router. Each message goes through
//   textprep -> Tier 0 rules -> Tier 1 linear -> Tier 2a LLM prompt
//   -> Tier 2b local scorer (optional) -> Tier 3 retrieval + LLM -> human
// and stops at the first tier whose probability falls outside its
// uncertainty band. Band edges escalate (strict inequalities).

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toxcascade/linear.hpp"
#include "toxcascade/llmgate.hpp"
#include "toxcascade/rulefilter.hpp"
#include "toxcascade/textprep.hpp"
#include "toxcascade/vectorize.hpp"

namespace toxcascade::cascade {

enum class Tier : std::uint8_t { T0 = 0, T1 = 1, T2a = 2, T2b = 3, T3 = 4, Human = 5 };
inline constexpr std::size_t kTierCount = 6;
inline constexpr std::size_t kScoringTiers = 5;  // T0..T3

enum class Action { Allow, Remove, Flag, Human };

const char* to_string(Tier t);
const char* to_string(Action a);
Tier tier_from_string(std::string_view s);
Action action_from_string(std::string_view s);

struct Band {
  double low;
  double high;
};

struct TierThresholds {
  double t1_allow = 0.05;
  double t1_remove = 0.95;
  double t2_llm_low = 0.10;
  double t2_llm_high = 0.90;
  double t2_ft_low = 0.05;
  double t2_ft_high = 0.95;
  double t3_allow = 0.05;
  double t3_act = 0.80;

  void validate() const;
  // Band of a probability tier (T1, T2a, T2b, T3).
  Band band(Tier t) const;
};

struct TrailEntry {
  Tier tier = Tier::T0;
  std::optional<double> p_toxic;
  std::optional<std::string> rule_id;
  std::optional<std::string> error;
  std::int64_t latency_us = 0;
  double cost = 0.0;
};

struct Neighbor {
  std::string id;
  std::string text;
  vectorize::Label label = vectorize::Label::Clean;
  double similarity = 0.0;
};

struct Decision {
  std::string id;
  Tier terminal_tier = Tier::T0;
  Action action = Action::Allow;
  std::vector<TrailEntry> trail;
  std::int64_t latency_total_us = 0;
  double cost_total = 0.0;
  std::string reason;
  std::string original;
  std::string normalized;
  std::vector<Neighbor> neighbors;  // Tier 3 retrieval context, when it ran

  // Probability reported by the deepest tier that produced one.
  std::optional<double> final_p() const;
};

nlohmann::json to_json(const Decision& d);
Decision decision_from_json(const nlohmann::json& j);

// Any scorer producing P(toxic) for a normalized message (Tier 1, Tier 2b).
class ProbabilityScorer {
 public:
  virtual ~ProbabilityScorer() = default;
  virtual linear::ToxicityScore score(const textprep::NormalizedMessage& msg) const = 0;
};

class LinearScorer final : public ProbabilityScorer {
 public:
  LinearScorer(std::shared_ptr<const vectorize::TextEmbedder> embedder, std::shared_ptr<const linear::LinearModel> model)
      : embedder_(std::move(embedder)), model_(std::move(model)) {}
  linear::ToxicityScore score(const textprep::NormalizedMessage& msg) const override;

 private:
  std::shared_ptr<const vectorize::TextEmbedder> embedder_;
  std::shared_ptr<const linear::LinearModel> model_;
};

struct LlmStage {
  std::shared_ptr<llmgate::LlmProvider> provider;
  llmgate::LlmParams params;
  std::optional<llmgate::FewShotSet> few_shot;  // zero-shot when unset
};

struct RagStage {
  std::shared_ptr<llmgate::LlmProvider> provider;
  llmgate::LlmParams params;
  std::shared_ptr<const vectorize::TextEmbedder> embedder;
  std::shared_ptr<vectorize::KnnIndex> index;
  vectorize::RetrievalConfig retrieval;
};

struct Components {
  std::shared_ptr<const textprep::Preprocessor> prep;
  std::shared_ptr<rulefilter::RuleSetHandle> rules;
  std::shared_ptr<const ProbabilityScorer> tier1;
  std::optional<LlmStage> tier2a;
  std::shared_ptr<const ProbabilityScorer> tier2b;
  std::optional<RagStage> tier3;
};

// Cost charged per invocation of each scoring tier, indexed by Tier (T0..T3).
struct TierCosts {
  std::array<double, kScoringTiers> per_invocation{0.0, 0.0, 0.0, 0.0, 0.0};
  double of(Tier t) const { return per_invocation[static_cast<std::size_t>(t)]; }
};

struct CascadeReport {
  std::size_t messages = 0;
  std::array<std::size_t, kTierCount> terminal_counts{};
  std::array<std::size_t, kScoringTiers> invocations{};
  std::size_t rejected = 0;
  std::array<std::size_t, 4> action_counts{};  // by Action
  double mean_latency_us = 0;
  double p50_latency_us = 0;
  double p95_latency_us = 0;
  double p99_latency_us = 0;
  double cost_total = 0;
  double cost_per_million = 0;
  double human_fraction = 0;
  double automated_fraction = 0;
};

nlohmann::json to_json(const CascadeReport& r);

// Append-only accumulator; all methods are thread-safe.
class CostLedger {
 public:
  explicit CostLedger(TierCosts unit_costs = {}) : unit_costs_(unit_costs) {}

  void record(const Decision& d);

  std::size_t messages() const;
  std::array<std::size_t, kScoringTiers> invocations() const;
  std::array<std::size_t, kTierCount> terminal_counts() const;
  double cost_total() const;
  const TierCosts& unit_costs() const { return unit_costs_; }

  struct Snapshot {
    std::size_t messages = 0;
    std::size_t rejected = 0;
    std::array<std::size_t, kScoringTiers> invocations{};
    std::array<std::size_t, kTierCount> terminal_counts{};
    std::array<std::size_t, 4> action_counts{};
    std::array<std::vector<std::int64_t>, kScoringTiers> tier_latency_us;
    std::vector<std::int64_t> total_latency_us;
    double cost_total = 0;
  };
  Snapshot snapshot() const;

 private:
  TierCosts unit_costs_;
  mutable std::mutex mu_;
  Snapshot s_;
};

// Throws EmptyLedger when nothing has been recorded.
CascadeReport summarize(const CostLedger& ledger);
CascadeReport summarize(const CostLedger::Snapshot& snap);

class Cascade {
 public:
  Cascade(Components components, TierThresholds thresholds, TierCosts costs = {});

  // Pure with respect to the cascade; safe to call concurrently.
  Decision route(const textprep::RawMessage& msg) const;
  Decision route(const textprep::RawMessage& msg, CostLedger& ledger) const;

  const TierThresholds& thresholds() const { return thresholds_; }
  const TierCosts& costs() const { return costs_; }
  const Components& components() const { return components_; }

 private:
  Components components_;
  TierThresholds thresholds_;
  TierCosts costs_;
};

}  // namespace toxcascade::cascade
