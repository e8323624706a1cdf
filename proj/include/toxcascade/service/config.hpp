#pragma once
// Service configuration, read from a JSON file. Every key is optional.
//
// {
//   "data_dir": "var",                 append-only logs live here
//   "listen": {"host": "127.0.0.1", "port": 8080},
//   "static_dir": "",                  served at / when set
//   "rules_path": "", "model_path": "", "kb_snapshot": "", "kb_corpus": "",
//   "mock_truth_corpus": "",           ground truth for mock providers
//   "prep": {"emoji_table": "", "contraction_table": "", "min_alnum_tokens": 2},
//   "embedding": {"dims": 384, "seed": ...},
//   "retrieval": {"k": 5, "min_similarity": 0.7},
//   "thresholds": {"t1_allow": 0.05, ...},
//   "unit_costs": {"0": 0, "1": 5e-7, "2a": 1.4e-3, "2b": 5e-6, "3": 1.65e-3},
//   "tier2a": {provider}, "tier3": {provider},
//   "retrain": {"min_new_decisions": 100, "metric_floor": 0.9, "check_interval_s": 3600, "agreement_window": 200},
//   "savings": {"review_seconds_per_message": 10, "hourly_rate_usd": 50}
// }
//
// provider: {"kind": "mock"|"http"|"none", "endpoint": "http://host:port",
//            "path": "/v1/complete", "seed": 0, "profile": {operating point},
//            "temperature": 0, "max_tokens": 16, "timeout_ms": 5000,
//            "max_retries": 2, "backoff_ms": 50}

#include <chrono>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "toxcascade/cascade.hpp"
#include "toxcascade/llmgate.hpp"
#include "toxcascade/textprep.hpp"
#include "toxcascade/vectorize.hpp"

namespace toxcascade::service {

inline constexpr const char* kConfigEnvVar = "TOXCASCADE_CONFIG";

struct ProviderConfig {
  std::string kind = "mock";
  std::string endpoint;
  std::string path = "/v1/complete";
  std::uint64_t seed = 0;
  llmgate::OperatingPoint profile = llmgate::gpt35_zero_shot_profile();
  llmgate::LlmParams params;
};

struct RetrainPolicy {
  std::size_t min_new_decisions = 100;
  double metric_floor = 0.90;
  std::chrono::seconds check_interval{3600};
  std::size_t agreement_window = 200;  // human decisions in the rolling agreement rate

  void validate() const;
};

struct ServiceConfig {
  std::string data_dir = "var";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;

  std::string rules_path;
  std::string model_path;
  std::string kb_snapshot;
  std::string kb_corpus;
  std::string mock_truth_corpus;

  textprep::PrepConfig prep;
  std::size_t embed_dims = vectorize::kDefaultDims;
  std::uint64_t embed_seed = vectorize::kDefaultHashSeed;
  vectorize::RetrievalConfig retrieval;

  cascade::TierThresholds thresholds;
  cascade::TierCosts unit_costs;
  ProviderConfig tier2a;
  ProviderConfig tier3;
  RetrainPolicy retrain;

  double review_seconds_per_message = 10.0;
  double hourly_rate_usd = 50.0;

  void validate() const;
};

// Unit costs default to the per-message inference costs of the reference
// methods: SGD-SVM for Tier 1, GPT-3.5 zero-shot for 2a, DistilBERT for 2b
// and GPT-3.5 RAG for Tier 3.
cascade::TierCosts default_unit_costs();

ServiceConfig default_config();
// Relative paths are resolved against `base_dir`.
ServiceConfig parse_config(const nlohmann::json& j, const std::string& base_dir = "");
ServiceConfig load_config(const std::string& path);
nlohmann::json to_json(const ServiceConfig& c);

// $TOXCASCADE_CONFIG when set, otherwise `fallback`.
std::string resolve_config_path(const std::string& fallback);

}  // namespace toxcascade::service
