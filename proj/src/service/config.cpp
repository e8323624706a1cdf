#include "toxcascade/service/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "toxcascade/errors.hpp"

namespace toxcascade::service {

namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& p, const std::string& base) {
  if (p.empty() || base.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base) / p).lexically_normal().string();
}

llmgate::OperatingPoint parse_profile(const nlohmann::json& j, llmgate::OperatingPoint op) {
  op.toxic_miss_rate = j.value("toxic_miss_rate", op.toxic_miss_rate);
  op.clean_false_alarm_rate = j.value("clean_false_alarm_rate", op.clean_false_alarm_rate);
  op.mean_latency_ms = j.value("mean_latency_ms", op.mean_latency_ms);
  op.cost_units_per_call = j.value("cost_units_per_call", op.cost_units_per_call);
  op.uncertain_rate = j.value("uncertain_rate", op.uncertain_rate);
  op.failure_rate = j.value("failure_rate", op.failure_rate);
  op.unparsable_rate = j.value("unparsable_rate", op.unparsable_rate);
  return op;
}

nlohmann::json profile_json(const llmgate::OperatingPoint& op) {
  return {{"toxic_miss_rate", op.toxic_miss_rate},     {"clean_false_alarm_rate", op.clean_false_alarm_rate},
          {"mean_latency_ms", op.mean_latency_ms},     {"cost_units_per_call", op.cost_units_per_call},
          {"uncertain_rate", op.uncertain_rate},       {"failure_rate", op.failure_rate},
          {"unparsable_rate", op.unparsable_rate}};
}

ProviderConfig parse_provider(const nlohmann::json& j, ProviderConfig p) {
  p.kind = j.value("kind", p.kind);
  p.endpoint = j.value("endpoint", p.endpoint);
  p.path = j.value("path", p.path);
  p.seed = j.value("seed", p.seed);
  if (j.contains("profile")) p.profile = parse_profile(j["profile"], p.profile);
  p.params.temperature = j.value("temperature", p.params.temperature);
  p.params.max_tokens = j.value("max_tokens", p.params.max_tokens);
  p.params.timeout = std::chrono::milliseconds(j.value("timeout_ms", static_cast<long long>(p.params.timeout.count())));
  p.params.max_retries = j.value("max_retries", p.params.max_retries);
  p.params.backoff_base =
      std::chrono::milliseconds(j.value("backoff_ms", static_cast<long long>(p.params.backoff_base.count())));
  if (p.kind != "mock" && p.kind != "http" && p.kind != "none") throw FormatError("unknown provider kind: " + p.kind);
  if (p.kind == "http" && p.endpoint.empty()) throw FormatError("http provider needs an endpoint");
  return p;
}

nlohmann::json provider_json(const ProviderConfig& p) {
  return {{"kind", p.kind},
          {"endpoint", p.endpoint},
          {"path", p.path},
          {"seed", p.seed},
          {"profile", profile_json(p.profile)},
          {"temperature", p.params.temperature},
          {"max_tokens", p.params.max_tokens},
          {"timeout_ms", p.params.timeout.count()},
          {"max_retries", p.params.max_retries},
          {"backoff_ms", p.params.backoff_base.count()}};
}

}  // namespace

void RetrainPolicy::validate() const {
  if (min_new_decisions < 1) throw InvalidArgument("min_new_decisions must be >= 1");
  if (!(metric_floor > 0 && metric_floor <= 1)) throw InvalidArgument("metric_floor must lie in (0, 1]");
  if (agreement_window < 1) throw InvalidArgument("agreement_window must be >= 1");
}

void ServiceConfig::validate() const {
  thresholds.validate();
  retrieval.validate();
  retrain.validate();
  tier2a.params.validate();
  tier3.params.validate();
  tier2a.profile.validate();
  tier3.profile.validate();
  if (port < 0 || port > 65535) throw InvalidArgument("port out of range");
  for (double c : unit_costs.per_invocation) {
    if (c < 0) throw InvalidArgument("unit costs must be >= 0");
  }
}

cascade::TierCosts default_unit_costs() {
  cascade::TierCosts c;
  c.per_invocation = {0.0, 0.50e-6, 1400e-6, 5.00e-6, 1650e-6};
  return c;
}

ServiceConfig default_config() {
  ServiceConfig c;
  c.unit_costs = default_unit_costs();
  c.tier3.profile = llmgate::gpt35_zero_shot_profile();
  // GPT-3.5 RAG row: 1 of 32 toxic missed, 32 of 68 clean flagged, 913 ms.
  c.tier3.profile.toxic_miss_rate = 1.0 / 32.0;
  c.tier3.profile.clean_false_alarm_rate = 32.0 / 68.0;
  c.tier3.profile.mean_latency_ms = 913.0;
  c.tier3.profile.cost_units_per_call = 1650e-6;
  c.tier3.seed = 1;
  return c;
}

ServiceConfig parse_config(const nlohmann::json& j, const std::string& base_dir) {
  ServiceConfig c = default_config();
  try {
    c.data_dir = resolve(j.value("data_dir", c.data_dir), base_dir);
    if (j.contains("listen")) {
      c.host = j["listen"].value("host", c.host);
      c.port = j["listen"].value("port", c.port);
    }
    c.static_dir = resolve(j.value("static_dir", c.static_dir), base_dir);
    c.rules_path = resolve(j.value("rules_path", c.rules_path), base_dir);
    c.model_path = resolve(j.value("model_path", c.model_path), base_dir);
    c.kb_snapshot = resolve(j.value("kb_snapshot", c.kb_snapshot), base_dir);
    c.kb_corpus = resolve(j.value("kb_corpus", c.kb_corpus), base_dir);
    c.mock_truth_corpus = resolve(j.value("mock_truth_corpus", c.mock_truth_corpus), base_dir);
    if (j.contains("prep")) {
      const auto& p = j["prep"];
      c.prep.emoji_table_path = resolve(p.value("emoji_table", std::string()), base_dir);
      c.prep.contraction_table_path = resolve(p.value("contraction_table", std::string()), base_dir);
      c.prep.min_alnum_tokens = p.value("min_alnum_tokens", c.prep.min_alnum_tokens);
    }
    if (j.contains("embedding")) {
      c.embed_dims = j["embedding"].value("dims", c.embed_dims);
      c.embed_seed = j["embedding"].value("seed", c.embed_seed);
    }
    if (j.contains("retrieval")) {
      c.retrieval.k = j["retrieval"].value("k", c.retrieval.k);
      c.retrieval.min_similarity = j["retrieval"].value("min_similarity", c.retrieval.min_similarity);
    }
    if (j.contains("thresholds")) {
      const auto& t = j["thresholds"];
      auto& th = c.thresholds;
      th.t1_allow = t.value("t1_allow", th.t1_allow);
      th.t1_remove = t.value("t1_remove", th.t1_remove);
      th.t2_llm_low = t.value("t2_llm_low", th.t2_llm_low);
      th.t2_llm_high = t.value("t2_llm_high", th.t2_llm_high);
      th.t2_ft_low = t.value("t2_ft_low", th.t2_ft_low);
      th.t2_ft_high = t.value("t2_ft_high", th.t2_ft_high);
      th.t3_allow = t.value("t3_allow", th.t3_allow);
      th.t3_act = t.value("t3_act", th.t3_act);
    }
    if (j.contains("unit_costs")) {
      for (std::size_t t = 0; t < cascade::kScoringTiers; ++t) {
        const char* key = cascade::to_string(static_cast<cascade::Tier>(t));
        c.unit_costs.per_invocation[t] = j["unit_costs"].value(key, c.unit_costs.per_invocation[t]);
      }
    }
    if (j.contains("tier2a")) c.tier2a = parse_provider(j["tier2a"], c.tier2a);
    if (j.contains("tier3")) c.tier3 = parse_provider(j["tier3"], c.tier3);
    if (j.contains("retrain")) {
      const auto& r = j["retrain"];
      c.retrain.min_new_decisions = r.value("min_new_decisions", c.retrain.min_new_decisions);
      c.retrain.metric_floor = r.value("metric_floor", c.retrain.metric_floor);
      c.retrain.check_interval =
          std::chrono::seconds(r.value("check_interval_s", static_cast<long long>(c.retrain.check_interval.count())));
      c.retrain.agreement_window = r.value("agreement_window", c.retrain.agreement_window);
    }
    if (j.contains("savings")) {
      c.review_seconds_per_message = j["savings"].value("review_seconds_per_message", c.review_seconds_per_message);
      c.hourly_rate_usd = j["savings"].value("hourly_rate_usd", c.hourly_rate_usd);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ServiceConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return parse_config(j, fs::path(path).parent_path().string());
}

nlohmann::json to_json(const ServiceConfig& c) {
  nlohmann::json costs;
  for (std::size_t t = 0; t < cascade::kScoringTiers; ++t) {
    costs[cascade::to_string(static_cast<cascade::Tier>(t))] = c.unit_costs.per_invocation[t];
  }
  const auto& th = c.thresholds;
  return {{"data_dir", c.data_dir},
          {"listen", {{"host", c.host}, {"port", c.port}}},
          {"static_dir", c.static_dir},
          {"rules_path", c.rules_path},
          {"model_path", c.model_path},
          {"kb_snapshot", c.kb_snapshot},
          {"kb_corpus", c.kb_corpus},
          {"mock_truth_corpus", c.mock_truth_corpus},
          {"prep",
           {{"emoji_table", c.prep.emoji_table_path},
            {"contraction_table", c.prep.contraction_table_path},
            {"min_alnum_tokens", c.prep.min_alnum_tokens}}},
          {"embedding", {{"dims", c.embed_dims}, {"seed", c.embed_seed}}},
          {"retrieval", {{"k", c.retrieval.k}, {"min_similarity", c.retrieval.min_similarity}}},
          {"thresholds",
           {{"t1_allow", th.t1_allow},
            {"t1_remove", th.t1_remove},
            {"t2_llm_low", th.t2_llm_low},
            {"t2_llm_high", th.t2_llm_high},
            {"t2_ft_low", th.t2_ft_low},
            {"t2_ft_high", th.t2_ft_high},
            {"t3_allow", th.t3_allow},
            {"t3_act", th.t3_act}}},
          {"unit_costs", costs},
          {"tier2a", provider_json(c.tier2a)},
          {"tier3", provider_json(c.tier3)},
          {"retrain",
           {{"min_new_decisions", c.retrain.min_new_decisions},
            {"metric_floor", c.retrain.metric_floor},
            {"check_interval_s", c.retrain.check_interval.count()},
            {"agreement_window", c.retrain.agreement_window}}},
          {"savings", {{"review_seconds_per_message", c.review_seconds_per_message}, {"hourly_rate_usd", c.hourly_rate_usd}}}};
}

std::string resolve_config_path(const std::string& fallback) {
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return env;
  return fallback;
}

}  // namespace toxcascade::service
