#include "toxcascade/cascade.hpp"

#include <algorithm>
#include <cmath>

#include "toxcascade/errors.hpp"

namespace toxcascade::cascade {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t micros_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
}

enum class BandOutcome { Allow, Remove, Escalate };

BandOutcome apply_band(const Band& band, double p) {
  if (p < band.low) return BandOutcome::Allow;
  if (p > band.high) return BandOutcome::Remove;
  return BandOutcome::Escalate;
}

double percentile(std::vector<std::int64_t> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return static_cast<double>(v[std::clamp<std::size_t>(rank, 1, v.size()) - 1]);
}

}  // namespace

const char* to_string(Tier t) {
  switch (t) {
    case Tier::T0: return "0";
    case Tier::T1: return "1";
    case Tier::T2a: return "2a";
    case Tier::T2b: return "2b";
    case Tier::T3: return "3";
    case Tier::Human: return "human";
  }
  return "?";
}

const char* to_string(Action a) {
  switch (a) {
    case Action::Allow: return "allow";
    case Action::Remove: return "remove";
    case Action::Flag: return "flag";
    case Action::Human: return "human";
  }
  return "?";
}

Tier tier_from_string(std::string_view s) {
  for (auto t : {Tier::T0, Tier::T1, Tier::T2a, Tier::T2b, Tier::T3, Tier::Human}) {
    if (s == to_string(t)) return t;
  }
  throw FormatError("unknown tier: " + std::string(s));
}

Action action_from_string(std::string_view s) {
  for (auto a : {Action::Allow, Action::Remove, Action::Flag, Action::Human}) {
    if (s == to_string(a)) return a;
  }
  throw FormatError("unknown action: " + std::string(s));
}

void TierThresholds::validate() const {
  const std::array<std::pair<double, double>, 4> pairs{
      {{t1_allow, t1_remove}, {t2_llm_low, t2_llm_high}, {t2_ft_low, t2_ft_high}, {t3_allow, t3_act}}};
  for (const auto& [lo, hi] : pairs) {
    if (!(lo >= 0 && hi <= 1 && lo < hi)) throw InvalidArgument("thresholds need 0 <= low < high <= 1");
  }
}

Band TierThresholds::band(Tier t) const {
  switch (t) {
    case Tier::T1: return {t1_allow, t1_remove};
    case Tier::T2a: return {t2_llm_low, t2_llm_high};
    case Tier::T2b: return {t2_ft_low, t2_ft_high};
    case Tier::T3: return {t3_allow, t3_act};
    default: throw InvalidArgument(std::string("tier has no probability band: ") + to_string(t));
  }
}

std::optional<double> Decision::final_p() const {
  for (auto it = trail.rbegin(); it != trail.rend(); ++it) {
    if (it->p_toxic) return it->p_toxic;
  }
  return std::nullopt;
}

nlohmann::json to_json(const Decision& d) {
  nlohmann::json trail = nlohmann::json::array();
  for (const auto& e : d.trail) {
    nlohmann::json je{{"tier", to_string(e.tier)}, {"latency_us", e.latency_us}, {"cost", e.cost}};
    if (e.p_toxic) je["p_toxic"] = *e.p_toxic;
    if (e.rule_id) je["rule_id"] = *e.rule_id;
    if (e.error) je["error"] = *e.error;
    trail.push_back(std::move(je));
  }
  nlohmann::json neighbors = nlohmann::json::array();
  for (const auto& n : d.neighbors) {
    neighbors.push_back(
        {{"id", n.id}, {"text", n.text}, {"label", vectorize::to_string(n.label)}, {"similarity", n.similarity}});
  }
  return {{"id", d.id},
          {"terminal_tier", to_string(d.terminal_tier)},
          {"action", to_string(d.action)},
          {"trail", std::move(trail)},
          {"latency_total_us", d.latency_total_us},
          {"cost_total", d.cost_total},
          {"reason", d.reason},
          {"original", d.original},
          {"normalized", d.normalized},
          {"neighbors", std::move(neighbors)}};
}

Decision decision_from_json(const nlohmann::json& j) {
  Decision d;
  d.id = j.at("id").get<std::string>();
  d.terminal_tier = tier_from_string(j.at("terminal_tier").get<std::string>());
  d.action = action_from_string(j.at("action").get<std::string>());
  for (const auto& je : j.at("trail")) {
    TrailEntry e;
    e.tier = tier_from_string(je.at("tier").get<std::string>());
    e.latency_us = je.value("latency_us", std::int64_t{0});
    e.cost = je.value("cost", 0.0);
    if (je.contains("p_toxic")) e.p_toxic = je["p_toxic"].get<double>();
    if (je.contains("rule_id")) e.rule_id = je["rule_id"].get<std::string>();
    if (je.contains("error")) e.error = je["error"].get<std::string>();
    d.trail.push_back(std::move(e));
  }
  d.latency_total_us = j.value("latency_total_us", std::int64_t{0});
  d.cost_total = j.value("cost_total", 0.0);
  d.reason = j.value("reason", std::string());
  d.original = j.value("original", std::string());
  d.normalized = j.value("normalized", std::string());
  if (j.contains("neighbors")) {
    for (const auto& jn : j["neighbors"]) {
      d.neighbors.push_back(Neighbor{jn.at("id").get<std::string>(), jn.value("text", std::string()),
                                     vectorize::label_from_string(jn.at("label").get<std::string>()),
                                     jn.value("similarity", 0.0)});
    }
  }
  return d;
}

linear::ToxicityScore LinearScorer::score(const textprep::NormalizedMessage& msg) const {
  return linear::predict_proba(*model_, embedder_->embed(msg), "1");
}

nlohmann::json to_json(const CascadeReport& r) {
  nlohmann::json terminal, invoked, actions;
  for (std::size_t t = 0; t < kTierCount; ++t) terminal[to_string(static_cast<Tier>(t))] = r.terminal_counts[t];
  for (std::size_t t = 0; t < kScoringTiers; ++t) invoked[to_string(static_cast<Tier>(t))] = r.invocations[t];
  for (std::size_t a = 0; a < 4; ++a) actions[to_string(static_cast<Action>(a))] = r.action_counts[a];
  return {{"messages", r.messages},
          {"terminal_counts", terminal},
          {"invocations", invoked},
          {"action_counts", actions},
          {"rejected", r.rejected},
          {"mean_latency_us", r.mean_latency_us},
          {"p50_latency_us", r.p50_latency_us},
          {"p95_latency_us", r.p95_latency_us},
          {"p99_latency_us", r.p99_latency_us},
          {"cost_total", r.cost_total},
          {"cost_per_million", r.cost_per_million},
          {"human_fraction", r.human_fraction},
          {"automated_fraction", r.automated_fraction}};
}

void CostLedger::record(const Decision& d) {
  std::lock_guard lock(mu_);
  ++s_.messages;
  if (d.trail.empty()) ++s_.rejected;
  for (const auto& e : d.trail) {
    const auto t = static_cast<std::size_t>(e.tier);
    if (t >= kScoringTiers) continue;
    ++s_.invocations[t];
    s_.tier_latency_us[t].push_back(e.latency_us);
  }
  ++s_.terminal_counts[static_cast<std::size_t>(d.terminal_tier)];
  ++s_.action_counts[static_cast<std::size_t>(d.action)];
  s_.total_latency_us.push_back(d.latency_total_us);
  s_.cost_total += d.cost_total;
}

std::size_t CostLedger::messages() const {
  std::lock_guard lock(mu_);
  return s_.messages;
}

std::array<std::size_t, kScoringTiers> CostLedger::invocations() const {
  std::lock_guard lock(mu_);
  return s_.invocations;
}

std::array<std::size_t, kTierCount> CostLedger::terminal_counts() const {
  std::lock_guard lock(mu_);
  return s_.terminal_counts;
}

double CostLedger::cost_total() const {
  std::lock_guard lock(mu_);
  return s_.cost_total;
}

CostLedger::Snapshot CostLedger::snapshot() const {
  std::lock_guard lock(mu_);
  return s_;
}

CascadeReport summarize(const CostLedger& ledger) { return summarize(ledger.snapshot()); }

CascadeReport summarize(const CostLedger::Snapshot& s) {
  if (s.messages == 0) throw EmptyLedger("no routed messages");
  CascadeReport r;
  const auto n = static_cast<double>(s.messages);
  r.messages = s.messages;
  r.terminal_counts = s.terminal_counts;
  r.invocations = s.invocations;
  r.action_counts = s.action_counts;
  r.rejected = s.rejected;
  double sum = 0;
  for (auto v : s.total_latency_us) sum += static_cast<double>(v);
  r.mean_latency_us = sum / n;
  r.p50_latency_us = percentile(s.total_latency_us, 0.50);
  r.p95_latency_us = percentile(s.total_latency_us, 0.95);
  r.p99_latency_us = percentile(s.total_latency_us, 0.99);
  r.cost_total = s.cost_total;
  r.cost_per_million = s.cost_total / n * 1e6;
  r.human_fraction = static_cast<double>(s.terminal_counts[static_cast<std::size_t>(Tier::Human)]) / n;
  r.automated_fraction = 1.0 - r.human_fraction;
  return r;
}

Cascade::Cascade(Components components, TierThresholds thresholds, TierCosts costs)
    : components_(std::move(components)), thresholds_(thresholds), costs_(costs) {
  thresholds_.validate();
  if (!components_.prep) components_.prep = std::make_shared<textprep::Preprocessor>();
  if (!components_.rules) components_.rules = std::make_shared<rulefilter::RuleSetHandle>();
}

Decision Cascade::route(const textprep::RawMessage& raw, CostLedger& ledger) const {
  Decision d = route(raw);
  ledger.record(d);
  return d;
}

Decision Cascade::route(const textprep::RawMessage& raw) const {
  Decision d;
  d.id = raw.id;
  d.original = raw.text;
  const auto prep_start = Clock::now();
  auto prepped = components_.prep->normalize(raw);
  d.latency_total_us = micros_since(prep_start);

  auto finish = [&](Tier tier, Action action, std::string reason) {
    d.terminal_tier = tier;
    d.action = action;
    d.reason = std::move(reason);
    double cost = 0;
    for (const auto& e : d.trail) {
      cost += e.cost;
      d.latency_total_us += e.latency_us;
    }
    d.cost_total = cost;
    return d;
  };

  if (const auto* rej = std::get_if<textprep::RejectedMessage>(&prepped)) {
    return finish(Tier::T0, Action::Allow, std::string("rejected:") + textprep::to_string(rej->reason));
  }
  const auto& msg = std::get<textprep::NormalizedMessage>(prepped);
  d.normalized = msg.normalized;

  // Tier 0
  {
    const auto rules = components_.rules->get();
    const auto verdict = rules->screen(msg);
    TrailEntry e{Tier::T0, std::nullopt, verdict.matched, std::nullopt,
                 static_cast<std::int64_t>(std::llround(verdict.elapsed.count())), costs_.of(Tier::T0)};
    d.trail.push_back(e);
    if (verdict.action == rulefilter::Tier0Action::Remove) return finish(Tier::T0, Action::Remove, "rule");
    if (verdict.action == rulefilter::Tier0Action::Flag) return finish(Tier::T0, Action::Flag, "rule");
  }

  auto decide = [&](Tier tier, double p) -> std::optional<Decision> {
    switch (apply_band(thresholds_.band(tier), p)) {
      case BandOutcome::Allow: return finish(tier, Action::Allow, "confident_clean");
      case BandOutcome::Remove: return finish(tier, Action::Remove, "confident_toxic");
      case BandOutcome::Escalate: return std::nullopt;
    }
    return std::nullopt;
  };

  auto run_scorer = [&](Tier tier, const ProbabilityScorer& scorer) -> std::optional<Decision> {
    TrailEntry e{tier, std::nullopt, std::nullopt, std::nullopt, 0, costs_.of(tier)};
    const auto start = Clock::now();
    try {
      e.p_toxic = scorer.score(msg).p_toxic;
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    e.latency_us = micros_since(start);
    d.trail.push_back(e);
    if (!e.p_toxic) return std::nullopt;
    return decide(tier, *e.p_toxic);
  };

  auto record_llm = [&](Tier tier, const llmgate::ClassifyOutcome& out) -> std::optional<Decision> {
    TrailEntry e{tier, std::nullopt, std::nullopt, std::nullopt, out.latency.count(), costs_.of(tier)};
    if (out.ok()) {
      e.p_toxic = out.verdict->p_toxic;
    } else {
      e.error = std::string(llmgate::to_string(*out.error)) + ": " + out.error_detail;
    }
    d.trail.push_back(e);
    if (!e.p_toxic) return std::nullopt;
    return decide(tier, *e.p_toxic);
  };

  if (components_.tier1) {
    if (auto done = run_scorer(Tier::T1, *components_.tier1)) return *done;
  }

  if (components_.tier2a && components_.tier2a->provider) {
    const auto& stage = *components_.tier2a;
    const std::string prompt = stage.few_shot ? llmgate::build_few_shot_prompt(msg, *stage.few_shot)
                                              : llmgate::build_zero_shot_prompt(msg);
    const auto out = llmgate::classify(*stage.provider, prompt, stage.params, msg.id);
    if (auto done = record_llm(Tier::T2a, out)) return *done;
  }

  if (components_.tier2b) {
    if (auto done = run_scorer(Tier::T2b, *components_.tier2b)) return *done;
  }

  if (components_.tier3 && components_.tier3->provider) {
    const auto& stage = *components_.tier3;
    const auto start = Clock::now();
    std::vector<llmgate::RetrievedExample> retrieved;
    if (stage.index && stage.embedder) {
      try {
        const auto q = stage.embedder->embed(msg);
        for (const auto& hit : stage.index->query(q, stage.retrieval)) {
          retrieved.push_back({hit.entry.text, hit.entry.label, hit.similarity});
          d.neighbors.push_back({hit.entry.id, hit.entry.text, hit.entry.label, hit.similarity});
        }
      } catch (const DegenerateInput&) {
        // no retrieval context; the prompt degrades to zero-shot
      }
    }
    const auto retrieval_us = micros_since(start);
    auto out = llmgate::classify(*stage.provider, llmgate::build_rag_prompt(msg, retrieved), stage.params, msg.id);
    out.latency += std::chrono::microseconds(retrieval_us);
    if (auto done = record_llm(Tier::T3, out)) return *done;
  }

  return finish(Tier::Human, Action::Human, "uncertain");
}

}  // namespace toxcascade::cascade
