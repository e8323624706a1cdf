#pragma once
// Classification metrics, ranking metrics, cost accounting and the offline
// benchmark runner. Toxic is the positive class everywhere.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "toxcascade/cascade.hpp"
#include "toxcascade/corpus.hpp"
#include "toxcascade/linear.hpp"
#include "toxcascade/llmgate.hpp"
#include "toxcascade/textprep.hpp"
#include "toxcascade/vectorize.hpp"

namespace toxcascade::evalharness {

using vectorize::Label;

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t n() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct PredictedPair {
  Label predicted;
  Label truth;
};

// Throws EmptyInput.
ConfusionMatrix confusion(std::span<const PredictedPair> pairs);

struct MetricsReport {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
  std::optional<double> roc_auc;
};

nlohmann::json to_json(const MetricsReport& m);

// Zero denominators give 0. Throws InvalidArgument when n == 0.
MetricsReport metrics(const ConfusionMatrix& cm);
double f1_score(double precision, double recall);

// Round half to even at `decimals` places. Values within 1e-9 (relative to
// the scaled value) of a half are treated as exact halves.
double round_half_even(double x, int decimals = 3);

struct ScoredLabel {
  double score;
  Label truth;
};

// Mann-Whitney statistic with midranks: P(pos > neg) + 0.5 P(tie).
// Throws SingleClassInput.
double roc_auc(std::span<const ScoredLabel> scored);

struct RankedItem {
  std::string id;
  double score = 0;
  std::optional<Label> truth;
};
using RankedPredictions = std::vector<RankedItem>;

// Score descending, ties by id ascending.
RankedPredictions rank(RankedPredictions items);

// Confirmed-toxic count among the top k, over k. `ranked` must already be
// ranked. Throws InvalidArgument (k == 0 or k > size) and InsufficientLabels
// (a top-k item has no human label).
double precision_at_k(const RankedPredictions& ranked, const std::unordered_map<std::string, Label>& human_labels,
                      std::size_t k);

// Fraction of known-toxic messages scored strictly above the threshold.
// Throws EmptyInput.
double recall_estimate(std::span<const double> scores_of_toxic_sample, double threshold);

// Agreement between model predictions and human labels on a validated
// sample. Throws EmptyInput.
double human_validated_accuracy(std::span<const PredictedPair> model_vs_human);

// ceil(fraction * n) highest-scored ids, score descending, ties by id.
// Throws InvalidArgument unless fraction lies in (0, 1].
std::vector<std::string> triage_top_fraction(const RankedPredictions& items, double fraction = 0.05);

struct MethodProfile {
  std::string name;
  double latency_ms = 0;
  double unit_cost = 0;  // USD per message
  // Published figures, if any, for side-by-side comparison.
  std::optional<double> reference_throughput;
  std::optional<double> reference_cost;
};

struct SavingsParams {
  double automated_fraction = 0.0;       // share of traffic that never reaches a human
  double review_seconds_per_message = 10.0;
  double hourly_rate_usd = 50.0;
};

struct CostRow {
  std::string name;
  double latency_ms = 0;
  double throughput = 0;  // messages per second
  double cost = 0;        // USD per `volume` messages
  std::optional<double> reference_throughput;
  std::optional<double> reference_cost;
};

struct SavingsLine {
  double hours_avoided = 0;
  double usd_saved = 0;
};

struct CostReport {
  double volume = 1e6;
  std::vector<CostRow> rows;
  std::optional<SavingsLine> savings;
};

// Throws InvalidArgument when a latency is not positive.
CostReport cost_report(const std::vector<MethodProfile>& profiles, double volume = 1e6,
                       std::optional<SavingsParams> savings = std::nullopt);
SavingsLine moderation_savings(const SavingsParams& p, double volume);

// {"volume"?, "profiles": [{name, latency_ms, unit_cost, reference_throughput?, reference_cost?}],
//  "savings"?: {automated_fraction, review_seconds_per_message, hourly_rate_usd}}
struct ProfileFile {
  std::vector<MethodProfile> profiles;
  double volume = 1e6;
  std::optional<SavingsParams> savings;
};
ProfileFile parse_profiles(const nlohmann::json& j);
ProfileFile load_profiles(const std::string& path);

std::string format_text(const CostReport& r);
std::string format_csv(const CostReport& r);

// Embeds every message that survives preprocessing and trains a Tier 1 model.
// Throws SingleClassData when the usable messages cover one class only.
linear::LinearModel train_tier1(const std::vector<corpus::LabeledMessage>& corpus, const textprep::Preprocessor& prep,
                                const vectorize::TextEmbedder& embedder, const linear::TrainConfig& cfg);

// ---- benchmark runner ----

struct SubsetSpec {
  std::size_t size = 100;
  double positive_fraction = 0.32;
  std::uint64_t seed = 0;
};
// "100:0.32:7"
SubsetSpec parse_subset(std::string_view spec);

// Indices into `corpus` of a stratified sample with exactly
// round(size * positive_fraction) toxic messages, ascending.
// Throws CorpusTooSmall.
std::vector<std::size_t> stratified_subset(const std::vector<corpus::LabeledMessage>& corpus, const SubsetSpec& spec);

struct Prediction {
  Label label = Label::Clean;
  double p_toxic = 0;
  std::int64_t latency_us = 0;
  double cost = 0;
  std::string detail;  // e.g. terminal tier, error text
};

class MethodAdapter {
 public:
  virtual ~MethodAdapter() = default;
  virtual std::string name() const = 0;
  // Must be safe to call concurrently.
  virtual Prediction predict(const corpus::LabeledMessage& msg) const = 0;
};

// Embedding + linear model. Messages rejected by preprocessing score 0.
class Tier1Adapter final : public MethodAdapter {
 public:
  Tier1Adapter(std::shared_ptr<const textprep::Preprocessor> prep,
               std::shared_ptr<const vectorize::TextEmbedder> embedder,
               std::shared_ptr<const linear::LinearModel> model, double unit_cost = 0.0);
  std::string name() const override { return "tier1"; }
  Prediction predict(const corpus::LabeledMessage& msg) const override;

 private:
  std::shared_ptr<const textprep::Preprocessor> prep_;
  std::shared_ptr<const vectorize::TextEmbedder> embedder_;
  std::shared_ptr<const linear::LinearModel> model_;
  double unit_cost_;
};

// Zero-shot (or few-shot) prompt through an LLM provider. Provider errors
// are scored as clean and reported in `detail`.
class LlmAdapter final : public MethodAdapter {
 public:
  LlmAdapter(std::shared_ptr<const textprep::Preprocessor> prep, std::shared_ptr<llmgate::LlmProvider> provider,
             llmgate::LlmParams params, std::optional<llmgate::FewShotSet> few_shot = std::nullopt);
  std::string name() const override { return few_shot_ ? "mock-llm-few" : "mock-llm"; }
  Prediction predict(const corpus::LabeledMessage& msg) const override;

 private:
  std::shared_ptr<const textprep::Preprocessor> prep_;
  std::shared_ptr<llmgate::LlmProvider> provider_;
  llmgate::LlmParams params_;
  std::optional<llmgate::FewShotSet> few_shot_;
};

// Retrieval-augmented prompt. The message itself is excluded from its own
// neighbours when it is present in the index.
class RagAdapter final : public MethodAdapter {
 public:
  RagAdapter(std::shared_ptr<const textprep::Preprocessor> prep, cascade::RagStage stage);
  std::string name() const override { return "rag"; }
  Prediction predict(const corpus::LabeledMessage& msg) const override;

 private:
  std::shared_ptr<const textprep::Preprocessor> prep_;
  cascade::RagStage stage_;
};

// Full cascade. Human outcomes are scored by the deepest probability seen
// (0.5 when none), labelled toxic iff that probability is >= 0.5.
class CascadeAdapter final : public MethodAdapter {
 public:
  explicit CascadeAdapter(std::shared_ptr<const cascade::Cascade> cascade) : cascade_(std::move(cascade)) {}
  std::string name() const override { return "cascade"; }
  Prediction predict(const corpus::LabeledMessage& msg) const override;

 private:
  std::shared_ptr<const cascade::Cascade> cascade_;
};

struct PredictionRecord {
  std::string id;
  Label truth = Label::Clean;
  Prediction prediction;
};

struct BenchmarkResult {
  std::string method;
  ConfusionMatrix cm;
  MetricsReport metrics;
  double mean_latency_ms = 0;
  double p50_latency_ms = 0;
  double p95_latency_ms = 0;
  double cost_total = 0;
  std::vector<PredictionRecord> log;  // corpus order
};

// Evaluates `adapter` on the subset (or the full corpus). Scores messages on
// `threads` workers; the report does not depend on the thread count.
BenchmarkResult run_benchmark(const std::vector<corpus::LabeledMessage>& corpus, const MethodAdapter& adapter,
                              const std::optional<SubsetSpec>& subset, unsigned threads = 1);

std::string format_text(const BenchmarkResult& r);
std::string format_csv(const BenchmarkResult& r);
void write_prediction_log(const BenchmarkResult& r, const std::string& path);
// Recomputes the confusion matrix from a prediction log written above.
ConfusionMatrix replay_prediction_log(const std::string& path);

}  // namespace toxcascade::evalharness
