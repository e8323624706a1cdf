#pragma once
// Language-model gateway for Tiers 2a and 3: prompt construction, a generic
// provider interface with retry/timeout handling, a deterministic mock
// provider and a plain HTTP provider.

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toxcascade/errors.hpp"
#include "toxcascade/textprep.hpp"
#include "toxcascade/vectorize.hpp"

namespace toxcascade::llmgate {

using vectorize::Label;

// Confidence assigned to providers that only answer with a label.
inline constexpr double kSurrogateToxic = 0.95;
inline constexpr double kSurrogateClean = 0.05;

struct LlmParams {
  double temperature = 0.0;
  int max_tokens = 16;
  std::chrono::milliseconds timeout{5000};
  int max_retries = 2;
  std::chrono::milliseconds backoff_base{50};  // doubled after each failed attempt

  void validate() const;
};

struct LabeledText {
  std::string text;
  Label label = Label::Clean;
};

// Exactly five examples, three toxic and two clean, kept in the given order.
class FewShotSet {
 public:
  static FewShotSet create(std::vector<LabeledText> examples);  // throws InvalidArgument
  const std::vector<LabeledText>& examples() const { return examples_; }

 private:
  explicit FewShotSet(std::vector<LabeledText> e) : examples_(std::move(e)) {}
  std::vector<LabeledText> examples_;
};

struct RetrievedExample {
  std::string text;
  Label label = Label::Clean;
  double similarity = 0.0;
};

// Single-quoted message with backslash-escaped quotes and backslashes.
std::string quote_message(std::string_view text);

std::string build_zero_shot_prompt(const textprep::NormalizedMessage& msg);
std::string build_few_shot_prompt(const textprep::NormalizedMessage& msg, const FewShotSet& shots);
// Examples are listed by similarity, highest first; none falls back to zero-shot.
std::string build_rag_prompt(const textprep::NormalizedMessage& msg, std::vector<RetrievedExample> retrieved);

// First case-insensitive occurrence of "toxic" or "clean".
std::optional<Label> parse_label(std::string_view text);

struct ProviderRequest {
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 16;
  std::string message_id;  // correlation id, not part of the prompt
  std::chrono::milliseconds timeout{5000};
  int attempt = 0;
};

struct ProviderResponse {
  std::string text;
  double usage_units = 0.0;
  std::optional<double> p_toxic;  // richer providers may return a probability
  std::optional<std::chrono::microseconds> reported_latency;  // simulated providers
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  // Must be safe to call concurrently. Throws TransportError on failure.
  virtual ProviderResponse complete(const ProviderRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct ProviderVerdict {
  Label label = Label::Clean;
  double p_toxic = 0.0;
  std::string raw;
  std::chrono::microseconds latency{0};
  double cost_units = 0.0;
};

enum class LlmErrorKind { ProviderUnavailable, UnparsableResponse };
const char* to_string(LlmErrorKind kind);

struct ClassifyOutcome {
  std::optional<ProviderVerdict> verdict;
  std::optional<LlmErrorKind> error;
  std::string error_detail;
  std::chrono::microseconds latency{0};  // all attempts, excluding backoff sleeps
  double cost_units = 0.0;
  int attempts = 0;

  bool ok() const { return verdict.has_value(); }
};

// Never returns a fabricated verdict: transport failures after all retries
// and unparsable answers come back as errors.
ClassifyOutcome classify(LlmProvider& provider, const std::string& prompt, const LlmParams& params,
                         const std::string& message_id = {});

// Behaviour profile that lets the mock emulate a reported model.
struct OperatingPoint {
  double toxic_miss_rate = 0.0;          // P(answer clean | truly toxic)
  double clean_false_alarm_rate = 0.0;   // P(answer toxic | truly clean)
  double mean_latency_ms = 0.0;
  double cost_units_per_call = 0.0;
  double uncertain_rate = 0.0;    // fraction answered with a hedged probability in [0.3, 0.7]
  double failure_rate = 0.0;      // per-attempt transport failure probability
  double unparsable_rate = 0.0;   // fraction answered with neither keyword

  void validate() const;
};

// Operating point of the GPT-3.5 zero-shot row: 5 of 32 toxic missed,
// 16 of 68 clean flagged, 713 ms per call, $1,400 per million calls.
OperatingPoint gpt35_zero_shot_profile();

// Ground-truth lookup for the mock: message id and prompt to true label.
using GroundTruth = std::function<std::optional<Label>(std::string_view message_id, std::string_view prompt)>;

// Deterministic in (seed, message id): the true label is flipped with the
// class-conditional rate; latency is drawn from a log-normal with the
// profile mean. No real sleeping.
class MockProvider final : public LlmProvider {
 public:
  MockProvider(OperatingPoint profile, std::uint64_t seed, GroundTruth truth);

  ProviderResponse complete(const ProviderRequest& request) override;
  std::string name() const override { return "mock"; }

  // Uniform [0,1) draw keyed by (seed, message id, stream tag).
  double draw(std::string_view message_id, std::string_view tag) const;

 private:
  OperatingPoint profile_;
  std::uint64_t seed_;
  GroundTruth truth_;
};

// POSTs {prompt, temperature, max_tokens, message_id} as JSON to
// base_url + path and expects {text, usage_units, p_toxic?} back.
class HttpProvider final : public LlmProvider {
 public:
  HttpProvider(std::string base_url, std::string path = "/v1/complete");

  ProviderResponse complete(const ProviderRequest& request) override;
  std::string name() const override { return "http:" + base_url_; }

 private:
  std::string base_url_;
  std::string path_;
};

}  // namespace toxcascade::llmgate
