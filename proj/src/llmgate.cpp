#include "toxcascade/llmgate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace toxcascade::llmgate {

namespace {

constexpr std::string_view kZeroShotLead = "Classify the following gaming chat message as toxic or clean: ";
constexpr std::string_view kAnswerFormat = "Answer with exactly one word: toxic or clean.";
constexpr std::string_view kRagLead =
    "Given the following examples of gaming chat messages, classify the new message as toxic or clean:";
constexpr std::string_view kArrow = " → ";

std::string example_line(std::string_view text, Label label) {
  return quote_message(text) + std::string(kArrow) + vectorize::to_string(label);
}

}  // namespace

void LlmParams::validate() const {
  if (temperature < 0) throw InvalidArgument("temperature must be >= 0");
  if (max_tokens < 1) throw InvalidArgument("max_tokens must be >= 1");
  if (max_retries < 0) throw InvalidArgument("max_retries must be >= 0");
  if (timeout.count() <= 0) throw InvalidArgument("timeout must be positive");
}

FewShotSet FewShotSet::create(std::vector<LabeledText> examples) {
  if (examples.size() != 5) throw InvalidArgument("few-shot set needs exactly 5 examples");
  const auto toxic = std::count_if(examples.begin(), examples.end(),
                                   [](const LabeledText& e) { return e.label == Label::Toxic; });
  if (toxic != 3) throw InvalidArgument("few-shot set needs 3 toxic and 2 clean examples");
  return FewShotSet(std::move(examples));
}

std::string quote_message(std::string_view text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

std::string build_zero_shot_prompt(const textprep::NormalizedMessage& msg) {
  std::string p(kZeroShotLead);
  p += quote_message(msg.normalized);
  p += ". ";
  p += kAnswerFormat;
  return p;
}

std::string build_few_shot_prompt(const textprep::NormalizedMessage& msg, const FewShotSet& shots) {
  std::string p;
  for (const auto& e : shots.examples()) {
    p += example_line(e.text, e.label);
    p += '\n';
  }
  p += build_zero_shot_prompt(msg);
  return p;
}

std::string build_rag_prompt(const textprep::NormalizedMessage& msg, std::vector<RetrievedExample> retrieved) {
  if (retrieved.empty()) return build_zero_shot_prompt(msg);
  std::stable_sort(retrieved.begin(), retrieved.end(),
                   [](const RetrievedExample& a, const RetrievedExample& b) { return a.similarity > b.similarity; });
  std::string p(kRagLead);
  p += '\n';
  for (const auto& r : retrieved) {
    p += example_line(r.text, r.label);
    p += '\n';
  }
  p += "New message: ";
  p += quote_message(msg.normalized);
  p += ". ";
  p += kAnswerFormat;
  return p;
}

std::optional<Label> parse_label(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const auto t = lower.find("toxic");
  const auto c = lower.find("clean");
  if (t == std::string::npos && c == std::string::npos) return std::nullopt;
  return t < c ? Label::Toxic : Label::Clean;
}

const char* to_string(LlmErrorKind kind) {
  return kind == LlmErrorKind::ProviderUnavailable ? "provider_unavailable" : "unparsable_response";
}

ClassifyOutcome classify(LlmProvider& provider, const std::string& prompt, const LlmParams& params,
                         const std::string& message_id) {
  params.validate();
  ClassifyOutcome out;
  std::string last_error;
  for (int attempt = 0; attempt <= params.max_retries; ++attempt) {
    if (attempt > 0 && params.backoff_base.count() > 0) {
      std::this_thread::sleep_for(params.backoff_base * (1 << std::min(attempt - 1, 10)));
    }
    out.attempts = attempt + 1;
    ProviderRequest req{prompt, params.temperature, params.max_tokens, message_id, params.timeout, attempt};
    const auto start = std::chrono::steady_clock::now();
    try {
      ProviderResponse resp = provider.complete(req);
      auto elapsed = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
      if (resp.reported_latency) elapsed = *resp.reported_latency;
      out.latency += elapsed;
      out.cost_units += resp.usage_units;
      if (elapsed > params.timeout) {
        last_error = "timed out after " + std::to_string(elapsed.count()) + " us";
        continue;
      }
      std::optional<Label> label = parse_label(resp.text);
      if (resp.p_toxic) {
        const double p = std::clamp(*resp.p_toxic, 0.0, 1.0);
        out.verdict = ProviderVerdict{p >= 0.5 ? Label::Toxic : Label::Clean, p, resp.text, elapsed, resp.usage_units};
        return out;
      }
      if (!label) {
        out.error = LlmErrorKind::UnparsableResponse;
        out.error_detail = "no label in response: " + resp.text;
        return out;
      }
      const double p = *label == Label::Toxic ? kSurrogateToxic : kSurrogateClean;
      out.verdict = ProviderVerdict{*label, p, resp.text, elapsed, resp.usage_units};
      return out;
    } catch (const TransportError& e) {
      out.latency += std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
      last_error = e.what();
    }
  }
  out.error = LlmErrorKind::ProviderUnavailable;
  out.error_detail = "retries exhausted: " + last_error;
  return out;
}

void OperatingPoint::validate() const {
  for (double r : {toxic_miss_rate, clean_false_alarm_rate, uncertain_rate, failure_rate, unparsable_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("operating point rates must lie in [0, 1]");
  }
  if (mean_latency_ms < 0 || cost_units_per_call < 0) throw InvalidArgument("latency and cost must be >= 0");
}

OperatingPoint gpt35_zero_shot_profile() {
  OperatingPoint op;
  op.toxic_miss_rate = 5.0 / 32.0;
  op.clean_false_alarm_rate = 16.0 / 68.0;
  op.mean_latency_ms = 713.0;
  op.cost_units_per_call = 1400.0 / 1e6;
  return op;
}

MockProvider::MockProvider(OperatingPoint profile, std::uint64_t seed, GroundTruth truth)
    : profile_(profile), seed_(seed), truth_(std::move(truth)) {
  profile_.validate();
}

double MockProvider::draw(std::string_view message_id, std::string_view tag) const {
  std::string key(message_id);
  key += '\x1f';
  key += tag;
  return static_cast<double>(vectorize::stable_hash(key, seed_) >> 11) * 0x1.0p-53;
}

ProviderResponse MockProvider::complete(const ProviderRequest& request) {
  const std::string& id = request.message_id;
  if (draw(id, "fail" + std::to_string(request.attempt)) < profile_.failure_rate) {
    throw TransportError("mock transport failure");
  }
  ProviderResponse resp;
  resp.usage_units = profile_.cost_units_per_call;
  if (profile_.mean_latency_ms > 0) {
    // Log-normal with sigma 0.25 and the configured mean.
    constexpr double kSigma = 0.25;
    const double u1 = std::max(draw(id, "lat1"), 1e-300);
    const double u2 = draw(id, "lat2");
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    const double ms = profile_.mean_latency_ms * std::exp(kSigma * z - 0.5 * kSigma * kSigma);
    resp.reported_latency = std::chrono::microseconds(static_cast<std::int64_t>(std::llround(ms * 1000.0)));
  } else {
    resp.reported_latency = std::chrono::microseconds(0);
  }
  if (draw(id, "unparsable") < profile_.unparsable_rate) {
    resp.text = "I am not sure.";
    return resp;
  }
  const Label truth = truth_ ? truth_(id, request.prompt).value_or(Label::Clean) : Label::Clean;
  const double flip_rate = truth == Label::Toxic ? profile_.toxic_miss_rate : profile_.clean_false_alarm_rate;
  const bool flip = draw(id, "flip") < flip_rate;
  const Label answer = flip ? (truth == Label::Toxic ? Label::Clean : Label::Toxic) : truth;
  if (draw(id, "hedge") < profile_.uncertain_rate) {
    // Hedged probability on the answer's side of 0.5.
    const double u = draw(id, "hedge_p");
    resp.p_toxic = answer == Label::Toxic ? 0.5 + 0.2 * u : 0.5 - 0.2 * (1.0 - u);
  }
  resp.text = vectorize::to_string(answer);
  return resp;
}

HttpProvider::HttpProvider(std::string base_url, std::string path)
    : base_url_(std::move(base_url)), path_(std::move(path)) {}

ProviderResponse HttpProvider::complete(const ProviderRequest& request) {
  httplib::Client client(base_url_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  const nlohmann::json body{{"prompt", request.prompt},
                            {"temperature", request.temperature},
                            {"max_tokens", request.max_tokens},
                            {"message_id", request.message_id}};
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout) {
      throw TimeoutError("provider request failed: " + httplib::to_string(err));
    }
    throw TransportError("provider request failed: " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("provider returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto j = nlohmann::json::parse(res->body);
    ProviderResponse out;
    out.text = j.at("text").get<std::string>();
    if (j.contains("usage_units")) {
      out.usage_units = j["usage_units"].get<double>();
    } else if (j.contains("usage")) {
      out.usage_units = j["usage"].get<double>();
    }
    if (j.contains("p_toxic") && !j["p_toxic"].is_null()) out.p_toxic = j["p_toxic"].get<double>();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed provider response: ") + e.what());
  }
}

}  // namespace toxcascade::llmgate
