#include "toxcascade/evalharness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "rng.hpp"
#include "toxcascade/errors.hpp"

namespace toxcascade::evalharness {

namespace {

double safe_div(double a, double b) { return b == 0 ? 0.0 : a / b; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string money(double v) {
  // $1,400.00
  const auto cents = static_cast<long long>(std::llround(v * 100.0));
  std::string whole = std::to_string(cents / 100);
  for (int i = static_cast<int>(whole.size()) - 3; i > 0; i -= 3) whole.insert(static_cast<std::size_t>(i), ",");
  char frac[4];
  std::snprintf(frac, sizeof frac, "%02lld", cents % 100);
  return "$" + whole + "." + frac;
}

std::string pad(std::string s, std::size_t width, bool left = true) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

double percentile_ms(std::vector<std::int64_t> us, double q) {
  if (us.empty()) return 0;
  std::sort(us.begin(), us.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(us.size())));
  return static_cast<double>(us[std::clamp<std::size_t>(rank, 1, us.size()) - 1]) / 1000.0;
}

Prediction from_llm_outcome(const llmgate::ClassifyOutcome& out) {
  Prediction p;
  p.latency_us = out.latency.count();
  p.cost = out.cost_units;
  if (out.ok()) {
    p.label = out.verdict->label;
    p.p_toxic = out.verdict->p_toxic;
  } else {
    p.label = Label::Clean;
    p.p_toxic = 0.0;
    p.detail = std::string(llmgate::to_string(*out.error)) + ": " + out.error_detail;
  }
  return p;
}

}  // namespace

ConfusionMatrix confusion(std::span<const PredictedPair> pairs) {
  if (pairs.empty()) throw EmptyInput("confusion needs at least one prediction");
  ConfusionMatrix cm;
  for (const auto& [pred, truth] : pairs) {
    if (truth == Label::Toxic) {
      (pred == Label::Toxic ? cm.tp : cm.fn)++;
    } else {
      (pred == Label::Toxic ? cm.fp : cm.tn)++;
    }
  }
  return cm;
}

double f1_score(double precision, double recall) {
  return precision + recall == 0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.n() == 0) throw InvalidArgument("metrics need a non-empty confusion matrix");
  const auto tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
  const auto fn = static_cast<double>(cm.fn), tn = static_cast<double>(cm.tn);
  MetricsReport m;
  m.accuracy = (tp + tn) / static_cast<double>(cm.n());
  m.precision = safe_div(tp, tp + fp);
  m.recall = safe_div(tp, tp + fn);
  m.f1 = f1_score(m.precision, m.recall);
  // clean class as positive
  const double p_neg = safe_div(tn, tn + fn);
  const double r_neg = safe_div(tn, tn + fp);
  m.macro_precision = (m.precision + p_neg) / 2.0;
  m.macro_recall = (m.recall + r_neg) / 2.0;
  m.macro_f1 = (m.f1 + f1_score(p_neg, r_neg)) / 2.0;
  return m;
}

nlohmann::json to_json(const MetricsReport& m) {
  nlohmann::json j{{"accuracy", m.accuracy},
                   {"precision", m.precision},
                   {"recall", m.recall},
                   {"f1", m.f1},
                   {"macro_precision", m.macro_precision},
                   {"macro_recall", m.macro_recall},
                   {"macro_f1", m.macro_f1}};
  j["roc_auc"] = m.roc_auc ? nlohmann::json(*m.roc_auc) : nlohmann::json(nullptr);
  return j;
}

double round_half_even(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double y = x * scale;
  const double fl = std::floor(y);
  const double frac = y - fl;
  const double tol = 1e-9 * std::max(1.0, std::fabs(y));
  double r;
  if (std::fabs(frac - 0.5) <= tol) {
    r = std::fmod(fl, 2.0) == 0 ? fl : fl + 1;
  } else {
    r = std::round(y);
  }
  return r / scale;
}

double roc_auc(std::span<const ScoredLabel> scored) {
  std::size_t pos = 0;
  for (const auto& s : scored) pos += s.truth == Label::Toxic;
  const std::size_t neg = scored.size() - pos;
  if (pos == 0 || neg == 0) throw SingleClassInput("ROC-AUC needs both classes");

  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scored[a].score < scored[b].score; });
  // Ranks are 1-based; tied groups share the midrank. Sums stay exact in
  // half-integers for any realistic n.
  double rank_sum_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scored[order[j + 1]].score == scored[order[i]].score) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (scored[order[k]].truth == Label::Toxic) rank_sum_pos += midrank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(pos), n = static_cast<double>(neg);
  return (rank_sum_pos - p * (p + 1) / 2.0) / (p * n);
}

RankedPredictions rank(RankedPredictions items) {
  std::sort(items.begin(), items.end(), [](const RankedItem& a, const RankedItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return items;
}

double precision_at_k(const RankedPredictions& ranked, const std::unordered_map<std::string, Label>& human_labels,
                      std::size_t k) {
  if (k == 0 || k > ranked.size()) throw InvalidArgument("K must lie in [1, number of ranked items]");
  std::size_t toxic = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto it = human_labels.find(ranked[i].id);
    if (it == human_labels.end()) throw InsufficientLabels("no human label for top-K item " + ranked[i].id);
    toxic += it->second == Label::Toxic;
  }
  return static_cast<double>(toxic) / static_cast<double>(k);
}

double recall_estimate(std::span<const double> scores_of_toxic_sample, double threshold) {
  if (scores_of_toxic_sample.empty()) throw EmptyInput("recall estimate needs a labeled toxic sample");
  const auto flagged = std::count_if(scores_of_toxic_sample.begin(), scores_of_toxic_sample.end(),
                                     [&](double s) { return s > threshold; });
  return static_cast<double>(flagged) / static_cast<double>(scores_of_toxic_sample.size());
}

double human_validated_accuracy(std::span<const PredictedPair> model_vs_human) {
  if (model_vs_human.empty()) throw EmptyInput("no validated predictions");
  const auto agree = std::count_if(model_vs_human.begin(), model_vs_human.end(),
                                   [](const PredictedPair& p) { return p.predicted == p.truth; });
  return static_cast<double>(agree) / static_cast<double>(model_vs_human.size());
}

std::vector<std::string> triage_top_fraction(const RankedPredictions& items, double fraction) {
  if (!(fraction > 0 && fraction <= 1)) throw InvalidArgument("fraction must lie in (0, 1]");
  if (items.empty()) return {};
  const double raw = fraction * static_cast<double>(items.size());
  // 0.05 * 100 is 5.000000000000001 in binary; do not round that up to 6.
  auto take = static_cast<std::size_t>(std::ceil(raw - 1e-9 * raw));
  take = std::clamp<std::size_t>(take, 1, items.size());
  const auto ranked = rank(items);
  std::vector<std::string> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(ranked[i].id);
  return out;
}

SavingsLine moderation_savings(const SavingsParams& p, double volume) {
  if (!(p.automated_fraction >= 0 && p.automated_fraction <= 1)) {
    throw InvalidArgument("automated_fraction must lie in [0, 1]");
  }
  SavingsLine s;
  s.hours_avoided = p.automated_fraction * volume * p.review_seconds_per_message / 3600.0;
  s.usd_saved = s.hours_avoided * p.hourly_rate_usd;
  return s;
}

CostReport cost_report(const std::vector<MethodProfile>& profiles, double volume, std::optional<SavingsParams> savings) {
  CostReport r;
  r.volume = volume;
  for (const auto& p : profiles) {
    if (!(p.latency_ms > 0)) throw InvalidArgument("latency must be positive for " + p.name);
    r.rows.push_back({p.name, p.latency_ms, 1000.0 / p.latency_ms, p.unit_cost * volume, p.reference_throughput,
                      p.reference_cost});
  }
  if (savings) r.savings = moderation_savings(*savings, volume);
  return r;
}

ProfileFile parse_profiles(const nlohmann::json& j) {
  ProfileFile f;
  f.volume = j.value("volume", 1e6);
  for (const auto& jp : j.at("profiles")) {
    MethodProfile p;
    p.name = jp.at("name").get<std::string>();
    p.latency_ms = jp.at("latency_ms").get<double>();
    p.unit_cost = jp.at("unit_cost").get<double>();
    if (jp.contains("reference_throughput")) p.reference_throughput = jp["reference_throughput"].get<double>();
    if (jp.contains("reference_cost")) p.reference_cost = jp["reference_cost"].get<double>();
    f.profiles.push_back(std::move(p));
  }
  if (j.contains("savings")) {
    const auto& js = j["savings"];
    SavingsParams s;
    s.automated_fraction = js.value("automated_fraction", s.automated_fraction);
    s.review_seconds_per_message = js.value("review_seconds_per_message", s.review_seconds_per_message);
    s.hourly_rate_usd = js.value("hourly_rate_usd", s.hourly_rate_usd);
    f.savings = s;
  }
  return f;
}

ProfileFile load_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return parse_profiles(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string format_text(const CostReport& r) {
  std::ostringstream out;
  const std::string vol = r.volume == 1e6 ? "1M" : fmt("%.0f", r.volume);
  out << pad("method", 16) << pad("latency_ms", 12, false) << pad("msg/s", 10, false)
      << pad("cost/" + vol, 16, false) << pad("ref msg/s", 11, false) << pad("ref cost", 14, false) << '\n';
  for (const auto& row : r.rows) {
    out << pad(row.name, 16) << pad(fmt("%.0f", row.latency_ms), 12, false) << pad(fmt("%.2f", row.throughput), 10, false)
        << pad(money(row.cost), 16, false)
        << pad(row.reference_throughput ? fmt("%.1f", *row.reference_throughput) : "-", 11, false)
        << pad(row.reference_cost ? money(*row.reference_cost) : "-", 14, false) << '\n';
  }
  if (r.savings) {
    out << "moderation savings: " << fmt("%.1f", r.savings->hours_avoided) << " review hours avoided, "
        << money(r.savings->usd_saved) << " per " << vol << " messages\n";
  }
  return out.str();
}

std::string format_csv(const CostReport& r) {
  std::ostringstream out;
  out << "method,latency_ms,throughput_per_s,cost,reference_throughput,reference_cost\n";
  for (const auto& row : r.rows) {
    out << row.name << ',' << fmt("%.6g", row.latency_ms) << ',' << fmt("%.6f", row.throughput) << ','
        << fmt("%.2f", row.cost) << ',' << (row.reference_throughput ? fmt("%.6g", *row.reference_throughput) : "")
        << ',' << (row.reference_cost ? fmt("%.2f", *row.reference_cost) : "") << '\n';
  }
  if (r.savings) {
    out << "moderation_savings,,," << fmt("%.2f", r.savings->usd_saved) << ",,\n";
  }
  return out.str();
}

SubsetSpec parse_subset(std::string_view spec) {
  SubsetSpec s;
  const auto c1 = spec.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : spec.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw InvalidArgument("subset spec must look like size:fraction:seed");
  const auto a = spec.substr(0, c1), b = spec.substr(c1 + 1, c2 - c1 - 1), c = spec.substr(c2 + 1);
  auto bad = [&] { return InvalidArgument("malformed subset spec: " + std::string(spec)); };
  if (std::from_chars(a.data(), a.data() + a.size(), s.size).ec != std::errc{}) throw bad();
  if (std::from_chars(c.data(), c.data() + c.size(), s.seed).ec != std::errc{}) throw bad();
  try {
    std::size_t used = 0;
    s.positive_fraction = std::stod(std::string(b), &used);
    if (used != b.size()) throw bad();
  } catch (const std::logic_error&) {
    throw bad();
  }
  if (s.size == 0 || !(s.positive_fraction >= 0 && s.positive_fraction <= 1)) throw bad();
  return s;
}

std::vector<std::size_t> stratified_subset(const std::vector<corpus::LabeledMessage>& corpus, const SubsetSpec& spec) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < corpus.size(); ++i) (corpus[i].label == Label::Toxic ? pos : neg).push_back(i);
  const auto want_pos = static_cast<std::size_t>(std::llround(static_cast<double>(spec.size) * spec.positive_fraction));
  const auto want_neg = spec.size - want_pos;
  if (spec.size > corpus.size() || want_pos > pos.size() || want_neg > neg.size()) {
    throw CorpusTooSmall("corpus has " + std::to_string(pos.size()) + " toxic / " + std::to_string(neg.size()) +
                         " clean messages; subset needs " + std::to_string(want_pos) + " / " +
                         std::to_string(want_neg));
  }
  std::mt19937_64 rng(spec.seed);
  detail::shuffle(pos, rng);
  detail::shuffle(neg, rng);
  std::vector<std::size_t> out(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(want_pos));
  out.insert(out.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(want_neg));
  std::sort(out.begin(), out.end());
  return out;
}

linear::LinearModel train_tier1(const std::vector<corpus::LabeledMessage>& corpus, const textprep::Preprocessor& prep,
                                const vectorize::TextEmbedder& embedder, const linear::TrainConfig& cfg) {
  std::vector<linear::LabeledVector> examples;
  examples.reserve(corpus.size());
  for (const auto& m : corpus) {
    const auto r = prep.normalize({m.id, m.text, std::nullopt, 0});
    const auto* n = std::get_if<textprep::NormalizedMessage>(&r);
    if (!n) continue;
    try {
      examples.push_back({embedder.embed(*n), m.label});
    } catch (const DegenerateInput&) {
    }
  }
  return linear::train_sgd(examples, cfg);
}

Tier1Adapter::Tier1Adapter(std::shared_ptr<const textprep::Preprocessor> prep,
                           std::shared_ptr<const vectorize::TextEmbedder> embedder,
                           std::shared_ptr<const linear::LinearModel> model, double unit_cost)
    : prep_(std::move(prep)), embedder_(std::move(embedder)), model_(std::move(model)), unit_cost_(unit_cost) {}

Prediction Tier1Adapter::predict(const corpus::LabeledMessage& msg) const {
  const auto start = std::chrono::steady_clock::now();
  Prediction p;
  const auto r = prep_->normalize({msg.id, msg.text, std::nullopt, 0});
  if (const auto* n = std::get_if<textprep::NormalizedMessage>(&r)) {
    try {
      p.p_toxic = linear::predict_proba(*model_, embedder_->embed(*n)).p_toxic;
      p.cost = unit_cost_;
    } catch (const DegenerateInput& e) {
      p.detail = e.what();
    }
  } else {
    p.detail = "rejected";
  }
  p.label = p.p_toxic >= 0.5 ? Label::Toxic : Label::Clean;
  p.latency_us =
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start).count();
  return p;
}

LlmAdapter::LlmAdapter(std::shared_ptr<const textprep::Preprocessor> prep, std::shared_ptr<llmgate::LlmProvider> provider,
                       llmgate::LlmParams params, std::optional<llmgate::FewShotSet> few_shot)
    : prep_(std::move(prep)), provider_(std::move(provider)), params_(params), few_shot_(std::move(few_shot)) {}

Prediction LlmAdapter::predict(const corpus::LabeledMessage& msg) const {
  const auto r = prep_->normalize({msg.id, msg.text, std::nullopt, 0});
  textprep::NormalizedMessage n;
  if (const auto* ok = std::get_if<textprep::NormalizedMessage>(&r)) {
    n = *ok;
  } else {
    // Short messages are still sent to the model; only the prompt needs text.
    n.id = msg.id;
    n.normalized = msg.text;
  }
  const auto prompt = few_shot_ ? llmgate::build_few_shot_prompt(n, *few_shot_) : llmgate::build_zero_shot_prompt(n);
  return from_llm_outcome(llmgate::classify(*provider_, prompt, params_, msg.id));
}

RagAdapter::RagAdapter(std::shared_ptr<const textprep::Preprocessor> prep, cascade::RagStage stage)
    : prep_(std::move(prep)), stage_(std::move(stage)) {}

Prediction RagAdapter::predict(const corpus::LabeledMessage& msg) const {
  const auto r = prep_->normalize({msg.id, msg.text, std::nullopt, 0});
  textprep::NormalizedMessage n;
  std::vector<llmgate::RetrievedExample> retrieved;
  std::int64_t retrieval_us = 0;
  if (const auto* ok = std::get_if<textprep::NormalizedMessage>(&r)) {
    n = *ok;
    const auto start = std::chrono::steady_clock::now();
    try {
      auto cfg = stage_.retrieval;
      cfg.k += 1;  // room for the message itself
      for (const auto& hit : stage_.index->query(stage_.embedder->embed(n), cfg)) {
        if (hit.entry.id == msg.id || retrieved.size() == stage_.retrieval.k) continue;
        retrieved.push_back({hit.entry.text, hit.entry.label, hit.similarity});
      }
    } catch (const DegenerateInput&) {
    }
    retrieval_us =
        std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start).count();
  } else {
    n.id = msg.id;
    n.normalized = msg.text;
  }
  auto p = from_llm_outcome(
      llmgate::classify(*stage_.provider, llmgate::build_rag_prompt(n, std::move(retrieved)), stage_.params, msg.id));
  p.latency_us += retrieval_us;
  return p;
}

Prediction CascadeAdapter::predict(const corpus::LabeledMessage& msg) const {
  const auto d = cascade_->route({msg.id, msg.text, std::nullopt, 0});
  Prediction p;
  p.latency_us = d.latency_total_us;
  p.cost = d.cost_total;
  p.detail = std::string("tier ") + cascade::to_string(d.terminal_tier);
  switch (d.action) {
    case cascade::Action::Remove:
      p.label = Label::Toxic;
      p.p_toxic = d.final_p().value_or(1.0);
      break;
    case cascade::Action::Flag:
      p.label = Label::Toxic;
      p.p_toxic = d.final_p().value_or(1.0);
      break;
    case cascade::Action::Allow:
      p.label = Label::Clean;
      p.p_toxic = d.final_p().value_or(0.0);
      break;
    case cascade::Action::Human:
      p.p_toxic = d.final_p().value_or(0.5);
      p.label = p.p_toxic >= 0.5 ? Label::Toxic : Label::Clean;
      break;
  }
  return p;
}

BenchmarkResult run_benchmark(const std::vector<corpus::LabeledMessage>& corpus, const MethodAdapter& adapter,
                              const std::optional<SubsetSpec>& subset, unsigned threads) {
  std::vector<std::size_t> idx;
  if (subset) {
    idx = stratified_subset(corpus, *subset);
  } else {
    if (corpus.empty()) throw CorpusTooSmall("empty corpus");
    idx.resize(corpus.size());
    std::iota(idx.begin(), idx.end(), 0);
  }
  BenchmarkResult r;
  r.method = adapter.name();
  r.log.resize(idx.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < idx.size(); i = next++) {
      const auto& m = corpus[idx[i]];
      r.log[i] = PredictionRecord{m.id, m.label, adapter.predict(m)};
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<PredictedPair> pairs;
  std::vector<ScoredLabel> scored;
  std::vector<std::int64_t> lat;
  for (const auto& rec : r.log) {
    pairs.push_back({rec.prediction.label, rec.truth});
    scored.push_back({rec.prediction.p_toxic, rec.truth});
    lat.push_back(rec.prediction.latency_us);
    r.cost_total += rec.prediction.cost;
  }
  r.cm = confusion(pairs);
  r.metrics = metrics(r.cm);
  if (r.cm.tp + r.cm.fn > 0 && r.cm.fp + r.cm.tn > 0) r.metrics.roc_auc = roc_auc(scored);
  double sum = 0;
  for (auto v : lat) sum += static_cast<double>(v);
  r.mean_latency_ms = sum / static_cast<double>(lat.size()) / 1000.0;
  r.p50_latency_ms = percentile_ms(lat, 0.5);
  r.p95_latency_ms = percentile_ms(lat, 0.95);
  return r;
}

std::string format_text(const BenchmarkResult& r) {
  std::ostringstream out;
  const auto& m = r.metrics;
  out << "method      " << r.method << '\n'
      << "n           " << r.cm.n() << "  (tp " << r.cm.tp << ", fp " << r.cm.fp << ", fn " << r.cm.fn << ", tn "
      << r.cm.tn << ")\n"
      << "accuracy    " << fmt("%.3f", round_half_even(m.accuracy)) << '\n'
      << "precision   " << fmt("%.3f", round_half_even(m.precision)) << '\n'
      << "recall      " << fmt("%.3f", round_half_even(m.recall)) << '\n'
      << "f1          " << fmt("%.3f", round_half_even(m.f1)) << '\n'
      << "macro f1    " << fmt("%.3f", round_half_even(m.macro_f1)) << '\n'
      << "roc auc     " << (m.roc_auc ? fmt("%.3f", round_half_even(*m.roc_auc)) : "n/a") << '\n'
      << "latency ms  mean " << fmt("%.2f", r.mean_latency_ms) << "  p50 " << fmt("%.2f", r.p50_latency_ms)
      << "  p95 " << fmt("%.2f", r.p95_latency_ms) << '\n'
      << "cost        " << fmt("%.6f", r.cost_total) << '\n';
  return out.str();
}

std::string format_csv(const BenchmarkResult& r) {
  const auto& m = r.metrics;
  std::ostringstream out;
  out << "method,n,tp,fp,fn,tn,accuracy,precision,recall,f1,macro_f1,roc_auc,mean_latency_ms,p50_latency_ms,"
         "p95_latency_ms,cost_total\n";
  out << r.method << ',' << r.cm.n() << ',' << r.cm.tp << ',' << r.cm.fp << ',' << r.cm.fn << ',' << r.cm.tn << ','
      << fmt("%.6f", m.accuracy) << ',' << fmt("%.6f", m.precision) << ',' << fmt("%.6f", m.recall) << ','
      << fmt("%.6f", m.f1) << ',' << fmt("%.6f", m.macro_f1) << ',' << (m.roc_auc ? fmt("%.6f", *m.roc_auc) : "")
      << ',' << fmt("%.4f", r.mean_latency_ms) << ',' << fmt("%.4f", r.p50_latency_ms) << ','
      << fmt("%.4f", r.p95_latency_ms) << ',' << fmt("%.8f", r.cost_total) << '\n';
  return out.str();
}

void write_prediction_log(const BenchmarkResult& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  for (const auto& rec : r.log) {
    out << nlohmann::json{{"id", rec.id},
                          {"method", r.method},
                          {"truth", vectorize::to_string(rec.truth)},
                          {"predicted", vectorize::to_string(rec.prediction.label)},
                          {"p_toxic", rec.prediction.p_toxic},
                          {"latency_us", rec.prediction.latency_us},
                          {"cost", rec.prediction.cost},
                          {"detail", rec.prediction.detail}}
               .dump()
        << '\n';
  }
}

ConfusionMatrix replay_prediction_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<PredictedPair> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    pairs.push_back({vectorize::label_from_string(j.at("predicted").get<std::string>()),
                     vectorize::label_from_string(j.at("truth").get<std::string>())});
  }
  return confusion(pairs);
}

}  // namespace toxcascade::evalharness
