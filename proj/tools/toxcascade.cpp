// Command-line front end: serve, train, bench, retrain, kb, synth.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "toxcascade/cascade.hpp"
#include "toxcascade/corpus.hpp"
#include "toxcascade/errors.hpp"
#include "toxcascade/evalharness.hpp"
#include "toxcascade/kernels.hpp"
#include "toxcascade/linear.hpp"
#include "toxcascade/service/config.hpp"
#include "toxcascade/service/http_api.hpp"
#include "toxcascade/service/moderation_service.hpp"

namespace tc = toxcascade;
namespace fs = std::filesystem;

namespace {

tc::service::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw tc::Error("cannot write " + path);
  out << content;
}

tc::service::ServiceConfig config_or_default(const std::string& path) {
  const auto resolved = tc::service::resolve_config_path(path);
  if (resolved.empty()) return tc::service::default_config();
  return tc::service::load_config(resolved);
}

struct TrainOptions {
  std::string loss = "hinge";
  double alpha = 1e-4;
  std::size_t max_iter = 1000;
  double tol = 1e-3;
  std::uint64_t seed = 0;
};

tc::linear::TrainConfig to_train_config(const TrainOptions& o) {
  tc::linear::TrainConfig cfg;
  cfg.loss = tc::linear::loss_from_string(o.loss);
  cfg.alpha = o.alpha;
  cfg.max_iter = o.max_iter;
  cfg.tol = o.tol;
  cfg.seed = o.seed;
  return cfg;
}

void add_train_options(CLI::App* cmd, TrainOptions& o) {
  cmd->add_option("--loss", o.loss, "hinge or log")->check(CLI::IsMember({"hinge", "log"}));
  cmd->add_option("--alpha", o.alpha, "L2 penalty");
  cmd->add_option("--max-iter", o.max_iter, "maximum epochs");
  cmd->add_option("--tol", o.tol, "stopping tolerance");
  cmd->add_option("--seed", o.seed, "shuffle seed");
}

int cmd_serve(const std::string& config_path) {
  const auto cfg = config_or_default(config_path);
  tc::service::ModerationService svc(cfg);
  tc::service::HttpServer server(svc, cfg.static_dir);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "toxcascade: listening on " << cfg.host << ':' << cfg.port << " (kernels: " << tc::kernels::active().name
            << ", data: " << cfg.data_dir << ")\n";
  const bool ok = server.listen(cfg.host, cfg.port);
  g_server = nullptr;
  if (!ok) {
    std::cerr << "toxcascade: cannot bind " << cfg.host << ':' << cfg.port << '\n';
    return 1;
  }
  return 0;
}

int cmd_train(const std::string& corpus_path, const std::string& out, const TrainOptions& opts,
              const std::string& config_path) {
  const auto cfg = config_or_default(config_path);
  const auto data = tc::corpus::load(corpus_path);
  tc::textprep::Preprocessor prep(cfg.prep);
  tc::vectorize::HashingEmbedder embedder(cfg.embed_dims, cfg.embed_seed);
  const auto model = tc::evalharness::train_tier1(data, prep, embedder, to_train_config(opts));
  tc::linear::save_model(model, out);
  std::cout << "trained " << tc::linear::to_string(model.loss) << " model on " << data.size() << " messages, "
            << model.epochs_run << " epochs -> " << out << '\n';
  return 0;
}

struct BenchOptions {
  std::string corpus;
  std::string method = "tier1";
  std::string subset;
  std::string model;
  std::string rules;
  std::string config;
  std::string csv;
  std::string log;
  unsigned threads = 1;
  TrainOptions train;
};

int cmd_bench_run(const BenchOptions& o) {
  const auto cfg = config_or_default(o.config);
  const auto data = tc::corpus::load(o.corpus);
  std::optional<tc::evalharness::SubsetSpec> subset;
  if (!o.subset.empty()) subset = tc::evalharness::parse_subset(o.subset);

  // Messages outside the evaluation set train Tier 1 and fill the knowledge base.
  std::vector<tc::corpus::LabeledMessage> rest;
  if (subset) {
    const auto idx = tc::evalharness::stratified_subset(data, *subset);
    std::vector<bool> used(data.size(), false);
    for (auto i : idx) used[i] = true;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!used[i]) rest.push_back(data[i]);
    }
  }

  auto prep = std::make_shared<tc::textprep::Preprocessor>(cfg.prep);
  auto embedder = std::make_shared<tc::vectorize::HashingEmbedder>(cfg.embed_dims, cfg.embed_seed);
  const auto truth = tc::service::truth_from_corpus(data);

  auto load_or_train = [&]() -> std::shared_ptr<const tc::linear::LinearModel> {
    if (!o.model.empty()) return std::make_shared<tc::linear::LinearModel>(tc::linear::load_model(o.model));
    if (rest.empty()) throw tc::InvalidArgument("--model is required when benchmarking on the full corpus");
    return std::make_shared<tc::linear::LinearModel>(
        tc::evalharness::train_tier1(rest, *prep, *embedder, to_train_config(o.train)));
  };
  auto knowledge_base = [&]() -> std::shared_ptr<tc::vectorize::KnnIndex> {
    return tc::service::build_kb(rest.empty() ? data : rest, *prep, *embedder);
  };

  std::unique_ptr<tc::evalharness::MethodAdapter> adapter;
  if (o.method == "tier1") {
    adapter = std::make_unique<tc::evalharness::Tier1Adapter>(prep, embedder, load_or_train(),
                                                              cfg.unit_costs.of(tc::cascade::Tier::T1));
  } else if (o.method == "mock-llm") {
    adapter = std::make_unique<tc::evalharness::LlmAdapter>(prep, tc::service::make_provider(cfg.tier2a, truth),
                                                            cfg.tier2a.params);
  } else if (o.method == "rag") {
    tc::cascade::RagStage stage{tc::service::make_provider(cfg.tier3, truth), cfg.tier3.params, embedder,
                                knowledge_base(), cfg.retrieval};
    adapter = std::make_unique<tc::evalharness::RagAdapter>(prep, std::move(stage));
  } else {
    tc::cascade::Components c;
    c.prep = prep;
    const auto rules_path = o.rules.empty() ? cfg.rules_path : o.rules;
    c.rules = rules_path.empty() ? std::make_shared<tc::rulefilter::RuleSetHandle>()
                                 : std::make_shared<tc::rulefilter::RuleSetHandle>(
                                       tc::rulefilter::RuleSet::compile(tc::rulefilter::load_rules_file(rules_path)));
    c.tier1 = std::make_shared<tc::cascade::LinearScorer>(embedder, load_or_train());
    if (auto p = tc::service::make_provider(cfg.tier2a, truth)) c.tier2a = tc::cascade::LlmStage{p, cfg.tier2a.params, {}};
    if (auto p = tc::service::make_provider(cfg.tier3, truth)) {
      c.tier3 = tc::cascade::RagStage{p, cfg.tier3.params, embedder, knowledge_base(), cfg.retrieval};
    }
    adapter = std::make_unique<tc::evalharness::CascadeAdapter>(
        std::make_shared<tc::cascade::Cascade>(std::move(c), cfg.thresholds, cfg.unit_costs));
  }

  const auto result = tc::evalharness::run_benchmark(data, *adapter, subset, o.threads);
  std::cout << tc::evalharness::format_text(result);
  if (!o.csv.empty()) write_text(o.csv, tc::evalharness::format_csv(result));
  if (!o.log.empty()) tc::evalharness::write_prediction_log(result, o.log);
  return 0;
}

int cmd_bench_cost(const std::string& profiles, const std::string& csv) {
  const auto file = tc::evalharness::load_profiles(profiles);
  const auto report = tc::evalharness::cost_report(file.profiles, file.volume, file.savings);
  std::cout << tc::evalharness::format_text(report);
  if (!csv.empty()) write_text(csv, tc::evalharness::format_csv(report));
  return 0;
}

int cmd_retrain(const std::string& config_path, const std::string& base_corpus, const std::string& out, bool force,
                const TrainOptions& opts) {
  const auto cfg = config_or_default(config_path);
  const auto human = tc::service::JsonlLog::read_all((fs::path(cfg.data_dir) / "human_decisions.jsonl").string());
  const auto marker_path = (fs::path(cfg.data_dir) / "retrain.json").string();

  tc::service::AgreementStats stats(cfg.retrain.agreement_window);
  if (const auto m = tc::service::read_retrain_marker(marker_path)) stats.set_retrained_at(m->human_decisions_seen);
  // Agreement needs the pipeline verdicts, which live in the decision log.
  std::unordered_map<std::string, tc::cascade::Decision> decisions;
  for (const auto& j : tc::service::JsonlLog::read_all((fs::path(cfg.data_dir) / "decisions.jsonl").string())) {
    auto rec = tc::service::decision_record_from_json(j);
    decisions.emplace(rec.decision.id, std::move(rec.decision));
  }
  for (const auto& j : human) {
    const auto h = tc::service::human_decision_from_json(j);
    const auto it = decisions.find(h.item_id);
    if (it != decisions.end()) stats.record(tc::service::pipeline_label(it->second), h.label);
  }
  const auto check = tc::service::retrain_check(stats, cfg.retrain);
  std::cout << "retrain check: " << (check.due ? "due" : "not due") << " (" << check.reason << "), "
            << stats.new_since_retrain() << " new human decisions, rolling agreement " << stats.rolling_rate() << '\n';
  if (!check.due && !force) return 0;

  std::vector<tc::corpus::LabeledMessage> data;
  if (!base_corpus.empty()) data = tc::corpus::load(base_corpus);
  const auto feedback = (fs::path(cfg.data_dir) / "feedback.jsonl").string();
  if (fs::exists(feedback)) {
    const auto extra = tc::corpus::load(feedback);
    data.insert(data.end(), extra.begin(), extra.end());
  }
  tc::textprep::Preprocessor prep(cfg.prep);
  tc::vectorize::HashingEmbedder embedder(cfg.embed_dims, cfg.embed_seed);
  const auto model = tc::evalharness::train_tier1(data, prep, embedder, to_train_config(opts));
  const auto target = out.empty() ? cfg.model_path : out;
  if (target.empty()) throw tc::InvalidArgument("no output model path (set model_path or pass --out)");
  tc::linear::save_model(model, target);
  tc::service::write_retrain_marker(marker_path, {human.size(), tc::service::now_ms(), target});
  std::cout << "retrained on " << data.size() << " messages -> " << target
            << " (restart the service to load it)\n";
  return 0;
}

int cmd_kb_build(const std::string& corpus_path, const std::string& out, const std::string& config_path) {
  const auto cfg = config_or_default(config_path);
  tc::textprep::Preprocessor prep(cfg.prep);
  tc::vectorize::HashingEmbedder embedder(cfg.embed_dims, cfg.embed_seed);
  const auto index = tc::service::build_kb(tc::corpus::load(corpus_path), prep, embedder);
  index->save(out);
  std::cout << "indexed " << index->size() << " messages -> " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascaded chat-toxicity moderation"};
  app.require_subcommand(1);

  std::string config;
  auto* serve = app.add_subcommand("serve", "run the HTTP moderation service");
  serve->add_option("--config", config, "service config (JSON); $TOXCASCADE_CONFIG overrides");

  std::string train_corpus, train_out;
  TrainOptions train_opts;
  auto* train = app.add_subcommand("train", "train the Tier 1 linear model");
  train->add_option("--corpus", train_corpus, "labeled CSV or JSON-lines corpus")->required();
  train->add_option("--out", train_out, "model file to write")->required();
  train->add_option("--config", config, "service config for preprocessing and embedding settings");
  add_train_options(train, train_opts);

  auto* bench = app.add_subcommand("bench", "offline evaluation");
  bench->require_subcommand(1);
  BenchOptions bo;
  auto* run = bench->add_subcommand("run", "evaluate one method on a labeled corpus");
  run->add_option("--corpus", bo.corpus)->required();
  run->add_option("--method", bo.method)->check(CLI::IsMember({"tier1", "mock-llm", "rag", "cascade"}));
  run->add_option("--subset", bo.subset, "size:positive_fraction:seed, e.g. 100:0.32:7 (default: full corpus)");
  run->add_option("--model", bo.model, "Tier 1 model (default: trained on the messages outside the subset)");
  run->add_option("--rules", bo.rules, "Tier 0 rules for --method cascade");
  run->add_option("--config", bo.config, "service config for providers, thresholds and costs");
  run->add_option("--csv", bo.csv, "write the report as CSV");
  run->add_option("--log", bo.log, "write the prediction log (JSON-lines)");
  run->add_option("--threads", bo.threads);
  add_train_options(run, bo.train);
  std::string profiles, cost_csv;
  auto* cost = bench->add_subcommand("cost", "latency / throughput / cost table");
  cost->add_option("--profiles", profiles, "method profiles (JSON)")->required();
  cost->add_option("--csv", cost_csv, "write the table as CSV");

  std::string base_corpus, retrain_out;
  bool force = false;
  TrainOptions retrain_opts;
  auto* retrain = app.add_subcommand("retrain", "retrain Tier 1 on base corpus + human feedback when due");
  retrain->add_option("--config", config);
  retrain->add_option("--base-corpus", base_corpus);
  retrain->add_option("--out", retrain_out, "model file (default: model_path from the config)");
  retrain->add_flag("--force", force, "retrain even when the policy says not due");
  add_train_options(retrain, retrain_opts);

  auto* kb = app.add_subcommand("kb", "knowledge base tools");
  kb->require_subcommand(1);
  std::string kb_corpus, kb_out;
  auto* kb_build = kb->add_subcommand("build", "embed a corpus into an index snapshot");
  kb_build->add_option("--corpus", kb_corpus)->required();
  kb_build->add_option("--out", kb_out)->required();
  kb_build->add_option("--config", config);

  tc::corpus::SynthConfig synth_cfg;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a seeded synthetic gaming-chat corpus");
  synth->add_option("--size", synth_cfg.size);
  synth->add_option("--toxic-fraction", synth_cfg.toxic_fraction);
  synth->add_option("--seed", synth_cfg.seed);
  synth->add_option("--out", synth_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return cmd_serve(config);
    if (*train) return cmd_train(train_corpus, train_out, train_opts, config);
    if (*run) return cmd_bench_run(bo);
    if (*cost) return cmd_bench_cost(profiles, cost_csv);
    if (*retrain) return cmd_retrain(config, base_corpus, retrain_out, force, retrain_opts);
    if (*kb_build) return cmd_kb_build(kb_corpus, kb_out, config);
    if (*synth) {
      tc::corpus::save_jsonl(tc::corpus::synthesize(synth_cfg), synth_out);
      std::cout << "wrote " << synth_cfg.size << " messages -> " << synth_out << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "toxcascade: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
