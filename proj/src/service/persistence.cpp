#include "toxcascade/service/persistence.hpp"

#include <chrono>
#include <filesystem>
#include <iterator>

#include "toxcascade/errors.hpp"

namespace toxcascade::service {

namespace {

// A crash mid-append leaves a final line without '\n'; cut it off so the next
// append starts on a fresh line.
void drop_torn_tail(const std::string& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec || size == 0) return;
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  if (content.back() == '\n') return;
  const auto nl = content.rfind('\n');
  std::filesystem::resize_file(path, nl == std::string::npos ? 0 : nl + 1);
}

}  // namespace

JsonlLog::JsonlLog(std::string path) : path_(std::move(path)) {
  const auto dir = std::filesystem::path(path_).parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  drop_torn_tail(path_);
  lines_ = read_all(path_).size();
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw Error("cannot open log " + path_);
}

void JsonlLog::append(const nlohmann::json& record) {
  std::string line = record.dump();
  line.push_back('\n');
  std::lock_guard lock(mu_);
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.flush();
  if (!out_) throw Error("write failed on " + path_);
  ++lines_;
}

std::size_t JsonlLog::lines_written() const {
  std::lock_guard lock(mu_);
  return lines_;
}

std::vector<nlohmann::json> JsonlLog::read_all(const std::string& path) {
  std::vector<nlohmann::json> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const bool last = in.peek() == std::char_traits<char>::eof();
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      if (last && in.eof()) break;  // torn tail
      throw FormatError(path + ": " + e.what());
    }
  }
  return out;
}

nlohmann::json to_json(const DecisionRecord& r) {
  nlohmann::json j{{"seq", r.seq}, {"received_at_ms", r.received_at_ms}, {"decision", cascade::to_json(r.decision)}};
  if (r.channel) j["channel"] = *r.channel;
  return j;
}

DecisionRecord decision_record_from_json(const nlohmann::json& j) {
  DecisionRecord r;
  r.seq = j.at("seq").get<std::uint64_t>();
  r.received_at_ms = j.value("received_at_ms", std::int64_t{0});
  if (j.contains("channel")) r.channel = j["channel"].get<std::string>();
  r.decision = cascade::decision_from_json(j.at("decision"));
  return r;
}

nlohmann::json to_json(const HumanDecision& h) {
  return {{"item_id", h.item_id},
          {"label", vectorize::to_string(h.label)},
          {"moderator", h.moderator},
          {"decided_at_ms", h.decided_at_ms}};
}

HumanDecision human_decision_from_json(const nlohmann::json& j) {
  return {j.at("item_id").get<std::string>(), vectorize::label_from_string(j.at("label").get<std::string>()),
          j.value("moderator", std::string()), j.value("decided_at_ms", std::int64_t{0})};
}

std::optional<RetrainMarker> read_retrain_marker(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    return RetrainMarker{j.at("human_decisions_seen").get<std::size_t>(), j.value("retrained_at_ms", std::int64_t{0}),
                         j.value("model_path", std::string())};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_retrain_marker(const std::string& path, const RetrainMarker& m) {
  const auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << nlohmann::json{{"human_decisions_seen", m.human_decisions_seen},
                          {"retrained_at_ms", m.retrained_at_ms},
                          {"model_path", m.model_path}}
               .dump(2)
        << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace toxcascade::service
