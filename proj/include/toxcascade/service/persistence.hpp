#pragma once
// Append-only JSON-lines logs. Each append writes one complete line and
// flushes it; a torn final line (crash mid-write) is ignored on replay.

#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toxcascade/cascade.hpp"
#include "toxcascade/vectorize.hpp"

namespace toxcascade::service {

class JsonlLog {
 public:
  explicit JsonlLog(std::string path);

  // Thread-safe. Throws Error when the line cannot be written.
  void append(const nlohmann::json& record);
  const std::string& path() const { return path_; }
  std::size_t lines_written() const;

  // All complete records in file order; a missing file reads as empty.
  static std::vector<nlohmann::json> read_all(const std::string& path);

 private:
  std::string path_;
  mutable std::mutex mu_;
  std::ofstream out_;
  std::size_t lines_ = 0;
};

// One line of decisions.jsonl.
struct DecisionRecord {
  std::uint64_t seq = 0;
  std::int64_t received_at_ms = 0;
  std::optional<std::string> channel;
  cascade::Decision decision;
};

nlohmann::json to_json(const DecisionRecord& r);
DecisionRecord decision_record_from_json(const nlohmann::json& j);

struct HumanDecision {
  std::string item_id;
  vectorize::Label label = vectorize::Label::Clean;
  std::string moderator;
  std::int64_t decided_at_ms = 0;
};

nlohmann::json to_json(const HumanDecision& h);
HumanDecision human_decision_from_json(const nlohmann::json& j);

// Marker written by the retrain command: how many human decisions the
// current model has already seen.
struct RetrainMarker {
  std::size_t human_decisions_seen = 0;
  std::int64_t retrained_at_ms = 0;
  std::string model_path;
};

std::optional<RetrainMarker> read_retrain_marker(const std::string& path);
void write_retrain_marker(const std::string& path, const RetrainMarker& m);

std::int64_t now_ms();

}  // namespace toxcascade::service
