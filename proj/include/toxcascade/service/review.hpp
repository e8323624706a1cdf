#pragma once
// Human review queue, rolling human/pipeline agreement, active-learning
// selection and the retrain trigger. Not internally synchronized; the
// service serializes all mutations behind one writer lock.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "toxcascade/cascade.hpp"
#include "toxcascade/service/config.hpp"
#include "toxcascade/service/persistence.hpp"

namespace toxcascade::service {

enum class ReviewStatus { Pending, Resolved };

struct ReviewItem {
  std::string item_id;  // the message id
  std::uint64_t seq = 0;
  cascade::Decision decision;
  std::int64_t enqueued_at_ms = 0;
  ReviewStatus status = ReviewStatus::Pending;
  std::optional<HumanDecision> resolution;
};

nlohmann::json to_json(const ReviewItem& item);

class ReviewQueue {
 public:
  // Only Human and Flag decisions are accepted; throws InvalidArgument otherwise
  // and Conflict for an id already queued.
  void enqueue(const cascade::Decision& d, std::uint64_t seq, std::int64_t enqueued_at_ms);

  // Oldest pending item (by enqueue order).
  std::optional<ReviewItem> next_pending() const;
  std::vector<ReviewItem> pending(std::size_t limit) const;

  // Throws NotFound (unknown id) and Conflict (already resolved).
  const ReviewItem& resolve(const HumanDecision& h);

  const ReviewItem* find(const std::string& item_id) const;
  std::size_t size() const { return items_.size(); }
  std::size_t pending_count() const { return pending_.size(); }
  std::size_t resolved_count() const { return items_.size() - pending_.size(); }

 private:
  std::unordered_map<std::string, ReviewItem> items_;
  std::map<std::uint64_t, std::string> pending_;  // enqueue order -> id
  std::uint64_t order_ = 0;
  std::unordered_map<std::string, std::uint64_t> order_of_;
};

// Pipeline verdict implied by a decision: its deepest probability when it has
// one (toxic iff p >= 0.5), otherwise toxic for rule hits and clean for
// allows.
vectorize::Label pipeline_label(const cascade::Decision& d);

class AgreementStats {
 public:
  explicit AgreementStats(std::size_t window = 200) : window_(window) {}

  void record(vectorize::Label pipeline, vectorize::Label human);
  void set_retrained_at(std::size_t human_decisions_seen) { retrained_at_ = human_decisions_seen; }

  std::size_t total() const { return total_; }
  std::size_t agreements() const { return agreements_; }
  std::size_t new_since_retrain() const { return total_ >= retrained_at_ ? total_ - retrained_at_ : 0; }
  // Agreement over the last `window` decisions; 1.0 before any decision.
  double rolling_rate() const;
  // Rolling rate after each of the most recent decisions (at most `window`).
  const std::deque<double>& trend() const { return trend_; }

 private:
  std::size_t window_;
  std::deque<bool> recent_;
  std::size_t recent_agree_ = 0;
  std::size_t total_ = 0;
  std::size_t agreements_ = 0;
  std::size_t retrained_at_ = 0;
  std::deque<double> trend_;
};

struct RetrainCheck {
  bool due = false;
  std::string reason;  // "volume", "metric", "volume+metric" or "none"
};

// due = new decisions >= min_new_decisions OR rolling agreement < metric_floor.
// The metric clause needs at least one human decision.
RetrainCheck retrain_check(const AgreementStats& stats, const RetrainPolicy& policy);

struct LoggedDecision {
  std::uint64_t seq = 0;  // log position; larger is newer
  cascade::Decision decision;
};

// The n unresolved automated decisions whose final probability is closest to
// 0.5, newest first on ties. Automated means a terminal action other than
// Human; decisions without any probability are skipped.
std::vector<std::string> select_active_learning_batch(const std::vector<LoggedDecision>& log,
                                                      const std::unordered_set<std::string>& resolved, std::size_t n);

}  // namespace toxcascade::service
