#include "toxcascade/service/review.hpp"

#include <algorithm>
#include <cmath>

#include "toxcascade/errors.hpp"

namespace toxcascade::service {

nlohmann::json to_json(const ReviewItem& item) {
  nlohmann::json j{{"item_id", item.item_id},
                   {"seq", item.seq},
                   {"status", item.status == ReviewStatus::Pending ? "pending" : "resolved"},
                   {"enqueued_at_ms", item.enqueued_at_ms},
                   {"original", item.decision.original},
                   {"normalized", item.decision.normalized},
                   {"decision", cascade::to_json(item.decision)}};
  j["resolution"] = item.resolution ? to_json(*item.resolution) : nlohmann::json(nullptr);
  return j;
}

void ReviewQueue::enqueue(const cascade::Decision& d, std::uint64_t seq, std::int64_t enqueued_at_ms) {
  if (d.action != cascade::Action::Human && d.action != cascade::Action::Flag) {
    throw InvalidArgument("only human and flag decisions are reviewed");
  }
  if (items_.contains(d.id)) throw Conflict("review item already exists: " + d.id);
  const auto order = order_++;
  items_.emplace(d.id, ReviewItem{d.id, seq, d, enqueued_at_ms, ReviewStatus::Pending, std::nullopt});
  pending_.emplace(order, d.id);
  order_of_.emplace(d.id, order);
}

std::optional<ReviewItem> ReviewQueue::next_pending() const {
  if (pending_.empty()) return std::nullopt;
  return items_.at(pending_.begin()->second);
}

std::vector<ReviewItem> ReviewQueue::pending(std::size_t limit) const {
  std::vector<ReviewItem> out;
  for (const auto& [order, id] : pending_) {
    if (out.size() >= limit) break;
    out.push_back(items_.at(id));
  }
  return out;
}

const ReviewItem& ReviewQueue::resolve(const HumanDecision& h) {
  const auto it = items_.find(h.item_id);
  if (it == items_.end()) throw NotFound("no review item " + h.item_id);
  if (it->second.status == ReviewStatus::Resolved) throw Conflict("review item already resolved: " + h.item_id);
  it->second.status = ReviewStatus::Resolved;
  it->second.resolution = h;
  pending_.erase(order_of_.at(h.item_id));
  return it->second;
}

const ReviewItem* ReviewQueue::find(const std::string& item_id) const {
  const auto it = items_.find(item_id);
  return it == items_.end() ? nullptr : &it->second;
}

vectorize::Label pipeline_label(const cascade::Decision& d) {
  if (const auto p = d.final_p()) return *p >= 0.5 ? vectorize::Label::Toxic : vectorize::Label::Clean;
  return d.action == cascade::Action::Remove || d.action == cascade::Action::Flag ? vectorize::Label::Toxic
                                                                                  : vectorize::Label::Clean;
}

void AgreementStats::record(vectorize::Label pipeline, vectorize::Label human) {
  const bool agree = pipeline == human;
  ++total_;
  agreements_ += agree;
  recent_.push_back(agree);
  recent_agree_ += agree;
  if (recent_.size() > window_) {
    recent_agree_ -= recent_.front();
    recent_.pop_front();
  }
  trend_.push_back(rolling_rate());
  if (trend_.size() > window_) trend_.pop_front();
}

double AgreementStats::rolling_rate() const {
  if (recent_.empty()) return 1.0;
  return static_cast<double>(recent_agree_) / static_cast<double>(recent_.size());
}

RetrainCheck retrain_check(const AgreementStats& stats, const RetrainPolicy& policy) {
  const bool volume = stats.new_since_retrain() >= policy.min_new_decisions;
  const bool metric = stats.total() > 0 && stats.rolling_rate() < policy.metric_floor;
  RetrainCheck r;
  r.due = volume || metric;
  r.reason = volume && metric ? "volume+metric" : volume ? "volume" : metric ? "metric" : "none";
  return r;
}

std::vector<std::string> select_active_learning_batch(const std::vector<LoggedDecision>& log,
                                                      const std::unordered_set<std::string>& resolved, std::size_t n) {
  struct Candidate {
    double distance;
    std::uint64_t seq;
    const std::string* id;
  };
  std::vector<Candidate> candidates;
  for (const auto& entry : log) {
    const auto& d = entry.decision;
    if (d.action == cascade::Action::Human || resolved.contains(d.id)) continue;
    const auto p = d.final_p();
    if (!p) continue;
    candidates.push_back({std::fabs(*p - 0.5), entry.seq, &d.id});
  }
  const auto take = std::min(n, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                    [](const Candidate& a, const Candidate& b) {
                      if (a.distance != b.distance) return a.distance < b.distance;
                      return a.seq > b.seq;
                    });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < take; ++i) out.push_back(*candidates[i].id);
  return out;
}

}  // namespace toxcascade::service
