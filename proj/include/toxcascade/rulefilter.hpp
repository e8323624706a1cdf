#pragma once
// Tier 0: regular-expression blacklist over normalized text.
//
// Rules are case-insensitive and evaluated in declaration order; the first
// matching rule decides. A combined alternation of all rules is tried first
// so that clean messages (the common case) cost a single regex scan.

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toxcascade/textprep.hpp"

namespace toxcascade::rulefilter {

enum class RuleAction { Remove, Flag };
enum class Tier0Action { Remove, Flag, Pass };

const char* to_string(RuleAction a);
const char* to_string(Tier0Action a);
RuleAction rule_action_from_string(std::string_view s);

struct RuleSpec {
  std::string id;
  std::string pattern;
  RuleAction action = RuleAction::Remove;
  std::string note;
};

struct Tier0Verdict {
  std::optional<std::string> matched;
  Tier0Action action = Tier0Action::Pass;
  std::chrono::duration<double, std::micro> elapsed{0};
};

class RuleSet {
 public:
  RuleSet();  // empty: always passes
  ~RuleSet();
  RuleSet(RuleSet&&) noexcept;
  RuleSet& operator=(RuleSet&&) noexcept;

  // Throws CompileError naming the offending rule (bad pattern, duplicate id).
  static RuleSet compile(const std::vector<RuleSpec>& specs);

  Tier0Verdict screen(const textprep::NormalizedMessage& msg) const;
  Tier0Verdict screen_text(std::string_view normalized) const;

  std::size_t size() const;
  const std::vector<RuleSpec>& specs() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One JSON object per line: {"id", "pattern", "action": "remove"|"flag", "note"}.
std::vector<RuleSpec> parse_rules_jsonl(std::string_view content);
std::vector<RuleSpec> load_rules_file(const std::string& path);

// Shared, atomically swappable rule set for hot reload.
class RuleSetHandle {
 public:
  RuleSetHandle() : current_(std::make_shared<const RuleSet>()) {}
  explicit RuleSetHandle(RuleSet rules) : current_(std::make_shared<const RuleSet>(std::move(rules))) {}

  std::shared_ptr<const RuleSet> get() const {
    std::lock_guard lock(mu_);
    return current_;
  }
  void swap_in(RuleSet rules) {
    auto next = std::make_shared<const RuleSet>(std::move(rules));
    std::lock_guard lock(mu_);
    current_ = std::move(next);
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const RuleSet> current_;
};

}  // namespace toxcascade::rulefilter
