#include "toxcascade/rulefilter.hpp"

#include <boost/regex.hpp>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "toxcascade/errors.hpp"

namespace toxcascade::rulefilter {

namespace {

constexpr auto kFlags = boost::regex::perl | boost::regex::icase;

// Backreferences and named groups break when patterns are wrapped into one alternation.
bool safe_to_combine(const std::string& pattern) {
  for (std::size_t i = 0; i + 1 < pattern.size(); ++i) {
    if (pattern[i] == '\\') {
      const char n = pattern[i + 1];
      if ((n >= '1' && n <= '9') || n == 'g' || n == 'k') return false;
      ++i;
    }
  }
  return pattern.find("(?<") == std::string::npos && pattern.find("(?P") == std::string::npos;
}

}  // namespace

const char* to_string(RuleAction a) { return a == RuleAction::Remove ? "remove" : "flag"; }

const char* to_string(Tier0Action a) {
  switch (a) {
    case Tier0Action::Remove: return "remove";
    case Tier0Action::Flag: return "flag";
    case Tier0Action::Pass: return "pass";
  }
  return "pass";
}

RuleAction rule_action_from_string(std::string_view s) {
  if (s == "remove" || s == "Remove") return RuleAction::Remove;
  if (s == "flag" || s == "Flag") return RuleAction::Flag;
  throw FormatError("unknown rule action: " + std::string(s));
}

struct RuleSet::Impl {
  std::vector<RuleSpec> specs;
  std::vector<boost::regex> rules;
  std::optional<boost::regex> combined;
};

RuleSet::RuleSet() : impl_(std::make_unique<Impl>()) {}
RuleSet::~RuleSet() = default;
RuleSet::RuleSet(RuleSet&&) noexcept = default;
RuleSet& RuleSet::operator=(RuleSet&&) noexcept = default;

RuleSet RuleSet::compile(const std::vector<RuleSpec>& specs) {
  RuleSet set;
  std::unordered_set<std::string> seen;
  bool combinable = true;
  std::string alternation;
  for (const auto& spec : specs) {
    if (spec.id.empty()) throw CompileError(spec.id, "empty rule id");
    if (!seen.insert(spec.id).second) throw CompileError(spec.id, "duplicate rule id");
    try {
      set.impl_->rules.emplace_back(spec.pattern, kFlags);
    } catch (const boost::regex_error& e) {
      throw CompileError(spec.id, std::string("invalid pattern: ") + e.what());
    }
    combinable = combinable && safe_to_combine(spec.pattern);
    if (!alternation.empty()) alternation += '|';
    alternation += "(?:" + spec.pattern + ")";
  }
  set.impl_->specs = specs;
  if (combinable && specs.size() > 1) {
    try {
      set.impl_->combined.emplace(alternation, kFlags | boost::regex::nosubs | boost::regex::optimize);
    } catch (const boost::regex_error&) {
      set.impl_->combined.reset();  // fall back to per-rule scan
    }
  }
  return set;
}

Tier0Verdict RuleSet::screen_text(std::string_view normalized) const {
  const auto start = std::chrono::steady_clock::now();
  Tier0Verdict verdict;
  const auto& rules = impl_->rules;
  bool maybe = !rules.empty();
  if (maybe && impl_->combined) {
    maybe = boost::regex_search(normalized.begin(), normalized.end(), *impl_->combined);
  }
  if (maybe) {
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (boost::regex_search(normalized.begin(), normalized.end(), rules[i])) {
        verdict.matched = impl_->specs[i].id;
        verdict.action =
            impl_->specs[i].action == RuleAction::Remove ? Tier0Action::Remove : Tier0Action::Flag;
        break;
      }
    }
  }
  verdict.elapsed = std::chrono::steady_clock::now() - start;
  return verdict;
}

Tier0Verdict RuleSet::screen(const textprep::NormalizedMessage& msg) const {
  return screen_text(msg.normalized);
}

std::size_t RuleSet::size() const { return impl_->rules.size(); }

const std::vector<RuleSpec>& RuleSet::specs() const { return impl_->specs; }

std::vector<RuleSpec> parse_rules_jsonl(std::string_view content) {
  std::vector<RuleSpec> specs;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RuleSpec spec;
      spec.id = j.at("id").get<std::string>();
      spec.pattern = j.at("pattern").get<std::string>();
      spec.action = rule_action_from_string(j.value("action", std::string("remove")));
      spec.note = j.value("note", std::string());
      specs.push_back(std::move(spec));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("rules line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return specs;
}

std::vector<RuleSpec> load_rules_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open rule file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_rules_jsonl(buf.str());
}

}  // namespace toxcascade::rulefilter
