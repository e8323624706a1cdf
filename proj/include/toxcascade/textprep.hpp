#pragma once
// Text normalization applied to every chat message before classification.
//
// Stage order is fixed:
//   1. strip HTML tags
//   2. replace URLs with <URL>
//   3. map emoji and emoticons to :name: aliases
//   4. lowercase (the <URL> sentinel keeps its case)
//   5. expand English contractions
//   6. split on whitespace / punctuation, keeping sentinels and aliases whole
//   7. reject when fewer than `min_alnum_tokens` tokens carry an alphanumeric
//
// Invalid UTF-8 bytes are dropped before stage 1.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace toxcascade::textprep {

inline constexpr std::string_view kUrlToken = "<URL>";

struct RawMessage {
  std::string id;
  std::string text;
  std::optional<std::string> channel;
  std::int64_t received_at_ms = 0;
};

struct NormalizedMessage {
  std::string id;
  std::string original;
  std::string normalized;
  std::vector<std::string> tokens;
  std::size_t alnum_token_count = 0;
};

enum class RejectReason { TooFewTokens, InvalidEncoding };

struct RejectedMessage {
  std::string id;
  RejectReason reason = RejectReason::TooFewTokens;
  std::size_t alnum_token_count = 0;
};

using PrepResult = std::variant<NormalizedMessage, RejectedMessage>;

const char* to_string(RejectReason reason);

struct PrepConfig {
  // Optional overrides for the bundled tables; empty means bundled only.
  // Both files are tab-separated "key<TAB>value" lines, '#' starts a comment.
  // Emoji keys are either a literal emoji or "U+1F642".
  std::string emoji_table_path;
  std::string contraction_table_path;
  std::size_t min_alnum_tokens = 2;
};

// Lookup tables used by the pipeline. Immutable after construction.
struct TextTables {
  std::unordered_map<char32_t, std::string> emoji;        // codepoint -> alias name
  std::unordered_map<std::string, std::string> emoticons;  // lowercase emoticon -> alias name
  std::unordered_map<std::string, std::string> contractions;

  static const TextTables& bundled();
  static TextTables load(const PrepConfig& cfg);  // bundled + file overrides
};

// Stateless pipeline over a fixed set of tables; safe to share across threads.
class Preprocessor {
 public:
  explicit Preprocessor(PrepConfig cfg = {});

  PrepResult normalize(const RawMessage& raw) const;
  std::string emoji_alias(std::string_view text) const;
  std::string expand_contractions(std::string_view text) const;

  const PrepConfig& config() const { return cfg_; }
  const TextTables& tables() const { return tables_; }

 private:
  PrepConfig cfg_;
  TextTables tables_;
};

// Convenience wrappers over a Preprocessor with bundled tables.
PrepResult normalize(const RawMessage& raw);
std::string emoji_alias(std::string_view text);

// Individual stages, exposed for tests and tooling.

// Drops bytes that are not part of a well-formed UTF-8 sequence.
std::string sanitize_utf8(std::string_view bytes);
std::string strip_html(std::string_view text);
std::string replace_urls(std::string_view text);
std::string to_lower(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);
bool is_alnum_token(std::string_view token);
// True when `text` contains a substring matching the URL pattern.
bool contains_url(std::string_view text);

}  // namespace toxcascade::textprep
