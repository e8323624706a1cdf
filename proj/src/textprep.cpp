#include "toxcascade/textprep.hpp"

#include <algorithm>
#include <cctype>

#include "utf8.hpp"

namespace toxcascade::textprep {
namespace {

bool ascii_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

char ascii_lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool starts_with_ci(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (text.size() - pos < prefix.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (ascii_lower(text[pos + k]) != prefix[k]) return false;
  }
  return true;
}

bool is_url_sentinel_ci(std::string_view text, std::size_t pos) {
  return starts_with_ci(text, pos, "<url>");
}

// Length of an HTML construct starting at `pos` ('<' there), or 0.
std::size_t html_tag_length(std::string_view text, std::size_t pos) {
  if (starts_with_ci(text, pos, "<!--")) {
    const auto end = text.find("-->", pos + 4);
    return end == std::string_view::npos ? 0 : end + 3 - pos;
  }
  std::size_t i = pos + 1;
  if (starts_with_ci(text, pos, "<!doctype")) {
    i = pos + 9;
  } else {
    if (i < text.size() && text[i] == '/') ++i;
    if (i >= text.size() || !ascii_alpha(text[i])) return 0;
  }
  for (; i < text.size(); ++i) {
    if (text[i] == '>') return i + 1 - pos;
    if (text[i] == '<' || text[i] == '\n') return 0;
  }
  return 0;
}

bool url_start_at(std::string_view text, std::size_t pos, std::size_t* prefix_len) {
  if (pos > 0) {
    const auto prev = static_cast<unsigned char>(text[pos - 1]);
    if (prev < 0x80 && (std::isalnum(prev) != 0 || prev == '_')) return false;
  }
  for (std::string_view scheme : {"https://", "http://", "www."}) {
    if (starts_with_ci(text, pos, scheme)) {
      *prefix_len = scheme.size();
      return true;
    }
  }
  return false;
}

bool url_body_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return !(std::isspace(u) != 0) && c != '<' && c != '>' && c != '"' && c != '\'';
}

bool url_trailing_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':' || c == ')' || c == ']';
}

// Finds the next URL match at or after `from`. Returns {begin, end} or {npos, npos}.
std::pair<std::size_t, std::size_t> find_url(std::string_view text, std::size_t from) {
  for (std::size_t pos = from; pos < text.size(); ++pos) {
    std::size_t prefix = 0;
    if (!url_start_at(text, pos, &prefix)) continue;
    std::size_t end = pos + prefix;
    while (end < text.size() && url_body_char(text[end])) ++end;
    while (end > pos + prefix && url_trailing_punct(text[end - 1])) --end;
    if (end > pos + prefix) return {pos, end};
  }
  return {std::string_view::npos, std::string_view::npos};
}

bool is_alias_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

// Length of a ":name:" alias token at `pos`, or 0.
std::size_t alias_length(std::string_view text, std::size_t pos) {
  if (text[pos] != ':') return 0;
  std::size_t i = pos + 1;
  while (i < text.size() && is_alias_char(text[i])) ++i;
  if (i == pos + 1 || i >= text.size() || text[i] != ':') return 0;
  return i + 1 - pos;
}

enum class CharClass { Space, Word, Punct };

CharClass classify(char32_t cp) {
  if (utf8::is_space(cp)) return CharClass::Space;
  if (utf8::is_word(cp)) return CharClass::Word;
  return CharClass::Punct;
}

bool is_contraction_char(char32_t cp) { return utf8::is_word(cp) || cp == U'\'' || cp == 0x2019; }

}  // namespace

const char* to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::TooFewTokens: return "too_few_tokens";
    case RejectReason::InvalidEncoding: return "invalid_encoding";
  }
  return "unknown";
}

std::string sanitize_utf8(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    std::size_t len = 0;
    char32_t min_cp = 0;
    if (b0 < 0x80) {
      len = 1;
    } else if (b0 >= 0xC2 && b0 <= 0xDF) {
      len = 2;
      min_cp = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      min_cp = 0x800;
    } else if (b0 >= 0xF0 && b0 <= 0xF4) {
      len = 4;
      min_cp = 0x10000;
    }
    bool ok = len > 0 && i + len <= bytes.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      ok = (static_cast<unsigned char>(bytes[i + k]) & 0xC0) == 0x80;
    }
    if (ok && len > 1) {
      const char32_t cp = utf8::decode(bytes, i).cp;
      ok = cp >= min_cp && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
    }
    if (ok) {
      if (b0 != 0) out.append(bytes.substr(i, len));
      i += len;
    } else {
      ++i;
    }
  }
  return out;
}

std::string strip_html(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '<') {
      if (is_url_sentinel_ci(text, i)) {
        out.append(kUrlToken);
        i += kUrlToken.size();
        continue;
      }
      if (const std::size_t len = html_tag_length(text, i); len > 0) {
        out.push_back(' ');
        i += len;
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string replace_urls(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto [begin, end] = find_url(text, i);
    if (begin == std::string_view::npos) {
      out.append(text.substr(i));
      break;
    }
    out.append(text.substr(i, begin - i));
    out.append(kUrlToken);
    i = end;
  }
  return out;
}

bool contains_url(std::string_view text) {
  return find_url(text, 0).first != std::string_view::npos;
}

std::string to_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, kUrlToken.size(), kUrlToken) == 0) {
      out.append(kUrlToken);
      i += kUrlToken.size();
      continue;
    }
    const auto d = utf8::decode(text, i);
    utf8::append(out, utf8::lower(d.cp));
    i += d.len;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, kUrlToken.size(), kUrlToken) == 0) {
      tokens.emplace_back(kUrlToken);
      i += kUrlToken.size();
      continue;
    }
    if (const std::size_t len = alias_length(text, i); len > 0) {
      tokens.emplace_back(text.substr(i, len));
      i += len;
      continue;
    }
    const auto d = utf8::decode(text, i);
    const CharClass cls = classify(d.cp);
    if (cls == CharClass::Space) {
      i += d.len;
      continue;
    }
    std::size_t j = i + d.len;
    while (j < text.size()) {
      if (cls == CharClass::Punct &&
          (text.compare(j, kUrlToken.size(), kUrlToken) == 0 || alias_length(text, j) > 0)) {
        break;
      }
      const auto next = utf8::decode(text, j);
      if (classify(next.cp) != cls) break;
      j += next.len;
    }
    tokens.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

bool is_alnum_token(std::string_view token) {
  if (token == kUrlToken) return true;
  std::size_t i = 0;
  while (i < token.size()) {
    const auto d = utf8::decode(token, i);
    if (utf8::is_word(d.cp)) return true;
    i += d.len;
  }
  return false;
}

Preprocessor::Preprocessor(PrepConfig cfg) : cfg_(std::move(cfg)), tables_(TextTables::load(cfg_)) {}

std::string Preprocessor::emoji_alias(std::string_view text) const {
  // Emoji codepoints anywhere; a trailing variation selector is absorbed.
  std::string pass;
  pass.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto d = utf8::decode(text, i);
    i += d.len;
    if (auto it = tables_.emoji.find(d.cp); it != tables_.emoji.end()) {
      pass.push_back(':');
      pass.append(it->second);
      pass.push_back(':');
      if (i < text.size()) {
        const auto vs = utf8::decode(text, i);
        if (vs.cp == 0xFE0F) i += vs.len;
      }
    } else {
      pass.append(text.substr(i - d.len, d.len));
    }
  }

  // Emoticons only as whole whitespace-delimited chunks.
  std::string out;
  out.reserve(pass.size());
  std::size_t pos = 0;
  while (pos < pass.size()) {
    const auto d = utf8::decode(pass, pos);
    if (utf8::is_space(d.cp)) {
      out.append(pass.substr(pos, d.len));
      pos += d.len;
      continue;
    }
    std::size_t end = pos;
    while (end < pass.size()) {
      const auto e = utf8::decode(pass, end);
      if (utf8::is_space(e.cp)) break;
      end += e.len;
    }
    std::string chunk(pass.substr(pos, end - pos));
    std::string key = chunk;
    std::transform(key.begin(), key.end(), key.begin(), ascii_lower);
    if (auto it = tables_.emoticons.find(key); it != tables_.emoticons.end()) {
      out.push_back(':');
      out.append(it->second);
      out.push_back(':');
    } else {
      out.append(chunk);
    }
    pos = end;
  }
  return out;
}

std::string Preprocessor::expand_contractions(std::string_view text) const {
  std::string out;
  out.reserve(text.size() + 16);
  std::size_t i = 0;
  while (i < text.size()) {
    const auto d = utf8::decode(text, i);
    if (!is_contraction_char(d.cp)) {
      out.append(text.substr(i, d.len));
      i += d.len;
      continue;
    }
    // Collect the run, folding typographic apostrophes to ASCII.
    std::string run;
    std::size_t j = i;
    while (j < text.size()) {
      const auto e = utf8::decode(text, j);
      if (!is_contraction_char(e.cp)) break;
      if (e.cp == 0x2019) {
        run.push_back('\'');
      } else {
        run.append(text.substr(j, e.len));
      }
      j += e.len;
    }
    auto it = tables_.contractions.find(run);
    if (it != tables_.contractions.end()) {
      out.append(it->second);
    } else {
      const auto b = run.find_first_not_of('\'');
      const auto e = run.find_last_not_of('\'');
      if (b != std::string::npos &&
          (it = tables_.contractions.find(run.substr(b, e - b + 1))) != tables_.contractions.end()) {
        out.append(run.substr(0, b));
        out.append(it->second);
        out.append(run.substr(e + 1));
      } else {
        out.append(text.substr(i, j - i));
      }
    }
    i = j;
  }
  return out;
}

PrepResult Preprocessor::normalize(const RawMessage& raw) const {
  std::string text = sanitize_utf8(raw.text);
  if (text.empty() && !raw.text.empty()) {
    return RejectedMessage{raw.id, RejectReason::InvalidEncoding, 0};
  }
  text = strip_html(text);
  text = replace_urls(text);
  text = emoji_alias(text);
  text = to_lower(text);
  text = expand_contractions(text);

  NormalizedMessage msg;
  msg.id = raw.id;
  msg.original = raw.text;
  msg.tokens = tokenize(text);
  msg.alnum_token_count = static_cast<std::size_t>(
      std::count_if(msg.tokens.begin(), msg.tokens.end(), [](const std::string& t) { return is_alnum_token(t); }));
  if (msg.alnum_token_count < cfg_.min_alnum_tokens) {
    return RejectedMessage{raw.id, RejectReason::TooFewTokens, msg.alnum_token_count};
  }
  for (std::size_t k = 0; k < msg.tokens.size(); ++k) {
    if (k > 0) msg.normalized.push_back(' ');
    msg.normalized.append(msg.tokens[k]);
  }
  return msg;
}

namespace {
const Preprocessor& default_preprocessor() {
  static const Preprocessor pre;
  return pre;
}
}  // namespace

PrepResult normalize(const RawMessage& raw) { return default_preprocessor().normalize(raw); }

std::string emoji_alias(std::string_view text) { return default_preprocessor().emoji_alias(text); }

}  // namespace toxcascade::textprep
