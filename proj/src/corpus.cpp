#include "toxcascade/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rng.hpp"
#include "toxcascade/errors.hpp"

namespace toxcascade::corpus {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int find_column(const std::vector<std::string>& header, std::initializer_list<std::string_view> names) {
  for (auto name : names) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (lower(trim(header[i])) == name) return static_cast<int>(i);
    }
  }
  return -1;
}

Label parse_label_cell(const std::string& cell) {
  std::string v = lower(trim(cell));
  // numeric scores such as "1.0"
  if (!v.empty() && (std::isdigit(static_cast<unsigned char>(v[0])) || v[0] == '.')) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end && *end == '\0') return d >= 0.5 ? Label::Toxic : Label::Clean;
  }
  return vectorize::label_from_string(v);
}

template <std::size_t N>
const char* pick(std::mt19937_64& rng, const std::array<const char*, N>& words) {
  return words[detail::bounded(rng, N)];
}

constexpr std::array<const char*, 16> kNames{"axe", "pudge", "invoker", "lina", "sniper", "zeus", "jugg", "mirana",
                                            "rubick", "tiny", "lion", "viper", "storm", "void", "sven", "riki"};
constexpr std::array<const char*, 14> kClean{"gg wp",         "nice play",       "well played",  "good game all",
                                            "lets push mid", "need wards bot",  "ty for heal",  "rosh now",
                                            "back to base",  "buy a smoke",     "great ult",    "who has tp",
                                            "group up top",  "defend the base"};
constexpr std::array<const char*, 12> kCleanTail{"thanks",  "guys", "please", "now",  "team", "fast",
                                                "later",   "ok",   "lol",    "haha", "again", "bro"};
constexpr std::array<const char*, 12> kInsultAdj{"stupid", "worthless", "pathetic", "brainless", "useless", "braindead",
                                                "hopeless", "disgusting", "dumb", "spineless", "clueless", "idiotic"};
constexpr std::array<const char*, 10> kInsultNoun{"idiot", "moron", "loser", "clown", "garbage human",
                                                 "piece of shit", "dog", "monkey", "waste of air", "imbecile"};
constexpr std::array<const char*, 10> kToxicLead{"shut up",    "kill yourself", "uninstall",  "go die",  "fuck off",
                                                "nobody asked", "report this", "you suck", "kys", "stfu"};
// Vocabulary shared by both classes in the ambiguous messages.
constexpr std::array<const char*, 10> kShared{"trash", "noob", "feeding", "ez",     "wtf",
                                             "dead", "kill", "report", "throwing", "bad"};

// Same distribution for both labels: banter that only context could resolve.
std::string ambiguous_message(std::mt19937_64& rng) {
  std::string s = std::string(pick(rng, kNames)) + " " + pick(rng, kShared) + " " + pick(rng, kShared);
  if (detail::bounded(rng, 2) == 0) s += std::string(" ") + pick(rng, kCleanTail);
  return s;
}

std::string clean_message(std::mt19937_64& rng, bool ambiguous) {
  if (ambiguous) return ambiguous_message(rng);
  std::string s = pick(rng, kClean);
  if (detail::bounded(rng, 2) == 0) {
    s += std::string(" ") + pick(rng, kNames);
  }
  if (detail::bounded(rng, 3) == 0) s += std::string(" ") + pick(rng, kCleanTail);
  if (detail::bounded(rng, 20) == 0) s += " :)";
  return s;
}

std::string toxic_message(std::mt19937_64& rng, bool ambiguous) {
  std::string s;
  if (ambiguous) return ambiguous_message(rng);
  switch (detail::bounded(rng, 3)) {
    case 0: s = std::string(pick(rng, kToxicLead)) + " " + pick(rng, kInsultAdj) + " " + pick(rng, kInsultNoun); break;
    case 1: s = std::string(pick(rng, kNames)) + " you " + pick(rng, kInsultAdj) + " " + pick(rng, kInsultNoun); break;
    default: s = std::string("you are a ") + pick(rng, kInsultNoun) + " " + pick(rng, kToxicLead); break;
  }
  if (detail::bounded(rng, 4) == 0) s += std::string(" ") + pick(rng, kShared);
  if (detail::bounded(rng, 10) == 0) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return s;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv_records(std::string_view content) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      field.clear();
      row.clear();
      any = false;
    } else {
      field.push_back(c);
      any = true;
    }
  }
  if (quoted) throw FormatError("unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<LabeledMessage> parse_csv(std::string_view content) {
  auto records = parse_csv_records(content);
  if (records.empty()) return {};
  const auto& header = records.front();
  const int text_col = find_column(header, {"text", "message", "comment_text"});
  const int label_col = find_column(header, {"label", "toxic", "target", "toxicity"});
  const int id_col = find_column(header, {"id", "message_id"});
  if (text_col < 0 || label_col < 0) throw FormatError("CSV needs a text column and a label column");
  std::vector<LabeledMessage> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const auto need = static_cast<std::size_t>(std::max({text_col, label_col, id_col})) + 1;
    if (rec.size() < need) throw FormatError("CSV row " + std::to_string(r) + " has too few fields");
    LabeledMessage m;
    m.id = id_col >= 0 ? trim(rec[id_col]) : std::to_string(r - 1);
    m.text = rec[text_col];
    m.label = parse_label_cell(rec[label_col]);
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<LabeledMessage> parse_jsonl(std::string_view content) {
  std::vector<LabeledMessage> out;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      LabeledMessage m;
      m.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump())
                              : std::to_string(out.size());
      m.text = j.at("text").get<std::string>();
      const auto& l = j.at("label");
      m.label = l.is_string() ? parse_label_cell(l.get<std::string>())
                              : (l.is_boolean() ? (l.get<bool>() ? Label::Toxic : Label::Clean)
                                                : (l.get<double>() >= 0.5 ? Label::Toxic : Label::Clean));
      out.push_back(std::move(m));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<LabeledMessage> load(const std::string& path) {
  const auto content = read_file(path);
  if (path.size() >= 4 && lower(path.substr(path.size() - 4)) == ".csv") return parse_csv(content);
  return parse_jsonl(content);
}

void save_jsonl(const std::vector<LabeledMessage>& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  for (const auto& m : corpus) {
    out << nlohmann::json{{"id", m.id}, {"text", m.text}, {"label", vectorize::to_string(m.label)}}.dump() << '\n';
  }
}

std::vector<LabeledMessage> synthesize(const SynthConfig& cfg) {
  if (!(cfg.toxic_fraction >= 0 && cfg.toxic_fraction <= 1)) throw InvalidArgument("toxic_fraction must lie in [0, 1]");
  if (!(cfg.ambiguous_fraction >= 0 && cfg.ambiguous_fraction <= 1)) {
    throw InvalidArgument("ambiguous_fraction must lie in [0, 1]");
  }
  std::mt19937_64 rng(cfg.seed);
  const auto n_toxic = static_cast<std::size_t>(std::llround(static_cast<double>(cfg.size) * cfg.toxic_fraction));
  std::vector<Label> labels(cfg.size, Label::Clean);
  std::fill_n(labels.begin(), n_toxic, Label::Toxic);
  detail::shuffle(labels, rng);

  std::vector<LabeledMessage> out;
  out.reserve(cfg.size);
  char id[32];
  for (std::size_t i = 0; i < cfg.size; ++i) {
    std::snprintf(id, sizeof id, "syn-%06zu", i);
    const bool ambiguous = detail::uniform01(rng) < cfg.ambiguous_fraction;
    const Label l = labels[i];
    out.push_back({id, l == Label::Toxic ? toxic_message(rng, ambiguous) : clean_message(rng, ambiguous), l});
  }
  return out;
}

}  // namespace toxcascade::corpus
