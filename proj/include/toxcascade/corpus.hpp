#pragma once
// Labeled message corpora: CSV / JSON-lines readers and a seeded synthetic
// gaming-chat generator for desk-scale runs.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "toxcascade/vectorize.hpp"

namespace toxcascade::corpus {

using vectorize::Label;

struct LabeledMessage {
  std::string id;
  std::string text;
  Label label = Label::Clean;
};

// CSV with a header row. The text column is the first of
// text/message/comment_text; the label column the first of
// label/toxic/target/toxicity. Labels 1 and 2 (mild, strong) are toxic.
// Missing id column: ids are the 0-based row numbers.
std::vector<LabeledMessage> parse_csv(std::string_view content);
// One {"id", "text", "label"} object per line.
std::vector<LabeledMessage> parse_jsonl(std::string_view content);
// Dispatches on the extension (.csv, otherwise JSON-lines).
std::vector<LabeledMessage> load(const std::string& path);

void save_jsonl(const std::vector<LabeledMessage>& corpus, const std::string& path);

// RFC 4180 record splitter (quoted fields may span lines).
std::vector<std::vector<std::string>> parse_csv_records(std::string_view content);

struct SynthConfig {
  std::size_t size = 1000;
  double toxic_fraction = 0.32;
  std::uint64_t seed = 0;
  // Fraction of messages in each class drawn from one shared template that
  // carries no label signal, so confident tiers cannot decide all of them.
  double ambiguous_fraction = 0.15;
};

// Exactly round(size * toxic_fraction) toxic messages, in shuffled order,
// ids "syn-000000", "syn-000001", ...
std::vector<LabeledMessage> synthesize(const SynthConfig& cfg);

}  // namespace toxcascade::corpus
