#include "toxcascade/vectorize.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>

#include <nlohmann/json.hpp>

#include "toxcascade/errors.hpp"
#include "toxcascade/kernels.hpp"
#include "utf8.hpp"

namespace toxcascade::vectorize {

static_assert(std::endian::native == std::endian::little, "snapshot format assumes little-endian host");

const char* to_string(Label l) { return l == Label::Toxic ? "toxic" : "clean"; }

Label label_from_string(std::string_view s) {
  if (s == "toxic" || s == "1" || s == "2" || s == "true") return Label::Toxic;
  if (s == "clean" || s == "0" || s == "false") return Label::Clean;
  throw FormatError("unknown label: " + std::string(s));
}

std::uint64_t stable_hash(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dims() != b.dims()) throw DimensionMismatch(a.dims(), b.dims());
  const double d = kernels::dot(std::span<const float>(a.values), std::span<const float>(b.values));
  return std::clamp(d, -1.0, 1.0);
}

EmbeddingVector make_unit(std::vector<float> values) {
  EmbeddingVector v;
  const double sq = kernels::dot(std::span<const float>(values), std::span<const float>(values));
  v.values = std::move(values);
  if (sq <= 0.0) {
    std::fill(v.values.begin(), v.values.end(), 0.0f);
    v.degenerate = true;
    v.norm = 0.0;
    return v;
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (auto& x : v.values) x = static_cast<float>(static_cast<double>(x) * inv);
  v.norm = std::sqrt(kernels::dot(std::span<const float>(v.values), std::span<const float>(v.values)));
  return v;
}

HashingEmbedder::HashingEmbedder(std::size_t dims, std::uint64_t seed) : dims_(dims), seed_(seed) {
  if (dims == 0) throw InvalidArgument("embedding dims must be positive");
}

std::vector<std::string> HashingEmbedder::extract_features(const std::vector<std::string>& tokens) {
  std::vector<std::string> features;
  for (const auto& t : tokens) features.push_back("w:" + t);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    features.push_back("b:" + tokens[i] + " " + tokens[i + 1]);
  }
  for (const auto& t : tokens) {
    // Codepoint boundaries of "#token#".
    const std::string padded = "#" + t + "#";
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < padded.size();) {
      starts.push_back(i);
      i += utf8::decode(padded, i).len;
    }
    starts.push_back(padded.size());
    const std::size_t ncp = starts.size() - 1;
    for (std::size_t n : {3u, 4u}) {
      for (std::size_t i = 0; i + n <= ncp; ++i) {
        features.push_back("c:" + padded.substr(starts[i], starts[i + n] - starts[i]));
      }
    }
  }
  return features;
}

HashedFeature HashingEmbedder::hash_feature(std::string_view feature) const {
  const std::uint64_t h = stable_hash(feature, seed_);
  return {std::string(feature), static_cast<std::uint32_t>((h >> 1) % dims_), (h & 1) ? -1 : 1};
}

EmbeddingVector HashingEmbedder::embed(const textprep::NormalizedMessage& msg) const {
  const auto features = extract_features(msg.tokens);
  if (features.empty()) throw DegenerateInput("message '" + msg.id + "' yields no n-grams");
  std::vector<float> raw(dims_, 0.0f);
  for (const auto& f : features) {
    const auto hf = hash_feature(f);
    raw[hf.bucket] += static_cast<float>(hf.sign);
  }
  return make_unit(std::move(raw));
}

void RetrievalConfig::validate() const {
  if (k < 1) throw InvalidArgument("retrieval k must be >= 1");
  if (!(min_similarity >= -1.0 && min_similarity <= 1.0)) {
    throw InvalidArgument("min_similarity must lie in [-1, 1]");
  }
}

KnnIndex::KnnIndex(std::size_t dims, std::uint64_t hash_seed) : dims_(dims), hash_seed_(hash_seed) {
  if (dims == 0) throw InvalidArgument("index dims must be positive");
}

std::size_t KnnIndex::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

bool KnnIndex::contains(const std::string& id) const {
  std::shared_lock lock(mu_);
  return by_id_.contains(id);
}

void KnnIndex::insert(const std::string& id, const EmbeddingVector& v, Label label, std::string text) {
  if (v.dims() != dims_) throw DimensionMismatch(dims_, v.dims());
  std::unique_lock lock(mu_);
  if (by_id_.contains(id)) throw DuplicateId(id);
  matrix_.reserve(matrix_.size() + dims_);
  entries_.reserve(entries_.size() + 1);
  by_id_.reserve(by_id_.size() + 1);
  matrix_.insert(matrix_.end(), v.values.begin(), v.values.end());
  entries_.push_back(KnnEntry{id, label, std::move(text)});
  by_id_.emplace(id, entries_.size() - 1);
}

std::vector<KnnHit> KnnIndex::query(const EmbeddingVector& q, const RetrievalConfig& cfg) const {
  cfg.validate();
  if (q.dims() != dims_) throw DimensionMismatch(dims_, q.dims());
  const auto& kt = kernels::active();
  std::shared_lock lock(mu_);
  std::vector<std::pair<double, std::size_t>> candidates;
  const std::size_t n = entries_.size();
  for (std::size_t row = 0; row < n; ++row) {
    const double sim = std::clamp(kt.dot_f32(matrix_.data() + row * dims_, q.values.data(), dims_), -1.0, 1.0);
    if (sim >= cfg.min_similarity) candidates.emplace_back(sim, row);
  }
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  const std::size_t take = std::min(cfg.k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                    better);
  std::vector<KnnHit> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    hits.push_back(KnnHit{entries_[candidates[i].second], candidates[i].first, candidates[i].second});
  }
  return hits;
}

std::vector<float> KnnIndex::vector_at(std::size_t position) const {
  std::shared_lock lock(mu_);
  if (position >= entries_.size()) throw InvalidArgument("index position out of range");
  const auto begin = matrix_.begin() + static_cast<std::ptrdiff_t>(position * dims_);
  return {begin, begin + static_cast<std::ptrdiff_t>(dims_)};
}

KnnEntry KnnIndex::entry_at(std::size_t position) const {
  std::shared_lock lock(mu_);
  if (position >= entries_.size()) throw InvalidArgument("index position out of range");
  return entries_[position];
}

// Snapshot layout (little-endian):
//   header:  "TXKNN\0\0\1" | u32 dims | u32 reserved | u64 count | u64 hash seed
//   record:  char id[64] (NUL padded) | u8 label | u8 pad[3] | f32 values[dims]
namespace {
constexpr std::array<char, 8> kMagic{'T', 'X', 'K', 'N', 'N', '\0', '\0', '\1'};
constexpr std::size_t kIdWidth = 64;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("truncated index snapshot");
  return v;
}
}  // namespace

void KnnIndex::save(const std::string& path) const {
  std::shared_lock lock(mu_);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write index snapshot: " + path);
  out.write(kMagic.data(), kMagic.size());
  put(out, static_cast<std::uint32_t>(dims_));
  put(out, std::uint32_t{0});
  put(out, static_cast<std::uint64_t>(entries_.size()));
  put(out, hash_seed_);
  std::ofstream side(path + ".sidecar.jsonl", std::ios::trunc);
  if (!side) throw FormatError("cannot write index sidecar: " + path);
  for (std::size_t row = 0; row < entries_.size(); ++row) {
    const auto& e = entries_[row];
    if (e.id.size() >= kIdWidth) throw FormatError("id too long for snapshot: " + e.id);
    std::array<char, kIdWidth> id{};
    std::memcpy(id.data(), e.id.data(), e.id.size());
    out.write(id.data(), id.size());
    const std::array<std::uint8_t, 4> label{static_cast<std::uint8_t>(e.label), 0, 0, 0};
    out.write(reinterpret_cast<const char*>(label.data()), label.size());
    out.write(reinterpret_cast<const char*>(matrix_.data() + row * dims_),
              static_cast<std::streamsize>(dims_ * sizeof(float)));
    side << nlohmann::json{{"id", e.id}, {"label", to_string(e.label)}, {"text", e.text}}.dump() << '\n';
  }
  if (!out || !side) throw FormatError("failed writing index snapshot: " + path);
}

std::unique_ptr<KnnIndex> KnnIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open index snapshot: " + path);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError("not an index snapshot: " + path);
  const auto dims = get<std::uint32_t>(in);
  get<std::uint32_t>(in);
  const auto count = get<std::uint64_t>(in);
  const auto seed = get<std::uint64_t>(in);

  std::unordered_map<std::string, std::string> texts;
  if (std::ifstream side(path + ".sidecar.jsonl"); side) {
    std::string line;
    while (std::getline(side, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      texts[j.at("id").get<std::string>()] = j.value("text", std::string());
    }
  }

  auto index = std::make_unique<KnnIndex>(dims, seed);
  for (std::uint64_t r = 0; r < count; ++r) {
    std::array<char, kIdWidth> id{};
    in.read(id.data(), id.size());
    std::array<std::uint8_t, 4> label{};
    in.read(reinterpret_cast<char*>(label.data()), label.size());
    EmbeddingVector v;
    v.values.resize(dims);
    in.read(reinterpret_cast<char*>(v.values.data()), static_cast<std::streamsize>(dims * sizeof(float)));
    if (!in) throw FormatError("truncated index snapshot: " + path);
    const std::string sid(id.data(), strnlen(id.data(), id.size()));
    auto it = texts.find(sid);
    index->insert(sid, v, label[0] ? Label::Toxic : Label::Clean, it == texts.end() ? "" : it->second);
  }
  return index;
}

}  // namespace toxcascade::vectorize
