#pragma once
// Local text embedder and exhaustive cosine k-NN index.
//
// HashingEmbedder maps word 1-2 grams and character 3-4 grams into a fixed
// number of buckets with a seeded signed hash, then unit-normalizes. It
// stands in for a sentence encoder behind the TextEmbedder interface.

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "toxcascade/textprep.hpp"

namespace toxcascade::vectorize {

inline constexpr std::size_t kDefaultDims = 384;
inline constexpr std::uint64_t kDefaultHashSeed = 0x5eed'70c5'ca5c'adeULL;

enum class Label : std::uint8_t { Clean = 0, Toxic = 1 };

const char* to_string(Label l);
Label label_from_string(std::string_view s);

struct EmbeddingVector {
  std::vector<float> values;
  double norm = 0.0;        // Euclidean length (1 for any non-degenerate embedding)
  bool degenerate = false;  // all features cancelled out; values are zero

  std::size_t dims() const { return values.size(); }
};

// Cosine of two unit vectors, clamped to [-1, 1]. Throws DimensionMismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Returns a unit-norm copy (zero vectors come back flagged degenerate).
EmbeddingVector make_unit(std::vector<float> values);

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual std::size_t dims() const = 0;
  virtual EmbeddingVector embed(const textprep::NormalizedMessage& msg) const = 0;
};

struct HashedFeature {
  std::string feature;
  std::uint32_t bucket;
  int sign;  // +1 or -1
};

class HashingEmbedder final : public TextEmbedder {
 public:
  explicit HashingEmbedder(std::size_t dims = kDefaultDims, std::uint64_t seed = kDefaultHashSeed);

  std::size_t dims() const override { return dims_; }
  std::uint64_t seed() const { return seed_; }

  // Throws DegenerateInput when the message yields no n-grams.
  EmbeddingVector embed(const textprep::NormalizedMessage& msg) const override;

  // Feature strings in extraction order: "w:" unigrams, "b:" bigrams, "c:" char grams.
  static std::vector<std::string> extract_features(const std::vector<std::string>& tokens);
  HashedFeature hash_feature(std::string_view feature) const;

 private:
  std::size_t dims_;
  std::uint64_t seed_;
};

// Seeded 64-bit string hash (FNV-1a, splitmix64 finalizer). Stable across platforms.
std::uint64_t stable_hash(std::string_view s, std::uint64_t seed);

struct RetrievalConfig {
  std::size_t k = 5;
  double min_similarity = 0.7;

  void validate() const;
};

struct KnnEntry {
  std::string id;
  Label label = Label::Clean;
  std::string text;
};

struct KnnHit {
  KnnEntry entry;
  double similarity = 0.0;
  std::size_t position = 0;  // insertion order
};

// Exhaustive-scan cosine index. Many concurrent readers, exclusive inserts.
class KnnIndex {
 public:
  explicit KnnIndex(std::size_t dims = kDefaultDims, std::uint64_t hash_seed = kDefaultHashSeed);

  KnnIndex(const KnnIndex&) = delete;
  KnnIndex& operator=(const KnnIndex&) = delete;

  std::size_t dims() const { return dims_; }
  std::uint64_t hash_seed() const { return hash_seed_; }
  std::size_t size() const;
  bool contains(const std::string& id) const;

  // Throws DuplicateId / DimensionMismatch.
  void insert(const std::string& id, const EmbeddingVector& v, Label label, std::string text);

  // Sorted by similarity desc, ties by insertion order; at most cfg.k hits,
  // every hit >= cfg.min_similarity.
  std::vector<KnnHit> query(const EmbeddingVector& q, const RetrievalConfig& cfg) const;

  // Snapshot: binary file at `path` plus "<path>.sidecar.jsonl" with id/label/text.
  void save(const std::string& path) const;
  static std::unique_ptr<KnnIndex> load(const std::string& path);

  // Row accessor for tests and oracles (copy, taken under the read lock).
  std::vector<float> vector_at(std::size_t position) const;
  KnnEntry entry_at(std::size_t position) const;

 private:
  std::size_t dims_;
  std::uint64_t hash_seed_;
  mutable std::shared_mutex mu_;
  std::vector<float> matrix_;  // row-major, size() * dims_
  std::vector<KnnEntry> entries_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

}  // namespace toxcascade::vectorize
