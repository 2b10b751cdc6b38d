#pragma once

// Exact cosine top-k over embedding vectors, with a single-file format:
//
//   <JSON header line>\n
//   repeated per record:
//     <JSON record line {band_config_hash, id, path, source_kind, span}>\n
//     768 x float32, little-endian
//
// Vectors are stored as float32; scoring accumulates in double.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "devassist/code_embed.hpp"

namespace devassist::index {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kFormatName = "devassist-vector-index";

struct RecordMetadata {
  std::string path;
  std::string span;
  std::string source_kind;

  bool operator==(const RecordMetadata&) const = default;
};

struct Hit {
  std::string id;
  double similarity = 0.0;
  RecordMetadata metadata;
};

struct QueryResult {
  std::vector<Hit> hits;
};

enum class IndexErrorKind { DuplicateId, DimensionMismatch, Io, Corrupt, Truncated, VersionMismatch, HashMismatch };

std::string_view to_string(IndexErrorKind kind);

class IndexError : public Error {
 public:
  IndexError(IndexErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  IndexErrorKind kind() const noexcept { return kind_; }

 private:
  IndexErrorKind kind_;
};

class VectorIndex {
 public:
  static constexpr size_t kDim = embed::kEmbeddingDim;

  explicit VectorIndex(std::string band_config_hash) : band_config_hash_(std::move(band_config_hash)) {}

  void insert(std::string id, const embed::EmbeddingVector& vector, RecordMetadata metadata);
  // Raw float32 input; must be exactly kDim components.
  void insert(std::string id, std::span<const float> vector, RecordMetadata metadata);

  QueryResult search(const embed::EmbeddingVector& query, size_t k) const;
  QueryResult search(std::span<const double> query, size_t k) const;

  size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::string& band_config_hash() const { return band_config_hash_; }

  const std::string& id(size_t i) const { return ids_[i]; }
  const RecordMetadata& metadata(size_t i) const { return metadata_[i]; }
  std::span<const float> vector(size_t i) const { return {data_.data() + i * kDim, kDim}; }
  std::optional<size_t> find(std::string_view id) const;

  void save(const std::filesystem::path& path) const;
  // expected_hash, when given, must match the file's band config hash.
  static VectorIndex load(const std::filesystem::path& path,
                          std::optional<std::string_view> expected_hash = std::nullopt);

 private:
  std::string band_config_hash_;
  std::vector<std::string> ids_;
  std::vector<RecordMetadata> metadata_;
  std::vector<float> data_;
  std::vector<double> norms_;
  std::unordered_map<std::string, size_t> lookup_;
};

}  // namespace devassist::index
