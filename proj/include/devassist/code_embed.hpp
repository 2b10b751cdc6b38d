#pragma once

// Deterministic structural embeddings of code graphs.
//
// The 768 components are split into three bands:
//   [0, 512)    Weisfeiler-Lehman subtree labels, feature-hashed
//   [512, 704)  identifier names, scaled by identifier_weight
//   [704, 768)  literal values
// Counts are accumulated as integers and only converted to floating point
// for the final L2 normalization, so output is bit-stable across runs.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "devassist/code_graph.hpp"

namespace devassist::embed {

inline constexpr size_t kEmbeddingDim = 768;

struct BandConfig {
  size_t structural_dims = 512;
  size_t identifier_dims = 192;
  size_t literal_dims = 64;
  double identifier_weight = 0.5;
  size_t wl_iterations = 3;
  uint64_t hash_seed = 0x5eed'c0de'2024'0001ULL;

  void validate() const;
};

// Stable fingerprint of every field that affects vector contents.
std::string band_config_hash(const BandConfig& bands);

class EmbeddingVector {
 public:
  EmbeddingVector() { values_.fill(0.0); }
  explicit EmbeddingVector(const std::array<double, kEmbeddingDim>& values) : values_(values) {}

  static EmbeddingVector from_floats(std::span<const float> values);

  std::span<const double> values() const { return values_; }
  double operator[](size_t i) const { return values_[i]; }
  double& operator[](size_t i) { return values_[i]; }
  static constexpr size_t size() { return kEmbeddingDim; }

  double norm() const;
  bool is_zero() const;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::array<double, kEmbeddingDim> values_;
};

EmbeddingVector graph_to_vector(const CodeGraph& graph, const BandConfig& bands = {});

// Cosine similarity clamped to [-1, 1]; 0 when either side is the zero vector.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Convenience: parse with parser_id and embed.
EmbeddingVector embed_source(std::string_view source, const BandConfig& bands = {},
                             std::string_view parser_id = "mini");

}  // namespace devassist::embed
