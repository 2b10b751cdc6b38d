#include "devassist/code_embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

namespace devassist::embed {

namespace {

constexpr uint64_t kIdentifierSalt = 0x1d;
constexpr uint64_t kLiteralSalt = 0x2f;

// Neighbor groups: each edge kind, seen from both ends.
constexpr size_t kGroupCount = kEdgeKindCount * 2;

uint64_t double_bits(double x) {
  uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  return bits;
}

}  // namespace

void BandConfig::validate() const {
  if (structural_dims + identifier_dims + literal_dims != kEmbeddingDim) {
    throw InvalidArgument("band config: band dimensions must sum to " + std::to_string(kEmbeddingDim));
  }
  if (structural_dims == 0 || identifier_dims == 0 || literal_dims == 0) {
    throw InvalidArgument("band config: every band needs at least one dimension");
  }
  if (!(identifier_weight >= 0.0) || !std::isfinite(identifier_weight)) {
    throw InvalidArgument("band config: identifier_weight must be non-negative");
  }
}

std::string band_config_hash(const BandConfig& bands) {
  uint64_t h = fnv1a64("band-config-v1");
  h = hash_combine(h, bands.structural_dims);
  h = hash_combine(h, bands.identifier_dims);
  h = hash_combine(h, bands.literal_dims);
  h = hash_combine(h, double_bits(bands.identifier_weight));
  h = hash_combine(h, bands.wl_iterations);
  h = hash_combine(h, bands.hash_seed);
  return to_hex(h);
}

EmbeddingVector EmbeddingVector::from_floats(std::span<const float> values) {
  if (values.size() != kEmbeddingDim) {
    throw InvalidArgument("embedding: expected " + std::to_string(kEmbeddingDim) + " components, got " +
                          std::to_string(values.size()));
  }
  EmbeddingVector v;
  for (size_t i = 0; i < kEmbeddingDim; ++i) v.values_[i] = values[i];
  return v;
}

double EmbeddingVector::norm() const {
  double sum = 0.0;
  for (double x : values_) sum += x * x;
  return std::sqrt(sum);
}

bool EmbeddingVector::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return x == 0.0; });
}

EmbeddingVector graph_to_vector(const CodeGraph& graph, const BandConfig& bands) {
  bands.validate();
  EmbeddingVector out;
  if (graph.empty()) return out;

  const size_t n = graph.nodes.size();
  std::vector<std::array<std::vector<uint32_t>, kGroupCount>> neighbors(n);
  for (const auto& e : graph.edges) {
    if (e.src >= n || e.dst >= n) throw InvalidArgument("code graph: edge endpoint out of range");
    const auto k = static_cast<size_t>(e.kind);
    neighbors[e.src][2 * k].push_back(e.dst);
    neighbors[e.dst][2 * k + 1].push_back(e.src);
  }

  std::vector<uint64_t> structural(bands.structural_dims, 0);
  std::vector<uint64_t> identifier(bands.identifier_dims, 0);
  std::vector<uint64_t> literal(bands.literal_dims, 0);

  std::vector<uint64_t> label(n);
  for (size_t i = 0; i < n; ++i) label[i] = fnv1a64(graph.nodes[i].label, bands.hash_seed);

  std::vector<uint64_t> next(n);
  std::vector<uint64_t> scratch;
  for (size_t round = 0;; ++round) {
    for (size_t i = 0; i < n; ++i) {
      structural[hash_combine(label[i], round) % bands.structural_dims] += 1;
    }
    if (round == bands.wl_iterations) break;
    for (size_t i = 0; i < n; ++i) {
      uint64_t h = hash_combine(bands.hash_seed, label[i]);
      for (size_t g = 0; g < kGroupCount; ++g) {
        scratch.clear();
        for (uint32_t j : neighbors[i][g]) scratch.push_back(label[j]);
        std::sort(scratch.begin(), scratch.end());
        h = hash_combine(h, 0xa5a5'0000ULL + g);
        for (uint64_t l : scratch) h = hash_combine(h, l);
        h = hash_combine(h, scratch.size());
      }
      next[i] = h;
    }
    label.swap(next);
  }

  for (const auto& node : graph.nodes) {
    if (!node.name) continue;
    if (is_literal_label(node.label)) {
      literal[fnv1a64(*node.name, bands.hash_seed ^ kLiteralSalt) % bands.literal_dims] += 1;
    } else {
      identifier[fnv1a64(*node.name, bands.hash_seed ^ kIdentifierSalt) % bands.identifier_dims] += 1;
    }
  }

  size_t pos = 0;
  for (uint64_t c : structural) out[pos++] = static_cast<double>(c);
  for (uint64_t c : identifier) out[pos++] = bands.identifier_weight * static_cast<double>(c);
  for (uint64_t c : literal) out[pos++] = static_cast<double>(c);

  const double norm = out.norm();
  if (norm == 0.0) return out;
  for (size_t i = 0; i < kEmbeddingDim; ++i) out[i] /= norm;
  return out;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < kEmbeddingDim; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

EmbeddingVector embed_source(std::string_view source, const BandConfig& bands, std::string_view parser_id) {
  return graph_to_vector(parse_to_graph(source, parser_id), bands);
}

}  // namespace devassist::embed
