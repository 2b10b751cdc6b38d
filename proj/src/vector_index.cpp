#include "devassist/vector_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include <nlohmann/json.hpp>

#include "devassist/simd/kernels.hpp"

namespace devassist::index {

namespace {

using nlohmann::json;

constexpr size_t kRecordBytes = VectorIndex::kDim * sizeof(float);

void put_f32_le(std::string& out, float value) {
  const auto bits = std::bit_cast<uint32_t>(value);
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((bits >> shift) & 0xff));
}

float get_f32_le(const char* p) {
  uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) bits = (bits << 8) | static_cast<uint8_t>(p[i]);
  return std::bit_cast<float>(bits);
}

// Next '\n'-terminated line starting at pos; nullopt when no terminator.
std::optional<std::string_view> read_line(std::string_view buf, size_t& pos) {
  const size_t end = buf.find('\n', pos);
  if (end == std::string_view::npos) return std::nullopt;
  auto line = buf.substr(pos, end - pos);
  pos = end + 1;
  return line;
}

json parse_json_line(std::string_view line, const char* what) {
  try {
    auto doc = json::parse(line);
    if (!doc.is_object()) throw IndexError(IndexErrorKind::Corrupt, std::string(what) + " is not a JSON object");
    return doc;
  } catch (const json::parse_error&) {
    throw IndexError(IndexErrorKind::Corrupt, std::string(what) + " is not valid JSON");
  }
}

}  // namespace

std::string_view to_string(IndexErrorKind kind) {
  switch (kind) {
    case IndexErrorKind::DuplicateId: return "duplicate_id";
    case IndexErrorKind::DimensionMismatch: return "dimension_mismatch";
    case IndexErrorKind::Io: return "io";
    case IndexErrorKind::Corrupt: return "corrupt";
    case IndexErrorKind::Truncated: return "truncated";
    case IndexErrorKind::VersionMismatch: return "version_mismatch";
    case IndexErrorKind::HashMismatch: return "hash_mismatch";
  }
  return "?";
}

void VectorIndex::insert(std::string id, const embed::EmbeddingVector& vector, RecordMetadata metadata) {
  std::vector<float> f(kDim);
  for (size_t i = 0; i < kDim; ++i) f[i] = static_cast<float>(vector[i]);
  insert(std::move(id), f, std::move(metadata));
}

void VectorIndex::insert(std::string id, std::span<const float> vector, RecordMetadata metadata) {
  if (vector.size() != kDim) {
    throw IndexError(IndexErrorKind::DimensionMismatch, "vector has " + std::to_string(vector.size()) +
                                                            " components, index expects " + std::to_string(kDim));
  }
  if (lookup_.contains(id)) throw IndexError(IndexErrorKind::DuplicateId, "duplicate id '" + id + "'");
  // Norms come from the scalar kernel so stored state never depends on the dispatch.
  norms_.push_back(std::sqrt(simd::scalar::sum_squares_f32(vector.data(), kDim)));
  data_.insert(data_.end(), vector.begin(), vector.end());
  lookup_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  metadata_.push_back(std::move(metadata));
}

std::optional<size_t> VectorIndex::find(std::string_view id) const {
  auto it = lookup_.find(std::string(id));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

QueryResult VectorIndex::search(const embed::EmbeddingVector& query, size_t k) const {
  return search(query.values(), k);
}

QueryResult VectorIndex::search(std::span<const double> query, size_t k) const {
  if (query.size() != kDim) {
    throw IndexError(IndexErrorKind::DimensionMismatch, "query has " + std::to_string(query.size()) +
                                                            " components, index expects " + std::to_string(kDim));
  }
  QueryResult result;
  k = std::min(k, size());
  if (k == 0) return result;

  double qnorm = 0.0;
  for (double x : query) qnorm += x * x;
  qnorm = std::sqrt(qnorm);

  std::vector<double> sims(size());
  simd::kernels().dot_rows_f64_f32(query.data(), data_.data(), size(), kDim, sims.data());
  for (size_t i = 0; i < size(); ++i) {
    const double denom = qnorm * norms_[i];
    sims[i] = denom == 0.0 ? 0.0 : std::clamp(sims[i] / denom, -1.0, 1.0);
  }

  std::vector<size_t> order(size());
  std::iota(order.begin(), order.end(), size_t{0});
  auto better = [&](size_t a, size_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return ids_[a] < ids_[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);

  result.hits.reserve(k);
  for (size_t i = 0; i < k; ++i) {
    const size_t r = order[i];
    result.hits.push_back({ids_[r], sims[r], metadata_[r]});
  }
  return result;
}

void VectorIndex::save(const std::filesystem::path& path) const {
  std::string out;
  out.reserve(size() * (kRecordBytes + 128) + 128);
  const json header = {{"format", kFormatName},
                       {"version", kFormatVersion},
                       {"band_config_hash", band_config_hash_},
                       {"dim", kDim},
                       {"count", size()}};
  out += header.dump();
  out += '\n';
  for (size_t i = 0; i < size(); ++i) {
    const json record = {{"id", ids_[i]},
                         {"path", metadata_[i].path},
                         {"span", metadata_[i].span},
                         {"source_kind", metadata_[i].source_kind},
                         {"band_config_hash", band_config_hash_}};
    out += record.dump();
    out += '\n';
    for (float f : vector(i)) put_f32_le(out, f);
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IndexError(IndexErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IndexError(IndexErrorKind::Io, "write to '" + path.string() + "' failed");
}

VectorIndex VectorIndex::load(const std::filesystem::path& path, std::optional<std::string_view> expected_hash) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IndexError(IndexErrorKind::Io, "cannot open '" + path.string() + "'");
  const std::string buf((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  if (file.bad()) throw IndexError(IndexErrorKind::Io, "read from '" + path.string() + "' failed");

  size_t pos = 0;
  const auto header_line = read_line(buf, pos);
  if (!header_line) throw IndexError(IndexErrorKind::Corrupt, "missing index header");
  const json header = parse_json_line(*header_line, "index header");

  std::string hash;
  size_t count = 0;
  try {
    if (header.at("format").get<std::string>() != kFormatName) {
      throw IndexError(IndexErrorKind::Corrupt, "not a vector index file");
    }
    const int version = header.at("version").get<int>();
    if (version != kFormatVersion) {
      throw IndexError(IndexErrorKind::VersionMismatch, "unsupported index format version " + std::to_string(version));
    }
    if (header.at("dim").get<size_t>() != kDim) {
      throw IndexError(IndexErrorKind::DimensionMismatch, "index dimension does not match " + std::to_string(kDim));
    }
    hash = header.at("band_config_hash").get<std::string>();
    count = header.at("count").get<size_t>();
  } catch (const json::exception& e) {
    throw IndexError(IndexErrorKind::Corrupt, std::string("malformed index header: ") + e.what());
  }
  if (expected_hash && *expected_hash != hash) {
    throw IndexError(IndexErrorKind::HashMismatch, "index band config " + hash + " does not match expected " +
                                                       std::string(*expected_hash));
  }

  VectorIndex index(hash);
  std::vector<float> values(kDim);
  for (size_t r = 0; r < count; ++r) {
    if (pos >= buf.size()) {
      throw IndexError(IndexErrorKind::Truncated, "index ends after " + std::to_string(r) + " of " +
                                                      std::to_string(count) + " records");
    }
    const auto line = read_line(buf, pos);
    if (!line) throw IndexError(IndexErrorKind::Truncated, "record " + std::to_string(r) + " header is truncated");
    const json rec = parse_json_line(*line, "record header");
    std::string id;
    RecordMetadata md;
    try {
      if (rec.at("band_config_hash").get<std::string>() != hash) {
        throw IndexError(IndexErrorKind::HashMismatch, "record " + std::to_string(r) + " has a different band config");
      }
      id = rec.at("id").get<std::string>();
      md.path = rec.at("path").get<std::string>();
      md.span = rec.at("span").get<std::string>();
      md.source_kind = rec.at("source_kind").get<std::string>();
    } catch (const json::exception& e) {
      throw IndexError(IndexErrorKind::Corrupt, std::string("malformed record header: ") + e.what());
    }
    if (buf.size() - pos < kRecordBytes) {
      throw IndexError(IndexErrorKind::Truncated, "record '" + id + "' vector is truncated");
    }
    for (size_t i = 0; i < kDim; ++i) values[i] = get_f32_le(buf.data() + pos + i * sizeof(float));
    pos += kRecordBytes;
    try {
      index.insert(std::move(id), values, std::move(md));
    } catch (const IndexError& e) {
      throw IndexError(IndexErrorKind::Corrupt, std::string("invalid record: ") + e.what());
    }
  }
  if (pos != buf.size()) throw IndexError(IndexErrorKind::Corrupt, "trailing data after last record");
  return index;
}

}  // namespace devassist::index
