#pragma once

// Multi-source context fusion.
//
//   raw_i = prior(source_i) * exp(cos(q, v_i) / tau) * 2^(-(now - t_i) / half_life)
//           * (boost if near_breakpoint)
//   w_i   = raw_i / sum_j raw_j
//
// Scored items are then packed greedily into a token budget.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "devassist/code_embed.hpp"

namespace devassist::fusion {

enum class Source : uint8_t { IdeInteraction, CodeContext, RuntimeLog };
inline constexpr size_t kSourceCount = 3;

std::string_view to_string(Source s);
Source parse_source(std::string_view s);

struct ContextItem {
  Source source = Source::CodeContext;
  embed::EmbeddingVector vector;
  std::string text;
  double timestamp = 0.0;  // seconds since session start
  bool near_breakpoint = false;
  int64_t token_cost = 1;
};

struct FusionWeights {
  std::array<double, kSourceCount> prior{0.63, 0.27, 0.10};
  double temperature = 0.1;
  double recency_half_life_s = 300.0;
  double breakpoint_boost = 2.0;

  double prior_of(Source s) const { return prior[static_cast<size_t>(s)]; }
  void validate() const;
};

struct ScoredItem {
  ContextItem item;
  double weight = 0.0;
};

// Sorted by weight descending, ties by timestamp descending, then input order.
std::vector<ScoredItem> score_items(const embed::EmbeddingVector& query, const std::vector<ContextItem>& items,
                                    const FusionWeights& weights, double now);

struct FusedContext {
  std::vector<ScoredItem> entries;  // selected, weights renormalized
  int64_t total_tokens = 0;
  int64_t budget = 0;
  std::string rendered;
};

// Greedy: walk scored items in order, take each one that still fits. Items
// with zero weight are never selected.
FusedContext assemble_context(const std::vector<ScoredItem>& scored, int64_t budget);

// Rough token estimate for free text (4 characters per token, at least 1).
int64_t estimate_tokens(std::string_view text);

}  // namespace devassist::fusion
