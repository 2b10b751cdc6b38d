#include "devassist/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace devassist::fusion {

std::string_view to_string(Source s) {
  switch (s) {
    case Source::IdeInteraction: return "ide_interaction";
    case Source::CodeContext: return "code_context";
    case Source::RuntimeLog: return "runtime_log";
  }
  return "?";
}

Source parse_source(std::string_view s) {
  if (s == "ide_interaction" || s == "ide") return Source::IdeInteraction;
  if (s == "code_context" || s == "code") return Source::CodeContext;
  if (s == "runtime_log" || s == "log") return Source::RuntimeLog;
  throw InvalidArgument("unknown context source '" + std::string(s) + "'");
}

void FusionWeights::validate() const {
  double sum = 0.0;
  for (double p : prior) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("fusion: priors must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("fusion: priors must sum to 1");
  if (!(temperature > 0.0)) throw InvalidArgument("fusion: temperature must be positive");
  if (!(recency_half_life_s > 0.0)) throw InvalidArgument("fusion: recency half-life must be positive");
  if (!(breakpoint_boost >= 1.0)) throw InvalidArgument("fusion: breakpoint boost must be >= 1");
}

std::vector<ScoredItem> score_items(const embed::EmbeddingVector& query, const std::vector<ContextItem>& items,
                                    const FusionWeights& weights, double now) {
  if (items.empty()) throw InvalidArgument("score_items: no context items");
  weights.validate();

  // Log-domain scores; exp(cos / tau) overflows quickly for small tau.
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> log_raw(items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    if (it.timestamp > now) throw InvalidArgument("score_items: item timestamp is after 'now'");
    const double prior = weights.prior_of(it.source);
    if (prior == 0.0) {
      log_raw[i] = kNegInf;
      continue;
    }
    log_raw[i] = std::log(prior) + embed::cosine(query, it.vector) / weights.temperature -
                 (now - it.timestamp) / weights.recency_half_life_s * std::log(2.0) +
                 (it.near_breakpoint ? std::log(weights.breakpoint_boost) : 0.0);
  }
  const double peak = *std::max_element(log_raw.begin(), log_raw.end());

  std::vector<double> raw(items.size(), 0.0);
  double total = 0.0;
  if (peak != kNegInf) {
    for (size_t i = 0; i < items.size(); ++i) {
      raw[i] = log_raw[i] == kNegInf ? 0.0 : std::exp(log_raw[i] - peak);
      total += raw[i];
    }
  }

  std::vector<size_t> order(items.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (raw[a] != raw[b]) return raw[a] > raw[b];
    return items[a].timestamp > items[b].timestamp;
  });

  std::vector<ScoredItem> out;
  out.reserve(items.size());
  for (size_t i : order) out.push_back({items[i], total > 0.0 ? raw[i] / total : 0.0});
  return out;
}

FusedContext assemble_context(const std::vector<ScoredItem>& scored, int64_t budget) {
  if (budget < 0) throw InvalidArgument("assemble_context: budget must be non-negative");
  FusedContext ctx;
  ctx.budget = budget;
  double selected_weight = 0.0;
  for (const auto& s : scored) {
    if (!(s.weight > 0.0)) continue;
    if (s.item.token_cost < 1) throw InvalidArgument("assemble_context: token cost must be >= 1");
    if (ctx.total_tokens + s.item.token_cost > budget) continue;
    ctx.total_tokens += s.item.token_cost;
    selected_weight += s.weight;
    ctx.entries.push_back(s);
  }
  for (auto& e : ctx.entries) e.weight /= selected_weight;

  std::ostringstream text;
  for (const auto& e : ctx.entries) {
    text << "<<" << to_string(e.item.source) << " weight=" << e.weight << ">>\n" << e.item.text << "\n";
  }
  ctx.rendered = text.str();
  return ctx;
}

int64_t estimate_tokens(std::string_view text) {
  return std::max<int64_t>(1, static_cast<int64_t>((text.size() + 3) / 4));
}

}  // namespace devassist::fusion
