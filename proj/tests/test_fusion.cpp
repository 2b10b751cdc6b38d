#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "devassist/fusion.hpp"

using namespace devassist;
using namespace devassist::fusion;
using devassist::embed::EmbeddingVector;

namespace {

EmbeddingVector unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  EmbeddingVector v;
  double n = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    v[i] = g(rng);
    n += v[i] * v[i];
  }
  n = std::sqrt(n);
  for (size_t i = 0; i < v.size(); ++i) v[i] /= n;
  return v;
}

EmbeddingVector axis(size_t i) {
  EmbeddingVector v;
  v[i] = 1.0;
  return v;
}

ContextItem item(Source s, EmbeddingVector v, std::string text, double t = 0.0, bool bp = false, int64_t cost = 1) {
  return {s, v, std::move(text), t, bp, cost};
}

std::vector<ContextItem> random_items(std::mt19937_64& rng, size_t n, double now) {
  std::vector<ContextItem> items;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (size_t i = 0; i < n; ++i) {
    items.push_back(item(static_cast<Source>(rng() % 3), unit(rng), "item" + std::to_string(i), u(rng) * now,
                         rng() % 4 == 0, 1 + static_cast<int64_t>(rng() % 400)));
  }
  return items;
}

double weight_of(const std::vector<ScoredItem>& scored, const std::string& text) {
  for (const auto& s : scored)
    if (s.item.text == text) return s.weight;
  ADD_FAILURE() << "missing " << text;
  return NAN;
}

}  // namespace

TEST(FusionWeights, DefaultPriors) {
  const FusionWeights w;
  EXPECT_EQ(w.prior_of(Source::IdeInteraction), 0.63);
  EXPECT_EQ(w.prior_of(Source::CodeContext), 0.27);
  EXPECT_EQ(w.prior_of(Source::RuntimeLog), 0.10);
  EXPECT_NEAR(w.prior[0] + w.prior[1] + w.prior[2], 1.0, 1e-12);
  EXPECT_NO_THROW(w.validate());
}

TEST(FusionWeights, Validation) {
  FusionWeights w;
  w.temperature = 0.0;
  EXPECT_THROW(w.validate(), InvalidArgument);
  w = {};
  w.prior = {0.5, 0.5, 0.5};
  EXPECT_THROW(w.validate(), InvalidArgument);
  w = {};
  w.breakpoint_boost = 0.5;
  EXPECT_THROW(w.validate(), InvalidArgument);
  w = {};
  w.recency_half_life_s = -1.0;
  EXPECT_THROW(w.validate(), InvalidArgument);
}

TEST(ScoreItems, Errors) {
  EXPECT_THROW(score_items(axis(0), {}, {}, 0.0), InvalidArgument);
  EXPECT_THROW(score_items(axis(0), {item(Source::CodeContext, axis(0), "a", 10.0)}, {}, 5.0), InvalidArgument);
  FusionWeights w;
  w.temperature = -1.0;
  EXPECT_THROW(score_items(axis(0), {item(Source::CodeContext, axis(0), "a")}, w, 0.0), InvalidArgument);
}

TEST(ScoreItems, SingleItemGetsAllWeight) {
  const auto s = score_items(axis(0), {item(Source::RuntimeLog, axis(1), "a", 3.0)}, {}, 100.0);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s[0].weight, 1.0);
}

TEST(ScoreItems, PriorRatioAtEqualSimilarity) {
  const auto q = axis(0);
  const auto s = score_items(q, {item(Source::CodeContext, axis(1), "code"), item(Source::IdeInteraction, axis(2), "ide")},
                             {}, 0.0);
  EXPECT_NEAR(weight_of(s, "ide") / weight_of(s, "code"), 0.63 / 0.27, 1e-9);
  EXPECT_EQ(s[0].item.text, "ide");
}

TEST(ScoreItems, BreakpointBoostDoubles) {
  const auto v = axis(5);
  const auto s = score_items(axis(0), {item(Source::RuntimeLog, v, "plain", 1.0), item(Source::RuntimeLog, v, "bp", 1.0, true)},
                             {}, 1.0);
  EXPECT_NEAR(weight_of(s, "bp") / weight_of(s, "plain"), 2.0, 1e-12);
}

TEST(ScoreItems, MatchesFormulaOracle) {
  std::mt19937_64 rng(8);
  FusionWeights w;
  w.prior = {0.5, 0.3, 0.2};
  w.temperature = 0.35;
  w.recency_half_life_s = 120.0;
  w.breakpoint_boost = 3.0;
  const double now = 900.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto q = unit(rng);
    const auto items = random_items(rng, 1 + rng() % 20, now);
    std::vector<double> raw;
    double total = 0.0;
    for (const auto& it : items) {
      double c = 0.0;
      for (size_t i = 0; i < q.size(); ++i) c += q[i] * it.vector[i];
      const double r = w.prior[static_cast<size_t>(it.source)] * std::exp(c / w.temperature) *
                       std::pow(2.0, -(now - it.timestamp) / w.recency_half_life_s) *
                       (it.near_breakpoint ? w.breakpoint_boost : 1.0);
      raw.push_back(r);
      total += r;
    }
    const auto scored = score_items(q, items, w, now);
    ASSERT_EQ(scored.size(), items.size());
    double sum = 0.0;
    for (size_t i = 0; i < items.size(); ++i) {
      EXPECT_NEAR(weight_of(scored, items[i].text), raw[i] / total, 1e-9);
    }
    for (size_t i = 0; i < scored.size(); ++i) {
      sum += scored[i].weight;
      if (i > 0) {
        EXPECT_GE(scored[i - 1].weight, scored[i].weight);
        if (scored[i - 1].weight == scored[i].weight) {
          EXPECT_GE(scored[i - 1].item.timestamp, scored[i].item.timestamp);
        }
      }
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(ScoreItems, TiesOrderedByRecency) {
  const auto v = axis(1);
  // Same raw weight: the older item is boosted to compensate its decay exactly.
  FusionWeights w;
  w.recency_half_life_s = 100.0;
  w.breakpoint_boost = 2.0;
  const auto s = score_items(axis(0), {item(Source::RuntimeLog, v, "old", 0.0, true), item(Source::RuntimeLog, v, "new", 100.0)},
                             w, 100.0);
  ASSERT_NEAR(s[0].weight, s[1].weight, 1e-15);
  if (s[0].weight == s[1].weight) {
    EXPECT_EQ(s[0].item.text, "new");
  }
}

TEST(ScoreItems, ExtremeSimilaritiesStayFinite) {
  FusionWeights w;
  w.temperature = 1e-3;
  const auto q = axis(0);
  EmbeddingVector anti;
  anti[0] = -1.0;
  const auto s = score_items(q, {item(Source::CodeContext, q, "same"), item(Source::CodeContext, anti, "anti")}, w, 0.0);
  EXPECT_TRUE(std::isfinite(s[0].weight));
  EXPECT_NEAR(s[0].weight + s[1].weight, 1.0, 1e-12);
  EXPECT_EQ(s[0].item.text, "same");
}

TEST(ScoreItems, MonotoneInSimilarity) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto q = unit(rng);
    auto items = random_items(rng, 2 + rng() % 8, 600.0);
    const size_t target = rng() % items.size();
    const auto before = weight_of(score_items(q, items, {}, 600.0), items[target].text);
    // Move the target toward the query: cosine strictly rises.
    auto& v = items[target].vector;
    const double t = u(rng);
    double n = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
      v[i] += t * q[i];
      n += v[i] * v[i];
    }
    for (size_t i = 0; i < v.size(); ++i) v[i] /= std::sqrt(n);
    const auto after = weight_of(score_items(q, items, {}, 600.0), items[target].text);
    EXPECT_GE(after, before * (1.0 - 1e-12)) << "trial " << trial;
  }
}

TEST(Assemble, GreedySkip) {
  std::vector<ScoredItem> scored = {{item(Source::IdeInteraction, axis(0), "ALPHA", 0, false, 500), 0.5},
                                    {item(Source::CodeContext, axis(0), "BRAVO", 0, false, 400), 0.3},
                                    {item(Source::RuntimeLog, axis(0), "CHARLIE", 0, false, 300), 0.2}};
  const auto ctx = assemble_context(scored, 800);
  ASSERT_EQ(ctx.entries.size(), 2u);
  EXPECT_EQ(ctx.entries[0].item.text, "ALPHA");
  EXPECT_EQ(ctx.entries[1].item.text, "CHARLIE");
  EXPECT_EQ(ctx.total_tokens, 800);
  EXPECT_NEAR(ctx.entries[0].weight, 0.5 / 0.7, 1e-12);
  EXPECT_NEAR(ctx.entries[1].weight, 0.2 / 0.7, 1e-12);
  ASSERT_NE(ctx.rendered.find("CHARLIE"), std::string::npos);
  EXPECT_LT(ctx.rendered.find("ALPHA"), ctx.rendered.find("CHARLIE"));
  EXPECT_EQ(ctx.rendered.find("BRAVO"), std::string::npos);
}

TEST(Assemble, EdgeCases) {
  std::vector<ScoredItem> scored = {{item(Source::IdeInteraction, axis(0), "a", 0, false, 5), 0.6},
                                    {item(Source::CodeContext, axis(0), "b", 0, false, 5), 0.4}};
  EXPECT_TRUE(assemble_context(scored, 0).entries.empty());
  EXPECT_THROW(assemble_context(scored, -1), InvalidArgument);
  const auto all = assemble_context(scored, 100);
  ASSERT_EQ(all.entries.size(), 2u);
  EXPECT_EQ(all.entries[0].item.text, "a");
  EXPECT_EQ(all.total_tokens, 10);
  EXPECT_EQ(all.budget, 100);
}

TEST(Assemble, RandomBudgetsRespectGreedyRule) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto q = unit(rng);
    const auto items = random_items(rng, 1 + rng() % 25, 1000.0);
    const auto scored = score_items(q, items, {}, 1000.0);
    const int64_t budget = static_cast<int64_t>(rng() % 3000);
    const auto ctx = assemble_context(scored, budget);
    ASSERT_LE(ctx.total_tokens, budget);
    // Replay the rule: walk in order, each item is taken iff it fits.
    int64_t used = 0;
    size_t next = 0;
    for (const auto& s : scored) {
      const bool fits = s.weight > 0.0 && used + s.item.token_cost <= budget;
      const bool taken = next < ctx.entries.size() && ctx.entries[next].item.text == s.item.text;
      EXPECT_EQ(fits, taken) << "trial " << trial;
      if (taken) {
        used += s.item.token_cost;
        ++next;
      }
    }
    EXPECT_EQ(next, ctx.entries.size());
    EXPECT_EQ(used, ctx.total_tokens);
    if (!ctx.entries.empty()) {
      double sum = 0.0;
      for (const auto& e : ctx.entries) {
        EXPECT_GT(e.weight, 0.0);
        sum += e.weight;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(Assemble, ZeroPriorExcludesSource) {
  std::mt19937_64 rng(44);
  FusionWeights w;
  w.prior = {0.7, 0.3, 0.0};
  for (int trial = 0; trial < 100; ++trial) {
    const auto items = random_items(rng, 10, 500.0);
    const auto ctx = assemble_context(score_items(unit(rng), items, w, 500.0), 100000);
    for (const auto& e : ctx.entries) EXPECT_NE(e.item.source, Source::RuntimeLog);
  }
}

TEST(Tokens, Estimate) {
  EXPECT_EQ(estimate_tokens(""), 1);
  EXPECT_EQ(estimate_tokens("abcd"), 1);
  EXPECT_EQ(estimate_tokens("abcde"), 2);
}
