#pragma once

// Independent reference implementations used as oracles by the unit tests
// and the acceptance binary. Nothing here calls the code under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "devassist/router.hpp"

namespace testsupport {

using devassist::router::Action;
using devassist::router::kActionCount;
using devassist::router::kStateCount;
using devassist::router::MdpModel;

// Random MDP over the 36-state space: rewards in [-10, 0], dense random
// transition rows, roughly a third of the states with only one legal action.
inline MdpModel random_mdp(std::mt19937_64& rng, double gamma) {
  std::uniform_real_distribution<double> reward(-10.0, 0.0);
  std::uniform_real_distribution<double> mass(0.0, 1.0);
  MdpModel::RewardTable rewards{};
  MdpModel::LegalTable legal{};
  MdpModel::TransitionTable transitions(kStateCount * kActionCount * kStateCount, 0.0);
  for (size_t s = 0; s < kStateCount; ++s) {
    const bool masked = mass(rng) < 0.33;
    for (size_t a = 0; a < kActionCount; ++a) {
      rewards[s][a] = reward(rng);
      legal[s][a] = !(masked && a == 1);
      double total = 0.0;
      double* row = transitions.data() + (s * kActionCount + a) * kStateCount;
      for (size_t t = 0; t < kStateCount; ++t) {
        // Sparse-ish rows: about half the successors get mass.
        row[t] = mass(rng) < 0.5 ? mass(rng) : 0.0;
        total += row[t];
      }
      if (total == 0.0) {
        row[s] = 1.0;
        total = 1.0;
      }
      for (size_t t = 0; t < kStateCount; ++t) row[t] /= total;
    }
  }
  return MdpModel::from_tables(rewards, std::move(transitions), legal, gamma);
}

// Smallest horizon with gamma^H * r_max / (1 - gamma) < bound.
inline size_t horizon_for(double gamma, double r_max, double bound) {
  size_t h = 0;
  double tail = r_max / (1.0 - gamma);
  while (tail >= bound) {
    tail *= gamma;
    ++h;
  }
  return h;
}

// Finite-horizon expectimax by top-down memoized recursion:
// V_h(s) = max over legal a of r(s,a) + gamma * E[V_{h-1}(s')], V_0 = 0.
class ExpectimaxOracle {
 public:
  explicit ExpectimaxOracle(const MdpModel& mdp) : mdp_(mdp) {}

  double value(size_t horizon, size_t s) {
    if (horizon == 0) return 0.0;
    const auto key = std::make_pair(horizon, s);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    double best = -INFINITY;
    for (Action a : {Action::Edge, Action::Cloud}) {
      if (!mdp_.is_legal(s, a)) continue;
      const auto p = mdp_.transition(s, a);
      double future = 0.0;
      for (size_t t = 0; t < kStateCount; ++t) {
        if (p[t] != 0.0) future += p[t] * value(horizon - 1, t);
      }
      best = std::max(best, mdp_.reward(s, a) + mdp_.gamma() * future);
    }
    memo_.emplace(key, best);
    return best;
  }

 private:
  const MdpModel& mdp_;
  std::map<std::pair<size_t, size_t>, double> memo_;
};

// Plain DFS cycle enumeration over a small directed graph: returns the set of
// nodes that lie on at least one directed cycle.
inline std::set<size_t> nodes_on_cycles(size_t n, const std::vector<std::pair<size_t, size_t>>& edges) {
  std::vector<std::vector<size_t>> adj(n);
  for (auto [u, v] : edges) adj[u].push_back(v);
  std::set<size_t> on_cycle;
  // v lies on a cycle iff v is reachable from one of its successors.
  for (size_t v = 0; v < n; ++v) {
    std::vector<bool> seen(n, false);
    std::vector<size_t> stack(adj[v].begin(), adj[v].end());
    while (!stack.empty()) {
      const size_t u = stack.back();
      stack.pop_back();
      if (u == v) {
        on_cycle.insert(v);
        break;
      }
      if (seen[u]) continue;
      seen[u] = true;
      for (size_t w : adj[u]) stack.push_back(w);
    }
  }
  return on_cycle;
}

// Exhaustive cosine top-k over float rows with plain double arithmetic.
inline std::vector<size_t> brute_force_top_k(const std::vector<std::vector<float>>& rows,
                                             const std::vector<double>& query, size_t k) {
  double qn = 0.0;
  for (double q : query) qn += q * q;
  qn = std::sqrt(qn);
  std::vector<std::pair<double, size_t>> scored;
  for (size_t i = 0; i < rows.size(); ++i) {
    double dot = 0.0, rn = 0.0;
    for (size_t j = 0; j < query.size(); ++j) {
      dot += static_cast<double>(rows[i][j]) * query[j];
      rn += static_cast<double>(rows[i][j]) * static_cast<double>(rows[i][j]);
    }
    const double sim = (rn == 0.0 || qn == 0.0) ? 0.0 : dot / (std::sqrt(rn) * qn);
    scored.emplace_back(sim, i);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<size_t> out;
  for (size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(scored[i].second);
  return out;
}

// Synthetic layout with n widgets and about m constraint edges. Edges only
// point backwards in document order, so the layout is acyclic and every
// reference resolves.
inline std::string synthetic_layout(size_t n, size_t m, uint64_t seed) {
  static const char* kRelations[] = {"layout_below", "layout_above", "layout_toLeftOf", "layout_toRightOf",
                                     "layout_centeredBelow", "layout_centeredAbove"};
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::string>> attrs(n);
  size_t placed = 0;
  while (placed < m) {
    const size_t src = 1 + rng() % (n - 1);
    const size_t dst = rng() % src;
    const char* rel = kRelations[rng() % 6];
    bool dup = false;
    for (const auto& a : attrs[src]) dup = dup || a.rfind(rel, 0) == 0;
    if (dup) continue;
    attrs[src].push_back(std::string(rel) + "=\"@id/w" + std::to_string(dst) + "\"");
    ++placed;
  }
  std::string xml = "<ConstraintLayout>\n";
  for (size_t i = 0; i < n; ++i) {
    const bool button = i % 5 == 0;
    xml += button ? "  <Button" : "  <TextView";
    xml += " id=\"@+id/w" + std::to_string(i) + "\"";
    if (button) xml += " onClick=\"tap\"";
    for (const auto& a : attrs[i]) xml += " " + a;
    xml += "/>\n";
  }
  xml += "</ConstraintLayout>\n";
  return xml;
}

}  // namespace testsupport
