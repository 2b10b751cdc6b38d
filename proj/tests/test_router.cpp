#include <gtest/gtest.h>

#include <random>

#include "devassist/router.hpp"
#include "support.hpp"

using namespace devassist::router;

namespace {

MdpModel default_mdp(const CostModel& cost = {}) {
  return build_mdp(DeviceProfile{}, NetworkModel{}, cost, PerComplexity{0.5, 0.25, 0.25});
}

RoutingState st(Complexity c, DeviceClass d, NetworkState n, Battery b = Battery::Ok) { return {c, d, n, b}; }

}  // namespace

TEST(Featurize, RuleTable) {
  EXPECT_EQ(featurize_task({TaskKind::SyntaxFix, 1, 0, 80}).complexity, Complexity::Low);
  EXPECT_EQ(featurize_task({TaskKind::CrashAnalysis, 1, 0, 500}).complexity, Complexity::High);
  EXPECT_EQ(featurize_task({TaskKind::Completion, 2, 3, 2500}).complexity, Complexity::Medium);
  EXPECT_EQ(featurize_task({TaskKind::Refactor, 10, 0, 10}).complexity, Complexity::High);
  EXPECT_EQ(featurize_task({TaskKind::Refactor, 1, 5, 10}).complexity, Complexity::High);
  EXPECT_EQ(featurize_task({TaskKind::Completion, 1, 0, 2000}).complexity, Complexity::Medium);
  EXPECT_EQ(featurize_task({TaskKind::Completion, 9, 0, 1999}).complexity, Complexity::Low);
}

TEST(StateIndex, DenseAndBijective) {
  std::vector<bool> seen(kStateCount, false);
  for (size_t c = 0; c < 3; ++c)
    for (size_t d = 0; d < 2; ++d)
      for (size_t n = 0; n < 3; ++n)
        for (size_t b = 0; b < 2; ++b) {
          const RoutingState s{static_cast<Complexity>(c), static_cast<DeviceClass>(d),
                               static_cast<NetworkState>(n), static_cast<Battery>(b)};
          const size_t i = state_index(s);
          ASSERT_LT(i, kStateCount);
          EXPECT_FALSE(seen[i]);
          seen[i] = true;
          EXPECT_EQ(state_index(state_from_index(i)), i);
        }
}

TEST(Names, ParseAcceptsCliSpellings) {
  EXPECT_EQ(parse_device("cpu"), DeviceClass::CpuOnly);
  EXPECT_EQ(parse_device("GPU"), DeviceClass::Gpu);
  EXPECT_EQ(parse_battery("ok"), Battery::Ok);
  EXPECT_EQ(parse_network("offline"), NetworkState::Offline);
  EXPECT_THROW(parse_complexity("huge"), devassist::InvalidArgument);
}

TEST(BuildMdp, OfflineMasksCloud) {
  const auto mdp = default_mdp();
  for (size_t s = 0; s < kStateCount; ++s) {
    const bool offline = state_from_index(s).network == NetworkState::Offline;
    EXPECT_TRUE(mdp.is_legal(s, Action::Edge));
    EXPECT_EQ(mdp.is_legal(s, Action::Cloud), !offline);
  }
}

TEST(BuildMdp, TransitionsAreStochasticAndKeepDevice) {
  const auto mdp = default_mdp();
  for (size_t s = 0; s < kStateCount; ++s) {
    for (Action a : {Action::Edge, Action::Cloud}) {
      if (!mdp.is_legal(s, a)) continue;
      double sum = 0.0;
      const auto p = mdp.transition(s, a);
      for (size_t t = 0; t < kStateCount; ++t) {
        sum += p[t];
        if (p[t] > 0.0) {
          EXPECT_EQ(state_from_index(t).device, state_from_index(s).device);
          // Low battery is absorbing.
          if (state_from_index(s).battery == Battery::Low) {
            EXPECT_EQ(state_from_index(t).battery, Battery::Low);
          }
        }
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(BuildMdp, BatteryDrainScalesWithActionEnergy) {
  const DeviceProfile dev;
  const NetworkModel net;
  const auto mdp = default_mdp();
  const auto s = st(Complexity::High, DeviceClass::CpuOnly, NetworkState::Good);
  const double max_e = std::max(net.cloud_energy_units[2], dev.edge_energy_units[2]);
  for (Action a : {Action::Edge, Action::Cloud}) {
    const double energy = a == Action::Edge ? dev.edge_energy_units[2] : net.cloud_energy_units[2];
    double to_low = 0.0;
    const auto p = mdp.transition(state_index(s), a);
    for (size_t t = 0; t < kStateCount; ++t) {
      if (state_from_index(t).battery == Battery::Low) to_low += p[t];
    }
    EXPECT_NEAR(to_low, dev.battery_drain_probability * energy / max_e, 1e-12);
  }
}

TEST(BuildMdp, RejectsBadInputs) {
  NetworkModel net;
  net.transition[0] = {0.5, 0.5, 0.5};
  EXPECT_THROW(build_mdp(DeviceProfile{}, net, CostModel{}, {0.5, 0.25, 0.25}), devassist::InvalidArgument);
  EXPECT_THROW(build_mdp(DeviceProfile{}, NetworkModel{}, CostModel{}, {0.5, 0.25, 0.3}),
               devassist::InvalidArgument);
  CostModel cost;
  cost.discount_gamma = 1.0;
  EXPECT_THROW(build_mdp(DeviceProfile{}, NetworkModel{}, cost, {0.5, 0.25, 0.25}), devassist::InvalidArgument);
}

TEST(BuildMdp, DefaultCloudEnergyIsEdgeTimesRatio) {
  const DeviceProfile dev;
  const NetworkModel net;
  for (size_t c = 0; c < kComplexityCount; ++c) {
    EXPECT_NEAR(net.cloud_energy_units[c], 3.8 * dev.edge_energy_units[c], 1e-12);
  }
}

TEST(CostBreakdown, MatchesPublishedAnchors) {
  const auto mdp = default_mdp();
  const auto cloud = expected_cost_breakdown(mdp, st(Complexity::High, DeviceClass::CpuOnly, NetworkState::Good),
                                             Action::Cloud);
  EXPECT_DOUBLE_EQ(cloud.latency_ms, 2400.0 + 600.0);
  EXPECT_DOUBLE_EQ(cloud.accuracy_loss, 0.0);
  const auto edge = expected_cost_breakdown(mdp, st(Complexity::High, DeviceClass::Gpu, NetworkState::Degraded),
                                            Action::Edge);
  EXPECT_DOUBLE_EQ(edge.accuracy_loss, 0.29);
  const auto degraded = expected_cost_breakdown(
      mdp, st(Complexity::Low, DeviceClass::Gpu, NetworkState::Degraded), Action::Cloud);
  EXPECT_DOUBLE_EQ(degraded.latency_ms, 3 * 2400.0 + 100.0);
}

TEST(CostBreakdown, EdgeLatencyIgnoresNetwork) {
  const auto mdp = default_mdp();
  for (size_t c = 0; c < 3; ++c)
    for (size_t d = 0; d < 2; ++d) {
      const auto base = static_cast<Complexity>(c);
      const auto dev = static_cast<DeviceClass>(d);
      const double good = expected_cost_breakdown(mdp, st(base, dev, NetworkState::Good), Action::Edge).latency_ms;
      for (auto n : {NetworkState::Degraded, NetworkState::Offline}) {
        EXPECT_EQ(expected_cost_breakdown(mdp, st(base, dev, n), Action::Edge).latency_ms, good);
      }
    }
}

TEST(CostBreakdown, ReconstructsReward) {
  const CostModel cost;
  const auto mdp = default_mdp(cost);
  for (size_t s = 0; s < kStateCount; ++s) {
    for (Action a : {Action::Edge, Action::Cloud}) {
      if (!mdp.is_legal(s, a)) continue;
      const auto b = expected_cost_breakdown(mdp, state_from_index(s), a);
      const double r = -(cost.w_latency * b.latency_ms + cost.w_energy * b.energy_units +
                         cost.w_accuracy * b.accuracy_loss);
      EXPECT_DOUBLE_EQ(mdp.reward(s, a), r);
    }
  }
}

TEST(CostBreakdown, MaskedActionThrows) {
  const auto mdp = default_mdp();
  EXPECT_THROW(expected_cost_breakdown(mdp, st(Complexity::Low, DeviceClass::Gpu, NetworkState::Offline),
                                       Action::Cloud),
               MaskedActionError);
}

TEST(ValueIteration, DefaultRoutingSplit) {
  const auto policy = value_iteration(default_mdp(), 1e-8);
  EXPECT_EQ(policy.route(st(Complexity::Low, DeviceClass::CpuOnly, NetworkState::Good)), Action::Edge);
  EXPECT_EQ(policy.route(st(Complexity::High, DeviceClass::CpuOnly, NetworkState::Good)), Action::Cloud);
  for (size_t s = 0; s < kStateCount; ++s) {
    if (state_from_index(s).network == NetworkState::Offline) {
      EXPECT_EQ(policy.action[s], Action::Edge);
    }
  }
  EXPECT_LE(policy.residual, 1e-8);
}

TEST(ValueIteration, DeltasNonIncreasing) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto policy = value_iteration(testsupport::random_mdp(rng, 0.9), 1e-10);
    ASSERT_FALSE(policy.deltas.empty());
    for (size_t i = 1; i < policy.deltas.size(); ++i) {
      EXPECT_LE(policy.deltas[i], policy.deltas[i - 1] * (1.0 + 1e-12) + 1e-15);
    }
    EXPECT_EQ(policy.residual, policy.deltas.back());
  }
}

TEST(ValueIteration, PolicyIsAlwaysLegal) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mdp = testsupport::random_mdp(rng, 0.9);
    const auto policy = value_iteration(mdp, 1e-8);
    for (size_t s = 0; s < kStateCount; ++s) EXPECT_TRUE(mdp.is_legal(s, policy.action[s]));
  }
}

TEST(ValueIteration, GammaZeroIsGreedy) {
  CostModel cost;
  cost.discount_gamma = 0.0;
  const auto mdp = default_mdp(cost);
  const auto policy = value_iteration(mdp, 1e-8);
  for (size_t s = 0; s < kStateCount; ++s) {
    Action best = Action::Edge;
    if (mdp.is_legal(s, Action::Cloud) && mdp.reward(s, Action::Cloud) > mdp.reward(s, Action::Edge)) {
      best = Action::Cloud;
    }
    EXPECT_EQ(policy.action[s], best);
  }
}

TEST(ValueIteration, TiesGoToEdge) {
  MdpModel::RewardTable rewards{};
  MdpModel::LegalTable legal{};
  MdpModel::TransitionTable transitions(kStateCount * kActionCount * kStateCount, 0.0);
  for (size_t s = 0; s < kStateCount; ++s) {
    rewards[s] = {-1.0, -1.0};
    legal[s] = {true, true};
    for (size_t a = 0; a < kActionCount; ++a) transitions[(s * kActionCount + a) * kStateCount + s] = 1.0;
  }
  const auto policy = value_iteration(MdpModel::from_tables(rewards, transitions, legal, 0.9), 1e-8);
  for (auto a : policy.action) EXPECT_EQ(a, Action::Edge);
}

TEST(ValueIteration, MatchesExpectimaxOracleOnDefaultModel) {
  const auto mdp = default_mdp();
  double r_max = 0.0;
  for (size_t s = 0; s < kStateCount; ++s)
    for (Action a : {Action::Edge, Action::Cloud})
      if (mdp.is_legal(s, a)) r_max = std::max(r_max, std::abs(mdp.reward(s, a)));
  const size_t h = testsupport::horizon_for(mdp.gamma(), r_max, 1e-7);
  testsupport::ExpectimaxOracle oracle(mdp);
  const auto policy = value_iteration(mdp, 1e-8);
  for (size_t s = 0; s < kStateCount; ++s) EXPECT_NEAR(policy.value[s], oracle.value(h, s), 1e-6);
}

TEST(ValueIteration, MatchesExpectimaxOracleOnRandomModels) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const auto mdp = testsupport::random_mdp(rng, 0.9);
    const size_t h = testsupport::horizon_for(0.9, 10.0, 1e-7);
    testsupport::ExpectimaxOracle oracle(mdp);
    const auto policy = value_iteration(mdp, 1e-9);
    for (size_t s = 0; s < kStateCount; ++s) EXPECT_NEAR(policy.value[s], oracle.value(h, s), 1e-6);
  }
}

TEST(ValueIteration, ScaleCovariance) {
  const auto base = value_iteration(default_mdp(), 1e-10);
  for (double k : {0.5, 3.0, 17.0}) {
    CostModel cost;
    cost.w_latency *= k;
    cost.w_energy *= k;
    cost.w_accuracy *= k;
    EXPECT_EQ(value_iteration(default_mdp(cost), 1e-10 * k).action, base.action) << "scale " << k;
  }
}

TEST(ValueIteration, Deterministic) {
  EXPECT_EQ(value_iteration(default_mdp(), 1e-8), value_iteration(default_mdp(), 1e-8));
}

TEST(PolicyJson, RoundTrip) {
  const auto policy = value_iteration(default_mdp(), 1e-8);
  const auto doc = policy_to_json(policy, "abc123");
  EXPECT_EQ(doc.at("states").size(), kStateCount);
  std::string hash;
  const auto back = policy_from_json(doc, &hash);
  EXPECT_EQ(hash, "abc123");
  EXPECT_EQ(back.action, policy.action);
  EXPECT_EQ(back.value, policy.value);
  EXPECT_EQ(back.residual, policy.residual);
}
