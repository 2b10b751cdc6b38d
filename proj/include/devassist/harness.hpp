#pragma once

// Synthetic workloads and a seeded discrete-event simulation that replays a
// task stream against one routing policy under a Markov network trace.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "devassist/router.hpp"

namespace devassist::harness {

inline constexpr size_t kTaskKindCount = 4;

// Inclusive [lo, hi] ranges for a task kind's descriptor fields.
struct KindRanges {
  std::array<uint32_t, 2> files{1, 1};
  std::array<uint32_t, 2> deps{0, 0};
  std::array<uint32_t, 2> tokens{20, 400};
};

struct WorkloadConfig {
  // Indexed by router::TaskKind.
  std::array<double, kTaskKindCount> mix{0.40, 0.25, 0.15, 0.20};
  std::array<KindRanges, kTaskKindCount> ranges{{
      {{1, 1}, {0, 0}, {20, 400}},      // syntax_fix
      {{1, 3}, {0, 2}, {50, 2500}},     // completion
      {{2, 15}, {1, 8}, {500, 4000}},   // refactor
      {{1, 5}, {0, 3}, {300, 3000}},    // crash_analysis
  }};
  double inter_arrival_mean_s = 30.0;

  void validate() const;
};

enum class PolicyKind : uint8_t { AllCloud, AllEdge, Threshold, Mdp };

std::string_view to_string(PolicyKind p);
PolicyKind parse_policy(std::string_view s);

struct SimConfig {
  size_t n_tasks = 10'000;
  uint64_t seed = 42;
  WorkloadConfig workload;
  router::DeviceProfile device;
  router::NetworkModel network;
  router::CostModel cost;
  // Complexity distribution the MDP assumes for the next task.
  router::PerComplexity complexity_mix{0.50, 0.25, 0.25};
  double vi_tolerance = 1e-8;
  PolicyKind policy = PolicyKind::Mdp;
  // Threshold policy: cloud when complexity >= threshold and the network is up.
  router::Complexity threshold = router::Complexity::High;
  // Latency charged to a cloud attempt made while offline.
  double offline_timeout_ms = 10'000.0;
  // Latency strictly below this counts as a sub-second response.
  double sub_second_ms = 1000.0;

  void validate() const;
};

struct Task {
  size_t id = 0;
  double arrival_s = 0.0;
  router::TaskDescriptor descriptor;
};

struct Workload {
  uint64_t seed = 0;
  std::vector<Task> tasks;
};

Workload generate_workload(const SimConfig& config);

struct Event {
  size_t task_id = 0;
  double arrival_s = 0.0;
  router::TaskKind kind = router::TaskKind::SyntaxFix;
  router::Complexity complexity = router::Complexity::Low;
  router::NetworkState network = router::NetworkState::Good;
  router::Battery battery = router::Battery::Ok;
  router::Action action = router::Action::Edge;
  bool failed = false;
  double latency_ms = 0.0;
  double energy_units = 0.0;
  double accuracy_loss = 0.0;
};

struct MetricsReport {
  size_t n_tasks = 0;
  size_t failed_tasks = 0;
  double median_latency_ms = 0.0;
  double p95_latency_ms = 0.0;  // nearest rank
  double sub_second_fraction = 0.0;
  double cloud_call_fraction = 0.0;  // cloud attempts, including failed ones
  double total_energy_units = 0.0;
  double mean_accuracy_loss = 0.0;
};

MetricsReport aggregate(const std::vector<Event>& events, double sub_second_ms = 1000.0);

struct SimulationResult {
  PolicyKind policy = PolicyKind::Mdp;
  MetricsReport metrics;
  std::vector<Event> events;
};

// For PolicyKind::Mdp the policy is solved from the config unless one is given.
SimulationResult run_simulation(const Workload& workload, const SimConfig& config,
                                const router::RoutingPolicy* policy = nullptr);

struct ComparisonReport {
  uint64_t seed = 0;
  std::vector<SimulationResult> results;  // results[0] is the baseline for deltas
};

// Every config must share the workload's seed; otherwise the comparison
// would not be paired.
ComparisonReport compare_policies(const Workload& workload, const std::vector<SimConfig>& configs);

nlohmann::json metrics_to_json(const MetricsReport& m);
nlohmann::json comparison_to_json(const ComparisonReport& report, std::string_view config_hash);
std::string comparison_to_csv(const ComparisonReport& report);

}  // namespace devassist::harness
