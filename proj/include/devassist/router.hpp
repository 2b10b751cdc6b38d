#pragma once

// Edge/cloud routing as a finite discounted MDP.
//
// State space is the product complexity x device class x network x battery
// (3 x 2 x 3 x 2 = 36 states), two actions (Edge, Cloud). Cloud is masked
// out whenever the network is Offline. The solved policy is a dense table
// indexed by state_index().

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "devassist/common.hpp"

namespace devassist::router {

enum class TaskKind : uint8_t { SyntaxFix, Completion, Refactor, CrashAnalysis };
enum class Complexity : uint8_t { Low, Medium, High };
enum class DeviceClass : uint8_t { CpuOnly, Gpu };
enum class NetworkState : uint8_t { Good, Degraded, Offline };
enum class Battery : uint8_t { Low, Ok };
enum class Action : uint8_t { Edge, Cloud };

inline constexpr size_t kComplexityCount = 3;
inline constexpr size_t kDeviceCount = 2;
inline constexpr size_t kNetworkCount = 3;
inline constexpr size_t kBatteryCount = 2;
inline constexpr size_t kStateCount = kComplexityCount * kDeviceCount * kNetworkCount * kBatteryCount;
inline constexpr size_t kActionCount = 2;

using PerComplexity = std::array<double, kComplexityCount>;

std::string_view to_string(TaskKind v);
std::string_view to_string(Complexity v);
std::string_view to_string(DeviceClass v);
std::string_view to_string(NetworkState v);
std::string_view to_string(Battery v);
std::string_view to_string(Action v);

// Case-insensitive; accepts the short CLI spellings ("cpu", "gpu", "ok").
Complexity parse_complexity(std::string_view s);
DeviceClass parse_device(std::string_view s);
NetworkState parse_network(std::string_view s);
Battery parse_battery(std::string_view s);
TaskKind parse_task_kind(std::string_view s);

struct TaskDescriptor {
  TaskKind kind = TaskKind::SyntaxFix;
  uint32_t files_touched = 0;
  uint32_t cross_file_deps = 0;
  uint32_t token_length = 0;
};

struct TaskFeatures {
  Complexity complexity = Complexity::Low;
};

TaskFeatures featurize_task(const TaskDescriptor& task);

struct DeviceProfile {
  DeviceClass device_class = DeviceClass::CpuOnly;
  Battery battery = Battery::Ok;
  // Latency on a GPU device; CPU-only devices are slower by cpu_latency_multiplier.
  PerComplexity edge_base_latency_ms{150.0, 400.0, 1200.0};
  double cpu_latency_multiplier = 2.0;
  PerComplexity edge_energy_units{1.0, 2.5, 6.0};
  PerComplexity edge_accuracy_loss{0.0, 0.05, 0.29};
  // Probability scale for Ok -> Low battery per task.
  double battery_drain_probability = 0.05;

  double edge_latency_ms(Complexity c, DeviceClass device) const;
  void validate() const;
};

struct NetworkModel {
  using Matrix = std::array<std::array<double, kNetworkCount>, kNetworkCount>;

  NetworkState initial = NetworkState::Good;
  Matrix transition{{{0.90, 0.08, 0.02}, {0.30, 0.65, 0.05}, {0.50, 0.20, 0.30}}};
  // Indexed by NetworkState::Good / Degraded; Offline has no round trip.
  std::array<double, 2> rtt_ms{2400.0, 7200.0};
  PerComplexity cloud_compute_ms{100.0, 250.0, 600.0};
  PerComplexity cloud_energy_units{3.8 * 1.0, 3.8 * 2.5, 3.8 * 6.0};

  double rtt(NetworkState s) const;
  void validate() const;
};

struct CostModel {
  double w_latency = 0.001;  // per ms
  double w_energy = 0.1;     // per energy unit
  double w_accuracy = 10.0;  // per unit accuracy loss
  double discount_gamma = 0.95;

  void validate() const;
};

struct RoutingState {
  Complexity complexity = Complexity::Low;
  DeviceClass device = DeviceClass::CpuOnly;
  NetworkState network = NetworkState::Good;
  Battery battery = Battery::Ok;

  bool operator==(const RoutingState&) const = default;
};

constexpr size_t state_index(const RoutingState& s) noexcept {
  return ((static_cast<size_t>(s.complexity) * kDeviceCount + static_cast<size_t>(s.device)) * kNetworkCount +
          static_cast<size_t>(s.network)) *
             kBatteryCount +
         static_cast<size_t>(s.battery);
}

RoutingState state_from_index(size_t index);

struct CostBreakdown {
  double latency_ms = 0.0;
  double energy_units = 0.0;
  double accuracy_loss = 0.0;
};

class MaskedActionError : public Error {
 public:
  using Error::Error;
};

class MdpModel {
 public:
  using RewardTable = std::array<std::array<double, kActionCount>, kStateCount>;
  using LegalTable = std::array<std::array<bool, kActionCount>, kStateCount>;
  // Row (s * kActionCount + a) holds P(. | s, a).
  using TransitionTable = std::vector<double>;

  // Generic construction from explicit tables; validates stochasticity and
  // that every state has at least one legal action.
  static MdpModel from_tables(RewardTable rewards, TransitionTable transitions, LegalTable legal,
                              double gamma);

  double reward(size_t s, Action a) const { return rewards_[s][static_cast<size_t>(a)]; }
  std::span<const double> transition(size_t s, Action a) const {
    return {transitions_.data() + (s * kActionCount + static_cast<size_t>(a)) * kStateCount, kStateCount};
  }
  bool is_legal(size_t s, Action a) const { return legal_[s][static_cast<size_t>(a)]; }
  double gamma() const { return gamma_; }

  // Unweighted cost components; only populated for models made by build_mdp.
  const CostBreakdown& components(size_t s, Action a) const { return components_[s][static_cast<size_t>(a)]; }
  const CostModel& cost() const { return cost_; }

 private:
  friend MdpModel build_mdp(const DeviceProfile&, const NetworkModel&, const CostModel&, const PerComplexity&);

  RewardTable rewards_{};
  TransitionTable transitions_;
  LegalTable legal_{};
  std::array<std::array<CostBreakdown, kActionCount>, kStateCount> components_{};
  CostModel cost_{};
  double gamma_ = 0.0;
};

// Unweighted cost of running a task in `state` with `action`. Cloud while
// Offline is not a cost the model can express; callers handle it.
CostBreakdown action_cost(const DeviceProfile& device, const NetworkModel& network, const RoutingState& state,
                          Action action);

// Reward scale for battery drain: the largest per-task energy of any action.
double max_task_energy(const DeviceProfile& device, const NetworkModel& network);

// workload_mix is the i.i.d. distribution the next task's complexity is drawn from.
MdpModel build_mdp(const DeviceProfile& device, const NetworkModel& network, const CostModel& cost,
                   const PerComplexity& workload_mix);

struct RoutingPolicy {
  std::array<Action, kStateCount> action{};
  std::array<double, kStateCount> value{};
  double residual = 0.0;
  size_t iterations = 0;
  // Sup-norm delta of every sweep, in order.
  std::vector<double> deltas;

  Action route(const RoutingState& s) const { return action[state_index(s)]; }

  bool operator==(const RoutingPolicy&) const = default;
};

// Bellman iteration from V = 0 until the sup-norm delta is <= tolerance.
// Ties between actions go to Edge.
RoutingPolicy value_iteration(const MdpModel& mdp, double tolerance);

inline Action route(const RoutingPolicy& policy, const RoutingState& state) { return policy.route(state); }

// Throws MaskedActionError when the action is not legal in the state.
CostBreakdown expected_cost_breakdown(const MdpModel& mdp, const RoutingState& state, Action action);

nlohmann::json policy_to_json(const RoutingPolicy& policy, std::string_view config_hash);
// Returns the policy and stores the embedded config hash in *config_hash when non-null.
RoutingPolicy policy_from_json(const nlohmann::json& doc, std::string* config_hash = nullptr);

}  // namespace devassist::router
