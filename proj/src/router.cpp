#include "devassist/router.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace devassist::router {

namespace {

constexpr double kStochasticTolerance = 1e-9;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

void check_distribution(std::span<const double> p, const std::string& what) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument(what + ": negative or non-finite probability");
    sum += x;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    throw InvalidArgument(what + ": probabilities sum to " + std::to_string(sum) + ", expected 1");
  }
}

size_t idx(auto e) { return static_cast<size_t>(e); }

}  // namespace

std::string_view to_string(TaskKind v) {
  switch (v) {
    case TaskKind::SyntaxFix: return "syntax_fix";
    case TaskKind::Completion: return "completion";
    case TaskKind::Refactor: return "refactor";
    case TaskKind::CrashAnalysis: return "crash_analysis";
  }
  return "?";
}

std::string_view to_string(Complexity v) {
  switch (v) {
    case Complexity::Low: return "low";
    case Complexity::Medium: return "medium";
    case Complexity::High: return "high";
  }
  return "?";
}

std::string_view to_string(DeviceClass v) { return v == DeviceClass::Gpu ? "gpu" : "cpu_only"; }

std::string_view to_string(NetworkState v) {
  switch (v) {
    case NetworkState::Good: return "good";
    case NetworkState::Degraded: return "degraded";
    case NetworkState::Offline: return "offline";
  }
  return "?";
}

std::string_view to_string(Battery v) { return v == Battery::Ok ? "ok" : "low"; }

std::string_view to_string(Action v) { return v == Action::Cloud ? "cloud" : "edge"; }

Complexity parse_complexity(std::string_view s) {
  const auto v = lower(s);
  if (v == "low") return Complexity::Low;
  if (v == "medium") return Complexity::Medium;
  if (v == "high") return Complexity::High;
  throw InvalidArgument("unknown complexity '" + std::string(s) + "'");
}

DeviceClass parse_device(std::string_view s) {
  const auto v = lower(s);
  if (v == "cpu" || v == "cpu_only" || v == "cpuonly") return DeviceClass::CpuOnly;
  if (v == "gpu") return DeviceClass::Gpu;
  throw InvalidArgument("unknown device class '" + std::string(s) + "'");
}

NetworkState parse_network(std::string_view s) {
  const auto v = lower(s);
  if (v == "good") return NetworkState::Good;
  if (v == "degraded") return NetworkState::Degraded;
  if (v == "offline") return NetworkState::Offline;
  throw InvalidArgument("unknown network state '" + std::string(s) + "'");
}

Battery parse_battery(std::string_view s) {
  const auto v = lower(s);
  if (v == "ok" || v == "ok_battery") return Battery::Ok;
  if (v == "low" || v == "low_battery") return Battery::Low;
  throw InvalidArgument("unknown battery state '" + std::string(s) + "'");
}

TaskKind parse_task_kind(std::string_view s) {
  const auto v = lower(s);
  if (v == "syntax_fix") return TaskKind::SyntaxFix;
  if (v == "completion") return TaskKind::Completion;
  if (v == "refactor") return TaskKind::Refactor;
  if (v == "crash_analysis") return TaskKind::CrashAnalysis;
  throw InvalidArgument("unknown task kind '" + std::string(s) + "'");
}

TaskFeatures featurize_task(const TaskDescriptor& task) {
  if (task.kind == TaskKind::CrashAnalysis) return {Complexity::High};
  if (task.cross_file_deps >= 5 || task.files_touched >= 10) return {Complexity::High};
  if (task.cross_file_deps >= 1 || task.token_length >= 2000) return {Complexity::Medium};
  return {Complexity::Low};
}

double DeviceProfile::edge_latency_ms(Complexity c, DeviceClass device) const {
  const double base = edge_base_latency_ms[idx(c)];
  return device == DeviceClass::CpuOnly ? base * cpu_latency_multiplier : base;
}

void DeviceProfile::validate() const {
  for (size_t c = 0; c < kComplexityCount; ++c) {
    if (!(edge_base_latency_ms[c] > 0.0)) throw InvalidArgument("device: edge latency must be positive");
    if (!(edge_energy_units[c] >= 0.0)) throw InvalidArgument("device: edge energy must be non-negative");
    if (!(edge_accuracy_loss[c] >= 0.0 && edge_accuracy_loss[c] <= 1.0)) {
      throw InvalidArgument("device: accuracy loss must lie in [0, 1]");
    }
  }
  if (!(cpu_latency_multiplier > 0.0)) throw InvalidArgument("device: cpu latency multiplier must be positive");
  if (!(battery_drain_probability >= 0.0 && battery_drain_probability <= 1.0)) {
    throw InvalidArgument("device: battery drain probability must lie in [0, 1]");
  }
}

double NetworkModel::rtt(NetworkState s) const {
  if (s == NetworkState::Offline) throw InvalidArgument("network: offline has no round trip time");
  return rtt_ms[idx(s)];
}

void NetworkModel::validate() const {
  for (size_t r = 0; r < kNetworkCount; ++r) {
    check_distribution(transition[r], "network transition row " + std::to_string(r));
  }
  for (double rtt : rtt_ms) {
    if (!(rtt > 0.0)) throw InvalidArgument("network: rtt must be positive");
  }
  for (size_t c = 0; c < kComplexityCount; ++c) {
    if (!(cloud_compute_ms[c] >= 0.0)) throw InvalidArgument("network: cloud compute must be non-negative");
    if (!(cloud_energy_units[c] >= 0.0)) throw InvalidArgument("network: cloud energy must be non-negative");
  }
}

void CostModel::validate() const {
  if (!(w_latency >= 0.0 && w_energy >= 0.0 && w_accuracy >= 0.0)) {
    throw InvalidArgument("cost: weights must be non-negative");
  }
  if (!(discount_gamma >= 0.0 && discount_gamma < 1.0)) throw InvalidArgument("cost: gamma must lie in [0, 1)");
}

RoutingState state_from_index(size_t index) {
  if (index >= kStateCount) throw InvalidArgument("state index out of range");
  RoutingState s;
  s.battery = static_cast<Battery>(index % kBatteryCount);
  index /= kBatteryCount;
  s.network = static_cast<NetworkState>(index % kNetworkCount);
  index /= kNetworkCount;
  s.device = static_cast<DeviceClass>(index % kDeviceCount);
  index /= kDeviceCount;
  s.complexity = static_cast<Complexity>(index);
  return s;
}

MdpModel MdpModel::from_tables(RewardTable rewards, TransitionTable transitions, LegalTable legal, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("mdp: gamma must lie in [0, 1)");
  if (transitions.size() != kStateCount * kActionCount * kStateCount) {
    throw InvalidArgument("mdp: transition table has wrong size");
  }
  for (size_t s = 0; s < kStateCount; ++s) {
    bool any = false;
    for (size_t a = 0; a < kActionCount; ++a) {
      if (!legal[s][a]) continue;
      any = true;
      if (!std::isfinite(rewards[s][a])) throw InvalidArgument("mdp: reward must be finite");
      check_distribution({transitions.data() + (s * kActionCount + a) * kStateCount, kStateCount},
                         "mdp transition (" + std::to_string(s) + "," + std::to_string(a) + ")");
    }
    if (!any) throw InvalidArgument("mdp: state " + std::to_string(s) + " has no legal action");
  }
  MdpModel m;
  m.rewards_ = rewards;
  m.transitions_ = std::move(transitions);
  m.legal_ = legal;
  m.gamma_ = gamma;
  return m;
}

CostBreakdown action_cost(const DeviceProfile& device, const NetworkModel& network, const RoutingState& state,
                          Action action) {
  const size_t c = idx(state.complexity);
  if (action == Action::Edge) {
    return {device.edge_latency_ms(state.complexity, state.device), device.edge_energy_units[c],
            device.edge_accuracy_loss[c]};
  }
  return {network.rtt(state.network) + network.cloud_compute_ms[c], network.cloud_energy_units[c], 0.0};
}

double max_task_energy(const DeviceProfile& device, const NetworkModel& network) {
  double max_energy = 0.0;
  for (size_t c = 0; c < kComplexityCount; ++c) {
    max_energy = std::max({max_energy, device.edge_energy_units[c], network.cloud_energy_units[c]});
  }
  return max_energy;
}

MdpModel build_mdp(const DeviceProfile& device, const NetworkModel& network, const CostModel& cost,
                   const PerComplexity& workload_mix) {
  device.validate();
  network.validate();
  cost.validate();
  check_distribution(workload_mix, "workload mix");

  const double max_energy = max_task_energy(device, network);

  MdpModel m;
  m.cost_ = cost;
  m.gamma_ = cost.discount_gamma;
  m.transitions_.assign(kStateCount * kActionCount * kStateCount, 0.0);

  for (size_t s = 0; s < kStateCount; ++s) {
    const RoutingState st = state_from_index(s);
    for (Action a : {Action::Edge, Action::Cloud}) {
      const size_t ai = idx(a);
      const bool legal = a == Action::Edge || st.network != NetworkState::Offline;
      m.legal_[s][ai] = legal;
      if (!legal) continue;

      const CostBreakdown comp = action_cost(device, network, st, a);
      m.components_[s][ai] = comp;
      m.rewards_[s][ai] = -(cost.w_latency * comp.latency_ms + cost.w_energy * comp.energy_units +
                            cost.w_accuracy * comp.accuracy_loss);

      const double drain = st.battery == Battery::Low
                               ? 1.0
                               : (max_energy > 0.0 ? device.battery_drain_probability * comp.energy_units / max_energy
                                                   : 0.0);
      double* row = m.transitions_.data() + (s * kActionCount + ai) * kStateCount;
      for (size_t nc = 0; nc < kComplexityCount; ++nc) {
        for (size_t nn = 0; nn < kNetworkCount; ++nn) {
          const double p = workload_mix[nc] * network.transition[idx(st.network)][nn];
          if (p == 0.0) continue;
          RoutingState next{static_cast<Complexity>(nc), st.device, static_cast<NetworkState>(nn), Battery::Low};
          row[state_index(next)] += p * drain;
          next.battery = Battery::Ok;
          row[state_index(next)] += p * (1.0 - drain);
        }
      }
    }
  }
  return m;
}

RoutingPolicy value_iteration(const MdpModel& mdp, double tolerance) {
  if (!(tolerance > 0.0)) throw InvalidArgument("value_iteration: tolerance must be positive");
  const double gamma = mdp.gamma();
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("value_iteration: gamma must lie in [0, 1)");

  RoutingPolicy policy;
  std::array<double, kStateCount> v{};
  std::array<double, kStateCount> next{};

  auto q_value = [&](size_t s, Action a, const std::array<double, kStateCount>& values) {
    const auto row = mdp.transition(s, a);
    double expected = 0.0;
    for (size_t t = 0; t < kStateCount; ++t) expected += row[t] * values[t];
    return mdp.reward(s, a) + gamma * expected;
  };

  // Greedy step with Edge-preferring tie-break; returns the chosen action.
  auto backup = [&](size_t s, const std::array<double, kStateCount>& values, double& best) {
    Action choice = Action::Edge;
    bool have = false;
    for (Action a : {Action::Edge, Action::Cloud}) {
      if (!mdp.is_legal(s, a)) continue;
      const double q = q_value(s, a, values);
      if (!have || q > best) {
        best = q;
        choice = a;
        have = true;
      }
    }
    return choice;
  };

  for (;;) {
    double delta = 0.0;
    for (size_t s = 0; s < kStateCount; ++s) {
      double best = 0.0;
      backup(s, v, best);
      next[s] = best;
      delta = std::max(delta, std::abs(best - v[s]));
    }
    v = next;
    ++policy.iterations;
    policy.deltas.push_back(delta);
    if (delta <= tolerance) {
      policy.residual = delta;
      break;
    }
  }

  for (size_t s = 0; s < kStateCount; ++s) {
    double best = 0.0;
    policy.action[s] = backup(s, v, best);
  }
  policy.value = v;
  return policy;
}

CostBreakdown expected_cost_breakdown(const MdpModel& mdp, const RoutingState& state, Action action) {
  const size_t s = state_index(state);
  if (!mdp.is_legal(s, action)) {
    throw MaskedActionError("action '" + std::string(to_string(action)) + "' is masked in network state '" +
                            std::string(to_string(state.network)) + "'");
  }
  return mdp.components(s, action);
}

nlohmann::json policy_to_json(const RoutingPolicy& policy, std::string_view config_hash) {
  nlohmann::json states = nlohmann::json::array();
  for (size_t s = 0; s < kStateCount; ++s) {
    const RoutingState st = state_from_index(s);
    states.push_back({{"complexity", to_string(st.complexity)},
                      {"device", to_string(st.device)},
                      {"network", to_string(st.network)},
                      {"battery", to_string(st.battery)},
                      {"action", to_string(policy.action[s])},
                      {"value", policy.value[s]}});
  }
  return {{"config_hash", std::string(config_hash)},
          {"states", std::move(states)},
          {"residual", policy.residual},
          {"iterations", policy.iterations}};
}

RoutingPolicy policy_from_json(const nlohmann::json& doc, std::string* config_hash) {
  try {
    RoutingPolicy policy;
    const auto& states = doc.at("states");
    if (!states.is_array() || states.size() != kStateCount) {
      throw InvalidArgument("policy: expected " + std::to_string(kStateCount) + " states");
    }
    std::array<bool, kStateCount> seen{};
    for (const auto& entry : states) {
      const RoutingState st{parse_complexity(entry.at("complexity").get<std::string>()),
                            parse_device(entry.at("device").get<std::string>()),
                            parse_network(entry.at("network").get<std::string>()),
                            parse_battery(entry.at("battery").get<std::string>())};
      const size_t s = state_index(st);
      if (seen[s]) throw InvalidArgument("policy: duplicate state entry");
      seen[s] = true;
      const auto action = entry.at("action").get<std::string>();
      if (action == "edge") {
        policy.action[s] = Action::Edge;
      } else if (action == "cloud") {
        if (st.network == NetworkState::Offline) throw InvalidArgument("policy: cloud action for offline state");
        policy.action[s] = Action::Cloud;
      } else {
        throw InvalidArgument("policy: unknown action '" + action + "'");
      }
      policy.value[s] = entry.at("value").get<double>();
    }
    policy.residual = doc.at("residual").get<double>();
    policy.iterations = doc.value("iterations", size_t{0});
    if (config_hash) *config_hash = doc.at("config_hash").get<std::string>();
    return policy;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("policy: malformed document: ") + e.what());
  }
}

}  // namespace devassist::router
