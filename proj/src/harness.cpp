#include "devassist/harness.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>

namespace devassist::harness {

using router::Action;
using router::Battery;
using router::NetworkState;

namespace {

size_t draw_categorical(Rng& rng, std::span<const double> weights) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  // Rounding left u above the running sum; take the last nonzero bucket.
  for (size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return 0;
}

void check_mix(std::span<const double> mix, const char* what) {
  double sum = 0.0;
  for (double p : mix) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument(std::string(what) + ": negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument(std::string(what) + ": probabilities must sum to 1");
}

Action choose(const SimConfig& config, const router::RoutingPolicy* policy, const router::RoutingState& state) {
  switch (config.policy) {
    case PolicyKind::AllCloud: return Action::Cloud;
    case PolicyKind::AllEdge: return Action::Edge;
    case PolicyKind::Threshold:
      return state.network != NetworkState::Offline && state.complexity >= config.threshold ? Action::Cloud
                                                                                            : Action::Edge;
    case PolicyKind::Mdp: return policy->route(state);
  }
  return Action::Edge;
}

}  // namespace

void WorkloadConfig::validate() const {
  check_mix(mix, "workload mix");
  for (const auto& r : ranges) {
    if (r.files[0] > r.files[1] || r.deps[0] > r.deps[1] || r.tokens[0] > r.tokens[1]) {
      throw InvalidArgument("workload: range lower bound exceeds upper bound");
    }
  }
  if (!(inter_arrival_mean_s > 0.0)) throw InvalidArgument("workload: inter-arrival mean must be positive");
}

std::string_view to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::AllCloud: return "all_cloud";
    case PolicyKind::AllEdge: return "all_edge";
    case PolicyKind::Threshold: return "threshold";
    case PolicyKind::Mdp: return "mdp";
  }
  return "?";
}

PolicyKind parse_policy(std::string_view s) {
  if (s == "all_cloud") return PolicyKind::AllCloud;
  if (s == "all_edge") return PolicyKind::AllEdge;
  if (s == "threshold") return PolicyKind::Threshold;
  if (s == "mdp") return PolicyKind::Mdp;
  throw InvalidArgument("unknown policy '" + std::string(s) + "'");
}

void SimConfig::validate() const {
  workload.validate();
  device.validate();
  network.validate();
  cost.validate();
  check_mix(complexity_mix, "complexity mix");
  if (!(vi_tolerance > 0.0)) throw InvalidArgument("simulation: value iteration tolerance must be positive");
  if (!(offline_timeout_ms >= 0.0)) throw InvalidArgument("simulation: offline timeout must be non-negative");
  if (!(sub_second_ms > 0.0)) throw InvalidArgument("simulation: sub-second threshold must be positive");
}

Workload generate_workload(const SimConfig& config) {
  config.workload.validate();
  Workload w;
  w.seed = config.seed;
  w.tasks.reserve(config.n_tasks);
  Rng rng(derive_seed(config.seed, "workload"));
  double clock = 0.0;
  for (size_t i = 0; i < config.n_tasks; ++i) {
    clock += rng.exponential(config.workload.inter_arrival_mean_s);
    const size_t kind = draw_categorical(rng, config.workload.mix);
    const auto& r = config.workload.ranges[kind];
    Task t;
    t.id = i;
    t.arrival_s = clock;
    t.descriptor.kind = static_cast<router::TaskKind>(kind);
    t.descriptor.files_touched = static_cast<uint32_t>(rng.uniform_int(r.files[0], r.files[1]));
    t.descriptor.cross_file_deps = static_cast<uint32_t>(rng.uniform_int(r.deps[0], r.deps[1]));
    t.descriptor.token_length = static_cast<uint32_t>(rng.uniform_int(r.tokens[0], r.tokens[1]));
    w.tasks.push_back(t);
  }
  return w;
}

MetricsReport aggregate(const std::vector<Event>& events, double sub_second_ms) {
  MetricsReport m;
  m.n_tasks = events.size();
  if (events.empty()) return m;

  std::vector<double> latencies;
  latencies.reserve(events.size());
  size_t sub_second = 0, cloud = 0;
  double accuracy = 0.0;
  for (const auto& e : events) {
    latencies.push_back(e.latency_ms);
    if (e.latency_ms < sub_second_ms) ++sub_second;
    if (e.action == Action::Cloud) ++cloud;
    if (e.failed) ++m.failed_tasks;
    m.total_energy_units += e.energy_units;
    accuracy += e.accuracy_loss;
  }
  std::sort(latencies.begin(), latencies.end());
  const size_t n = latencies.size();
  m.median_latency_ms = n % 2 == 1 ? latencies[n / 2] : 0.5 * (latencies[n / 2 - 1] + latencies[n / 2]);
  const auto rank = static_cast<size_t>(std::ceil(0.95 * static_cast<double>(n)));
  m.p95_latency_ms = latencies[std::max<size_t>(rank, 1) - 1];
  m.sub_second_fraction = static_cast<double>(sub_second) / static_cast<double>(n);
  m.cloud_call_fraction = static_cast<double>(cloud) / static_cast<double>(n);
  m.mean_accuracy_loss = accuracy / static_cast<double>(n);
  return m;
}

SimulationResult run_simulation(const Workload& workload, const SimConfig& config,
                                const router::RoutingPolicy* policy) {
  config.validate();
  if (workload.seed != config.seed) throw InvalidArgument("simulation: workload seed does not match config seed");

  router::RoutingPolicy solved;
  if (config.policy == PolicyKind::Mdp && policy == nullptr) {
    solved = router::value_iteration(
        router::build_mdp(config.device, config.network, config.cost, config.complexity_mix), config.vi_tolerance);
    policy = &solved;
  }

  // Separate streams so the network trace is identical for every policy.
  Rng network_rng(derive_seed(config.seed, "network"));
  Rng battery_rng(derive_seed(config.seed, "battery"));
  const double max_energy = router::max_task_energy(config.device, config.network);

  SimulationResult result;
  result.policy = config.policy;
  result.events.reserve(workload.tasks.size());

  NetworkState network = config.network.initial;
  Battery battery = config.device.battery;
  for (size_t i = 0; i < workload.tasks.size(); ++i) {
    const Task& task = workload.tasks[i];
    if (i > 0) {
      const auto& row = config.network.transition[static_cast<size_t>(network)];
      network = static_cast<NetworkState>(draw_categorical(network_rng, row));
    }
    const router::RoutingState state{router::featurize_task(task.descriptor).complexity, config.device.device_class,
                                     network, battery};
    const Action action = choose(config, policy, state);

    Event e;
    e.task_id = task.id;
    e.arrival_s = task.arrival_s;
    e.kind = task.descriptor.kind;
    e.complexity = state.complexity;
    e.network = network;
    e.battery = battery;
    e.action = action;
    if (action == Action::Cloud && network == NetworkState::Offline) {
      e.failed = true;
      e.latency_ms = config.offline_timeout_ms;
    } else {
      const auto cost = router::action_cost(config.device, config.network, state, action);
      e.latency_ms = cost.latency_ms;
      e.energy_units = cost.energy_units;
      e.accuracy_loss = cost.accuracy_loss;
    }
    // One draw per task regardless of outcome keeps the stream aligned across policies.
    const double u = battery_rng.uniform();
    if (battery == Battery::Ok && max_energy > 0.0 &&
        u < config.device.battery_drain_probability * e.energy_units / max_energy) {
      battery = Battery::Low;
    }
    result.events.push_back(e);
  }
  result.metrics = aggregate(result.events, config.sub_second_ms);
  return result;
}

ComparisonReport compare_policies(const Workload& workload, const std::vector<SimConfig>& configs) {
  if (configs.empty()) throw InvalidArgument("compare: no policies given");
  ComparisonReport report;
  report.seed = workload.seed;
  for (const auto& c : configs) {
    if (c.seed != workload.seed) throw InvalidArgument("compare: every policy must use the workload's seed");
  }
  for (const auto& c : configs) report.results.push_back(run_simulation(workload, c));
  return report;
}

nlohmann::json metrics_to_json(const MetricsReport& m) {
  return {{"n_tasks", m.n_tasks},
          {"failed_tasks", m.failed_tasks},
          {"median_latency_ms", m.median_latency_ms},
          {"p95_latency_ms", m.p95_latency_ms},
          {"sub_second_fraction", m.sub_second_fraction},
          {"cloud_call_fraction", m.cloud_call_fraction},
          {"total_energy_units", m.total_energy_units},
          {"mean_accuracy_loss", m.mean_accuracy_loss}};
}

nlohmann::json comparison_to_json(const ComparisonReport& report, std::string_view config_hash) {
  nlohmann::json policies = nlohmann::json::object();
  nlohmann::json deltas = nlohmann::json::object();
  const auto base = metrics_to_json(report.results.front().metrics);
  for (const auto& r : report.results) {
    const auto name = std::string(to_string(r.policy));
    const auto metrics = metrics_to_json(r.metrics);
    policies[name] = metrics;
    nlohmann::json d = nlohmann::json::object();
    for (const auto& [key, value] : metrics.items()) {
      d[key] = value.get<double>() - base.at(key).get<double>();
    }
    deltas[name] = std::move(d);
  }
  return {{"config_hash", std::string(config_hash)},
          {"seed", report.seed},
          {"baseline", to_string(report.results.front().policy)},
          {"policies", std::move(policies)},
          {"deltas", std::move(deltas)}};
}

std::string comparison_to_csv(const ComparisonReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "policy,n_tasks,failed_tasks,median_latency_ms,p95_latency_ms,sub_second_fraction,"
         "cloud_call_fraction,total_energy_units,mean_accuracy_loss\n";
  for (const auto& r : report.results) {
    const auto& m = r.metrics;
    out << to_string(r.policy) << ',' << m.n_tasks << ',' << m.failed_tasks << ',' << m.median_latency_ms << ','
        << m.p95_latency_ms << ',' << m.sub_second_fraction << ',' << m.cloud_call_fraction << ','
        << m.total_energy_units << ',' << m.mean_accuracy_loss << '\n';
  }
  return out.str();
}

}  // namespace devassist::harness
