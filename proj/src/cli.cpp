#include "devassist/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "devassist/code_embed.hpp"
#include "devassist/code_graph.hpp"
#include "devassist/config.hpp"
#include "devassist/fusion.hpp"
#include "devassist/harness.hpp"
#include "devassist/layout.hpp"
#include "devassist/router.hpp"
#include "devassist/vector_index.hpp"

namespace devassist {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::string_view kSourceExtensions[] = {".java", ".kt", ".c",  ".cc",  ".cpp", ".cxx", ".h",
                                                  ".hh",   ".hpp", ".cs", ".js",  ".ts",  ".go",  ".swift"};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

AppConfig load_config(const std::string& path) { return path.empty() ? AppConfig{} : load_config_file(path); }

// Mini parser first; free text and unsupported syntax fall back to tokens.
embed::CodeGraph parse_lenient(std::string_view text, bool* fell_back = nullptr) {
  try {
    if (fell_back) *fell_back = false;
    return embed::parse_to_graph(text, "mini");
  } catch (const embed::SyntaxError&) {
    if (fell_back) *fell_back = true;
    return embed::parse_to_graph(text, "tokens");
  }
}

bool is_source_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return std::find(std::begin(kSourceExtensions), std::end(kSourceExtensions), ext) != std::end(kSourceExtensions);
}

size_t count_lines(std::string_view text) {
  if (text.empty()) return 0;
  size_t n = static_cast<size_t>(std::count(text.begin(), text.end(), '\n'));
  return text.back() == '\n' ? n : n + 1;
}

struct IndexArgs {
  std::string dir;
  std::string out = "index.bin";
  std::string config;
  std::optional<size_t> max_files;
};

int run_index(const IndexArgs& a, std::ostream& out, std::ostream& err) {
  const AppConfig cfg = load_config(a.config);
  const size_t cap = a.max_files.value_or(cfg.max_files);
  const fs::path root(a.dir);
  if (!fs::is_directory(root)) throw IoError("not a directory: '" + a.dir + "'");

  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied)) {
    if (entry.is_regular_file() && is_source_file(entry.path())) {
      files.push_back(fs::relative(entry.path(), root).generic_string());
    }
  }
  std::sort(files.begin(), files.end());

  bool degraded = false;
  index::VectorIndex idx(embed::band_config_hash(cfg.embed));
  for (size_t i = 0; i < files.size() && i < cap; ++i) {
    const fs::path path = root / files[i];
    std::string text;
    try {
      text = read_file(path);
    } catch (const IoError& e) {
      err << "warning: " << e.what() << ", skipped\n";
      degraded = true;
      continue;
    }
    bool fell_back = false;
    const auto graph = parse_lenient(text, &fell_back);
    if (fell_back) err << "warning: " << files[i] << ": unsupported syntax, indexed as tokens\n";
    const size_t lines = count_lines(text);
    idx.insert(files[i], embed::graph_to_vector(graph, cfg.embed),
               {path.generic_string(), "1-" + std::to_string(lines), "code"});
  }
  if (files.size() > cap) {
    degraded = true;
    err << "warning: file cap of " << cap << " reached, skipped " << files.size() - cap << " files:\n";
    for (size_t i = cap; i < files.size(); ++i) err << "  " << files[i] << '\n';
  }
  idx.save(a.out);
  out << "indexed " << idx.size() << " files into " << a.out << '\n';
  return degraded ? kExitDegraded : kExitOk;
}

struct QueryArgs {
  std::string text;
  std::string index = "index.bin";
  std::string config;
  std::string context;
  size_t top_k = 10;
  int64_t budget = 4096;
  std::optional<double> now;
};

int run_query(const QueryArgs& a, std::ostream& out, std::ostream&) {
  const AppConfig cfg = load_config(a.config);
  const auto query = embed::graph_to_vector(parse_lenient(a.text), cfg.embed);

  std::vector<fusion::ContextItem> items;
  if (!a.context.empty()) {
    json doc;
    try {
      doc = json::parse(read_file(a.context));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("context file: ") + e.what(), 0, 0);
    }
    if (!doc.is_array()) throw ParseError("context file: expected a JSON array", 0, 0);
    for (const auto& entry : doc) {
      fusion::ContextItem item;
      try {
        item.source = fusion::parse_source(entry.at("source").get<std::string>());
        item.text = entry.at("text").get<std::string>();
        item.timestamp = entry.value("timestamp", 0.0);
        item.near_breakpoint = entry.value("near_breakpoint", false);
        item.token_cost = entry.value("token_cost", fusion::estimate_tokens(item.text));
      } catch (const json::exception& e) {
        throw ParseError(std::string("context file: ") + e.what(), 0, 0);
      }
      item.vector = embed::graph_to_vector(parse_lenient(item.text), cfg.embed);
      items.push_back(std::move(item));
    }
  }
  double now = 0.0;
  for (const auto& item : items) now = std::max(now, item.timestamp);
  if (a.now) now = *a.now;

  json hits = json::array();
  if (!a.index.empty() && fs::exists(a.index)) {
    const auto idx = index::VectorIndex::load(a.index, embed::band_config_hash(cfg.embed));
    for (const auto& hit : idx.search(query, a.top_k).hits) {
      hits.push_back({{"id", hit.id},
                      {"similarity", hit.similarity},
                      {"path", hit.metadata.path},
                      {"span", hit.metadata.span}});
      fusion::ContextItem item;
      item.source = fusion::Source::CodeContext;
      item.vector = embed::EmbeddingVector::from_floats(idx.vector(*idx.find(hit.id)));
      try {
        item.text = read_file(hit.metadata.path);
      } catch (const IoError&) {
        item.text = hit.id;
      }
      item.timestamp = now;
      item.token_cost = fusion::estimate_tokens(item.text);
      items.push_back(std::move(item));
    }
  } else if (a.index != "index.bin") {
    throw IoError("index not found: '" + a.index + "'");
  }

  json entries = json::array();
  int64_t total = 0;
  if (!items.empty()) {
    const auto fused = fusion::assemble_context(fusion::score_items(query, items, cfg.fusion, now), a.budget);
    for (const auto& e : fused.entries) {
      entries.push_back({{"source", fusion::to_string(e.item.source)}, {"weight", e.weight}, {"text", e.item.text}});
    }
    total = fused.total_tokens;
  }
  out << json{{"entries", entries}, {"total_tokens", total}, {"budget", a.budget}, {"hits", hits}}.dump(2) << '\n';
  return kExitOk;
}

int run_describe_layout(const std::string& file, std::ostream& out) {
  const auto report = layout::validity_check_xml(read_file(file));
  json statements = json::array();
  for (const auto& s : report.statements) statements.push_back(s.text);
  json findings = json::array();
  for (const auto& f : report.findings) {
    findings.push_back({{"kind", layout::to_string(f.kind)}, {"widgets", f.widgets}, {"message", f.message}});
  }
  out << json{{"statements", statements}, {"findings", findings}}.dump(2) << '\n';
  return report.findings.empty() ? kExitOk : kExitDegraded;
}

struct RouteArgs {
  std::string complexity, device, network, battery = "ok";
  std::string config, policy, export_policy;
};

int run_route(const RouteArgs& a, std::ostream& out) {
  const AppConfig cfg = load_config(a.config);
  const router::RoutingState state{router::parse_complexity(a.complexity), router::parse_device(a.device),
                                   router::parse_network(a.network), router::parse_battery(a.battery)};
  const auto& sim = cfg.sim;
  const auto mdp = router::build_mdp(sim.device, sim.network, sim.cost, sim.complexity_mix);
  const std::string hash = router_config_hash(cfg);

  router::RoutingPolicy policy;
  if (!a.policy.empty()) {
    json doc;
    try {
      doc = json::parse(read_file(a.policy));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("policy file: ") + e.what(), 0, 0);
    }
    std::string stored;
    policy = router::policy_from_json(doc, &stored);
    if (stored != hash) throw InvalidArgument("policy file was solved for a different router config");
  } else {
    policy = router::value_iteration(mdp, sim.vi_tolerance);
  }
  if (!a.export_policy.empty()) write_file(a.export_policy, router::policy_to_json(policy, hash).dump(2) + "\n");

  const auto action = policy.route(state);
  const auto cost = router::expected_cost_breakdown(mdp, state, action);
  const double immediate = sim.cost.w_latency * cost.latency_ms + sim.cost.w_energy * cost.energy_units +
                           sim.cost.w_accuracy * cost.accuracy_loss;
  out << router::to_string(action) << '\n';
  out << "latency_ms " << cost.latency_ms << '\n';
  out << "energy_units " << cost.energy_units << '\n';
  out << "accuracy_loss " << cost.accuracy_loss << '\n';
  out << "weighted_cost " << immediate << '\n';
  out << "value " << policy.value[router::state_index(state)] << '\n';
  return kExitOk;
}

struct SimArgs {
  std::string config, out, csv, policy;
  std::optional<uint64_t> seed;
  std::optional<size_t> n_tasks;
};

AppConfig sim_config(const SimArgs& a) {
  AppConfig cfg = load_config(a.config);
  if (a.seed) cfg.sim.seed = *a.seed;
  if (a.n_tasks) cfg.sim.n_tasks = *a.n_tasks;
  if (!a.policy.empty()) cfg.sim.policy = harness::parse_policy(a.policy);
  return cfg;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_file(path, text);
  }
}

int run_simulate(const SimArgs& a, std::ostream& out) {
  const AppConfig cfg = sim_config(a);
  const auto workload = harness::generate_workload(cfg.sim);
  const auto result = harness::run_simulation(workload, cfg.sim);
  const json report = {{"config_hash", simulation_config_hash(cfg)},
                       {"seed", cfg.sim.seed},
                       {"policy", harness::to_string(cfg.sim.policy)},
                       {"metrics", harness::metrics_to_json(result.metrics)}};
  emit(a.out, report.dump(2) + "\n", out);
  return kExitOk;
}

int run_compare(const SimArgs& a, std::ostream& out) {
  const AppConfig cfg = sim_config(a);
  const auto workload = harness::generate_workload(cfg.sim);
  std::vector<harness::SimConfig> configs;
  for (auto kind : {harness::PolicyKind::AllCloud, harness::PolicyKind::AllEdge, harness::PolicyKind::Threshold,
                    harness::PolicyKind::Mdp}) {
    configs.push_back(cfg.sim);
    configs.back().policy = kind;
  }
  const auto report = harness::compare_policies(workload, configs);
  emit(a.out, harness::comparison_to_json(report, simulation_config_hash(cfg)).dump(2) + "\n", out);
  if (!a.csv.empty()) write_file(a.csv, harness::comparison_to_csv(report));
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Developer assistant core: routing, code search, layout checks and context fusion"};
  app.name("devassist");
  app.require_subcommand(1);

  IndexArgs index_args;
  auto* index_cmd = app.add_subcommand("index", "Embed the source files under a directory into a vector index");
  index_cmd->add_option("dir", index_args.dir, "Directory to walk")->required();
  index_cmd->add_option("--max-files", index_args.max_files, "File cap (default 500 or index.max_files)");
  index_cmd->add_option("--out", index_args.out, "Index file to write")->capture_default_str();
  index_cmd->add_option("--config", index_args.config, "YAML config file");

  QueryArgs query_args;
  auto* query_cmd = app.add_subcommand("query", "Search the index and fuse a context bundle");
  query_cmd->add_option("text", query_args.text, "Query text or code")->required();
  query_cmd->add_option("--index", query_args.index, "Index file")->capture_default_str();
  query_cmd->add_option("--top-k", query_args.top_k, "Hits to retrieve")->capture_default_str();
  query_cmd->add_option("--budget", query_args.budget, "Token budget")->capture_default_str();
  query_cmd->add_option("--context", query_args.context, "JSON array of extra context items");
  query_cmd->add_option("--now", query_args.now, "Current time in seconds (default: newest item)");
  query_cmd->add_option("--config", query_args.config, "YAML config file");

  std::string layout_file;
  auto* layout_cmd = app.add_subcommand("describe-layout", "Describe a constraint layout and report inconsistencies");
  layout_cmd->add_option("file", layout_file, "Layout XML file")->required();

  RouteArgs route_args;
  auto* route_cmd = app.add_subcommand("route", "Route one task state to edge or cloud");
  route_cmd->add_option("--complexity", route_args.complexity, "low, medium or high")->required();
  route_cmd->add_option("--device", route_args.device, "cpu or gpu")->required();
  route_cmd->add_option("--network", route_args.network, "good, degraded or offline")->required();
  route_cmd->add_option("--battery", route_args.battery, "ok or low")->capture_default_str();
  route_cmd->add_option("--config", route_args.config, "YAML config file");
  route_cmd->add_option("--policy", route_args.policy, "Load a solved policy instead of solving");
  route_cmd->add_option("--export-policy", route_args.export_policy, "Write the policy as JSON");

  SimArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Run one policy over a synthetic workload");
  sim_cmd->add_option("--config", sim_args.config, "YAML config file");
  sim_cmd->add_option("--seed", sim_args.seed, "RNG seed (overrides the config)");
  sim_cmd->add_option("--n-tasks", sim_args.n_tasks, "Workload size (overrides the config)");
  sim_cmd->add_option("--policy", sim_args.policy, "all_cloud, all_edge, threshold or mdp");
  sim_cmd->add_option("--out", sim_args.out, "Report file (default stdout)");

  SimArgs cmp_args;
  auto* cmp_cmd = app.add_subcommand("compare", "Run every policy over the same workload");
  cmp_cmd->add_option("--config", cmp_args.config, "YAML config file");
  cmp_cmd->add_option("--seed", cmp_args.seed, "RNG seed (overrides the config)");
  cmp_cmd->add_option("--n-tasks", cmp_args.n_tasks, "Workload size (overrides the config)");
  cmp_cmd->add_option("--out", cmp_args.out, "JSON report file (default stdout)");
  cmp_cmd->add_option("--csv", cmp_args.csv, "Also write a CSV summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*index_cmd) return run_index(index_args, out, err);
    if (*query_cmd) return run_query(query_args, out, err);
    if (*layout_cmd) return run_describe_layout(layout_file, out);
    if (*route_cmd) return run_route(route_args, out);
    if (*sim_cmd) return run_simulate(sim_args, out);
    if (*cmp_cmd) return run_compare(cmp_args, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const index::IndexError& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == index::IndexErrorKind::Io ? kExitIo : kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace devassist
