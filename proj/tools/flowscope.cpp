// flowscope: synth -> ingest -> extract -> export / serve.

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flowscope/analysis.hpp"
#include "flowscope/error.hpp"
#include "flowscope/ingest.hpp"
#include "flowscope/server.hpp"
#include "flowscope/synth.hpp"

namespace fs = std::filesystem;
using namespace flowscope;

namespace {

void write_output(const std::string& body, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << body;
    return;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + out);
  f << body;
}

SessionStore load_store_for(const std::string& path) {
  try {
    return ingest::load_store_file(path);
  } catch (const NotFoundError& e) {
    throw NotFoundError(std::string(e.what()) + " (run `flowscope ingest` first)");
  }
}

std::vector<TaskDefinition> load_tasks(const std::vector<std::string>& paths) {
  std::vector<TaskDefinition> tasks;
  for (const auto& p : paths) tasks.push_back(load_task_definition(p));
  return tasks;
}

template <typename Record>
std::vector<Record> parse_file(const fs::path& path, ingest::ParseResult<Record> (*parse)(std::istream&),
                               std::size_t& error_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("log file not found: " + path.string());
  auto result = parse(in);
  for (const auto& w : result.warnings) std::cerr << path.string() << ":" << w.line << ": warning: " << w.message << "\n";
  for (const auto& e : result.errors) std::cerr << path.string() << ":" << e.line << ": error: " << e.message << "\n";
  error_count += result.errors.size();
  return std::move(result.records);
}

const TaskAnalysis& pick_task(const Snapshot& snap, const std::string& name) {
  if (!name.empty()) return snap.task(name);
  if (snap.tasks().size() != 1) throw ConfigError("several tasks loaded; choose one with --name");
  return snap.tasks().front();
}

server::ApiServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowscope: multi-level user behavior analytics for in-vehicle touch interaction logs"};
  app.require_subcommand(1);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a deterministic synthetic fleet");
  std::string synth_config, synth_out;
  std::optional<std::uint64_t> synth_seed;
  std::optional<std::size_t> synth_sessions;
  bool print_config = false;
  synth_cmd->add_option("--config", synth_config, "Fleet config JSON (defaults when omitted)");
  synth_cmd->add_option("--out", synth_out, "Output directory");
  synth_cmd->add_option("--seed", synth_seed, "Override the config seed");
  synth_cmd->add_option("--sessions", synth_sessions, "Override the session count");
  synth_cmd->add_flag("--print-config", print_config, "Print the effective config and exit");

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse log files into a session store");
  std::string events_path, glances_path, driving_path, bundle_dir, store_out;
  bool do_anonymize = false, strict = false;
  std::uint64_t anon_seed = 0;
  ingest_cmd->add_option("--events", events_path, "events.jsonl");
  ingest_cmd->add_option("--glances", glances_path, "glances.jsonl");
  ingest_cmd->add_option("--driving", driving_path, "driving.jsonl");
  ingest_cmd->add_option("--bundle", bundle_dir, "Directory with manifest.json (instead of the three files)");
  ingest_cmd->add_option("--out", store_out, "Store file to write")->required();
  ingest_cmd->add_flag("--anonymize", do_anonymize, "Rebase timestamps and replace session ids");
  ingest_cmd->add_option("--seed", anon_seed, "Anonymization seed");
  ingest_cmd->add_flag("--strict", strict, "Fail when any line has a parse error");

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "Extract task sequences and flows");
  std::string extract_store, extract_task, extract_out;
  extract_cmd->add_option("--store", extract_store, "Store file")->required();
  extract_cmd->add_option("--task", extract_task, "Task definition JSON")->required();
  extract_cmd->add_option("--out", extract_out, "Output JSON (stdout when omitted)");

  // export
  auto* export_cmd = app.add_subcommand("export", "Export one view as JSON");
  std::string view, export_store, export_name, export_out, seq_id, flow_id;
  std::vector<std::string> export_tasks;
  std::optional<std::string> p_min, metric, target_ms, region, grid, pad_ms, long_ms;
  export_cmd->add_option("--view", view, "task | flow | sequence")
      ->required()
      ->check(CLI::IsMember({"task", "flow", "sequence"}));
  export_cmd->add_option("--store", export_store, "Store file")->required();
  export_cmd->add_option("--task", export_tasks, "Task definition JSON (repeatable)")->required();
  export_cmd->add_option("--name", export_name, "Task name when several are loaded");
  export_cmd->add_option("--id", seq_id, "Sequence id (sequence view)");
  export_cmd->add_option("--flow", flow_id, "Flow id: list its sequences instead of the distributions (flow view)");
  export_cmd->add_option("--p-min", p_min, "Minimum relative flow frequency");
  export_cmd->add_option("--metric", metric, "time_on_task | interaction_count | glance_count");
  export_cmd->add_option("--target-ms", target_ms, "Reference value echoed in the flow view");
  export_cmd->add_option("--region", region, "Display region id");
  export_cmd->add_option("--grid", grid, "Density grid size");
  export_cmd->add_option("--pad-ms", pad_ms, "Timeline padding");
  export_cmd->add_option("--long-ms", long_ms, "Long-glance threshold");
  export_cmd->add_option("--out", export_out, "Output file (stdout when omitted)");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Serve the views over HTTP");
  std::string serve_store, bind = "127.0.0.1:8080", static_dir;
  std::vector<std::string> serve_tasks;
  serve_cmd->add_option("--store", serve_store, "Store file")->required();
  serve_cmd->add_option("--task", serve_tasks, "Task definition JSON (repeatable)")->required();
  serve_cmd->add_option("--bind", bind, "host:port (FLOWSCOPE_BIND overrides)");
  serve_cmd->add_option("--static", static_dir, "Explorer assets served at /");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      auto config = synth_config.empty() ? synth::default_fleet_config() : synth::load_fleet_config(synth_config);
      if (synth_seed) config.seed = *synth_seed;
      if (synth_sessions) config.n_sessions = *synth_sessions;
      config.validate();
      if (print_config) {
        std::cout << synth::fleet_config_json(config) << "\n";
        return 0;
      }
      if (synth_out.empty()) throw ConfigError("synth needs --out");
      synth::generate_fleet(config, synth_out);
      std::cerr << "wrote " << config.n_sessions << " sessions to " << synth_out << "\n";
      return 0;
    }

    if (*ingest_cmd) {
      ingest::LogBundle bundle;
      if (!bundle_dir.empty()) {
        bundle = ingest::load_bundle(bundle_dir);
      } else {
        if (events_path.empty() || glances_path.empty() || driving_path.empty()) {
          throw ConfigError("ingest needs --bundle or all of --events, --glances, --driving");
        }
        bundle = {events_path, glances_path, driving_path, ingest::kSchemaVersion};
        bundle.validate();
      }
      std::size_t errors = 0;
      auto events = parse_file(bundle.events_path, &ingest::parse_event_log, errors);
      auto glances = parse_file(bundle.glances_path, &ingest::parse_glance_log, errors);
      auto driving = parse_file(bundle.driving_path, &ingest::parse_driving_log, errors);
      if (strict && errors > 0) throw FormatError(std::to_string(errors) + " parse error(s); store not written");
      auto store = ingest::assemble_store(std::move(events), std::move(glances), std::move(driving));
      if (do_anonymize) store = ingest::anonymize(store, anon_seed);
      ingest::save_store_file(store, store_out);
      std::cerr << "stored " << store.size() << " sessions in " << store_out << " (" << errors << " parse errors)\n";
      return 0;
    }

    if (*extract_cmd) {
      auto store = load_store_for(extract_store);
      const auto analysis = analyze_task(store, load_task_definition(extract_task));
      write_output(views::extraction_json(analysis), extract_out);
      std::cerr << analysis.sequences.size() << " sequences in " << analysis.flows.flows.size() << " flows\n";
      return 0;
    }

    if (*export_cmd) {
      const Snapshot snap(load_store_for(export_store), load_tasks(export_tasks));
      views::Params params;
      auto put = [&](const char* key, const std::optional<std::string>& v) {
        if (v) params.emplace(key, *v);
      };
      std::string body;
      if (view == "task") {
        put("p_min", p_min);
        body = views::task_view_json(pick_task(snap, export_name), views::parse_task_view_request(params));
      } else if (view == "flow" && !flow_id.empty()) {
        if (metric || p_min || target_ms || region || grid) throw ConfigError("--flow takes no view parameters");
        body = views::flow_sequences_json(pick_task(snap, export_name), flow_id);
      } else if (view == "flow") {
        put("metric", metric);
        put("p_min", p_min);
        put("target_ms", target_ms);
        put("region", region);
        put("grid", grid);
        body = views::flow_view_json(pick_task(snap, export_name), snap.store(), views::parse_flow_view_request(params));
      } else {
        if (seq_id.empty()) throw ConfigError("sequence view needs --id");
        put("pad_ms", pad_ms);
        put("region", region);
        put("long_ms", long_ms);
        body = views::timeline_json(snap, seq_id, views::parse_timeline_request(params));
      }
      write_output(body, export_out);
      return 0;
    }

    if (*serve_cmd) {
      auto snap = std::make_shared<const Snapshot>(load_store_for(serve_store), load_tasks(serve_tasks));
      server::ServerOptions options;
      if (!static_dir.empty()) options.static_dir = static_dir;
      server::ApiServer srv(std::move(snap), options);
      const auto address = server::resolve_bind_address(bind);
      const int port = srv.bind(address);
      std::cerr << "serving on http://" << address.host << ":" << port << "\n";
      g_server = &srv;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      srv.listen();
      g_server = nullptr;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "flowscope: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
