#include "flowscope/analysis.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include <json.hpp>

#include "flowscope/error.hpp"

namespace flowscope {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Task definitions

namespace {

EventMatcher parse_matcher(const json& j, const std::string& ctx) {
  if (j.is_string()) return {j.get<std::string>(), std::nullopt};
  if (!j.is_object()) throw ConfigError(ctx + ": matcher must be an object or an element name");
  for (const auto& [key, _] : j.items()) {
    if (key != "element" && key != "gesture") throw ConfigError(ctx + ": unknown key '" + key + "'");
  }
  EventMatcher m;
  m.element = j.at("element").get<std::string>();
  if (j.contains("gesture")) {
    const auto text = j.at("gesture").get<std::string>();
    m.gesture = parse_gesture(text);
    if (!m.gesture) throw ConfigError(ctx + ": unknown gesture '" + text + "'");
  }
  return m;
}

std::vector<EventMatcher> parse_matchers(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw ConfigError(ctx + " must be an array");
  std::vector<EventMatcher> out;
  for (const auto& item : j) out.push_back(parse_matcher(item, ctx));
  return out;
}

json matcher_json(const EventMatcher& m) {
  json j = {{"element", m.element}};
  if (m.gesture) j["gesture"] = std::string(to_string(*m.gesture));
  return j;
}

}  // namespace

TaskDefinition parse_task_definition(std::istream& in) {
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ConfigError("task definition is not a JSON object");
  TaskDefinition task;
  try {
    for (const auto& [key, _] : doc.items()) {
      if (key != "name" && key != "start" && key != "end" && key != "termination" && key != "aggregate" &&
          key != "p_min") {
        throw ConfigError("task definition: unknown key '" + key + "'");
      }
    }
    task.name = doc.at("name").get<std::string>();
    task.start_events = parse_matchers(doc.at("start"), "start");
    task.end_events = parse_matchers(doc.at("end"), "end");
    if (doc.contains("termination")) {
      const auto& term = doc.at("termination");
      if (!term.is_object()) throw ConfigError("termination must be an object");
      for (const auto& [key, _] : term.items()) {
        if (key != "elements" && key != "t_max_s") throw ConfigError("termination: unknown key '" + key + "'");
      }
      if (term.contains("elements")) task.termination_elements = parse_matchers(term.at("elements"), "termination");
      if (term.contains("t_max_s") && !term.at("t_max_s").is_null()) {
        task.t_max = static_cast<Millis>(std::llround(term.at("t_max_s").get<double>() * 1000.0));
      }
    }
    if (doc.contains("aggregate")) {
      for (const auto& e : doc.at("aggregate")) task.aggregate_elements.insert(e.get<std::string>());
    }
    if (doc.contains("p_min")) task.p_min = doc.at("p_min").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("task definition: ") + e.what());
  }
  task.validate();
  return task;
}

TaskDefinition load_task_definition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("task definition not found: " + path.string());
  return parse_task_definition(in);
}

std::string task_definition_json(const TaskDefinition& task) {
  json start = json::array(), end = json::array(), term = json::array();
  for (const auto& m : task.start_events) start.push_back(matcher_json(m));
  for (const auto& m : task.end_events) end.push_back(matcher_json(m));
  for (const auto& m : task.termination_elements) term.push_back(matcher_json(m));
  json termination = {{"elements", term}};
  if (task.t_max) termination["t_max_s"] = static_cast<double>(*task.t_max) / 1000.0;
  json doc = {{"name", task.name},      {"start", start},
              {"end", end},             {"termination", termination},
              {"aggregate", task.aggregate_elements}, {"p_min", task.p_min}};
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Analyses

TaskAnalysis analyze_task(const SessionStore& store, TaskDefinition task) {
  TaskAnalysis a;
  a.sequences = extraction::extract_sequences(store, task);
  a.collapsed.reserve(a.sequences.size());
  for (const auto& s : a.sequences) a.collapsed.push_back(extraction::collapse_repeats(s, task.aggregate_elements));
  a.flows = extraction::assign_flow_ids(task.name, a.collapsed);
  extraction::apply_flow_ids(a.sequences, a.flows);
  a.task = std::move(task);
  return a;
}

Snapshot::Snapshot(SessionStore store, std::vector<TaskDefinition> tasks) : store_(std::move(store)) {
  for (auto& t : tasks) {
    for (const auto& existing : tasks_) {
      if (existing.task.name == t.name) throw ConfigError("duplicate task name '" + t.name + "'");
    }
    tasks_.push_back(analyze_task(store_, std::move(t)));
  }
  for (std::size_t ti = 0; ti < tasks_.size(); ++ti) {
    for (std::size_t si = 0; si < tasks_[ti].sequences.size(); ++si) {
      sequence_index_.emplace(tasks_[ti].sequences[si].sequence_id, std::make_pair(ti, si));
    }
  }
}

const TaskAnalysis& Snapshot::task(std::string_view name) const {
  for (const auto& t : tasks_) {
    if (t.task.name == name) return t;
  }
  throw NotFoundError("unknown task '" + std::string(name) + "'");
}

Snapshot::SequenceRef Snapshot::sequence(std::string_view sequence_id) const {
  auto it = sequence_index_.find(sequence_id);
  if (it == sequence_index_.end()) throw NotFoundError("unknown sequence '" + std::string(sequence_id) + "'");
  const auto& t = tasks_[it->second.first];
  return {&t, &t.sequences[it->second.second]};
}

// ---------------------------------------------------------------------------
// View requests

namespace views {

namespace {

void reject_unknown(const Params& params, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : params) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown parameter '" + key + "'");
    }
  }
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("parameter '" + key + "' must be a number, got '" + text + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& key, const std::string& text) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("parameter '" + key + "' must be an integer, got '" + text + "'");
  }
  return v;
}

std::optional<double> parse_p_min(const Params& params) {
  auto it = params.find("p_min");
  if (it == params.end()) return std::nullopt;
  const double p = parse_double("p_min", it->second);
  if (p < 0.0 || p > 1.0) throw ConfigError("parameter 'p_min' must lie in [0,1]");
  return p;
}

}  // namespace

TaskViewRequest parse_task_view_request(const Params& params) {
  reject_unknown(params, {"p_min"});
  return {parse_p_min(params)};
}

FlowViewRequest parse_flow_view_request(const Params& params) {
  reject_unknown(params, {"metric", "p_min", "target_ms", "region", "grid"});
  FlowViewRequest r;
  if (auto it = params.find("metric"); it != params.end()) r.metric = flow_view::parse_metric(it->second);
  r.p_min = parse_p_min(params);
  if (auto it = params.find("target_ms"); it != params.end()) r.target_ms = parse_double("target_ms", it->second);
  if (auto it = params.find("region"); it != params.end()) {
    if (it->second.empty()) throw ConfigError("parameter 'region' must not be empty");
    r.region = it->second;
  }
  if (auto it = params.find("grid"); it != params.end()) {
    const auto g = parse_int("grid", it->second);
    if (g < 2 || g > 4096) throw ConfigError("parameter 'grid' must lie in [2,4096]");
    r.grid = static_cast<std::size_t>(g);
  }
  return r;
}

TimelineRequest parse_timeline_request(const Params& params) {
  reject_unknown(params, {"pad_ms", "region", "long_ms"});
  TimelineRequest r;
  if (auto it = params.find("pad_ms"); it != params.end()) {
    r.options.pad_ms = parse_int("pad_ms", it->second);
    if (r.options.pad_ms < 0) throw ConfigError("parameter 'pad_ms' must be non-negative");
  }
  if (auto it = params.find("region"); it != params.end()) {
    if (it->second.empty()) throw ConfigError("parameter 'region' must not be empty");
    r.options.display_region = it->second;
  }
  if (auto it = params.find("long_ms"); it != params.end()) {
    r.options.long_glance_threshold_ms = parse_int("long_ms", it->second);
    if (r.options.long_glance_threshold_ms < 0) throw ConfigError("parameter 'long_ms' must be non-negative");
  }
  return r;
}

task_view::SankeyGraph task_view_graph(const TaskAnalysis& analysis, const TaskViewRequest& request) {
  return task_view::build_sankey(analysis.flows, analysis.collapsed, request.p_min.value_or(analysis.task.p_min));
}

flow_view::FlowView flow_view_data(const TaskAnalysis& analysis, const SessionStore& store,
                                   const FlowViewRequest& request) {
  flow_view::FlowViewOptions opts;
  opts.p_min = request.p_min.value_or(analysis.task.p_min);
  opts.target_ms = request.target_ms;
  if (request.region) opts.display_region = *request.region;
  if (request.grid) opts.grid_size = *request.grid;
  return flow_view::flow_distributions(analysis.flows, analysis.sequences, request.metric, opts, &store);
}

// ---------------------------------------------------------------------------
// JSON contracts

namespace {

std::string finish(const ojson& doc) { return doc.dump(2) + "\n"; }

ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

}  // namespace

std::string tasks_json(const Snapshot& snapshot) {
  ojson tasks = ojson::array();
  for (const auto& t : snapshot.tasks()) {
    tasks.push_back({{"name", t.task.name},
                     {"sequence_count", t.sequences.size()},
                     {"flow_count", t.flows.flows.size()},
                     {"p_min", t.task.p_min}});
  }
  return finish({{"session_count", snapshot.store().size()}, {"tasks", tasks}});
}

std::string task_view_json(const TaskAnalysis& analysis, const TaskViewRequest& request) {
  const auto graph = task_view_graph(analysis, request);
  ojson nodes = ojson::array();
  for (const auto& n : graph.nodes) {
    nodes.push_back({{"id", n.id},
                     {"label", n.label},
                     {"step", n.step},
                     {"cardinality", n.cardinality},
                     {"color_key", n.color_key}});
  }
  ojson links = ojson::array();
  for (const auto& l : graph.links) {
    const auto summary = task_view::link_summary(graph, l.id);
    links.push_back({{"id", l.id},
                     {"source", l.source},
                     {"target", l.target},
                     {"weight", l.weight},
                     {"relative", summary.relative},
                     {"mean_ms", l.mean_transition_ms},
                     {"normalized", l.normalized_time}});
  }
  ojson doc = {{"task", graph.task_id},
               {"p_min", graph.p_min},
               {"below_threshold", graph.below_threshold},
               {"nodes", nodes},
               {"links", links},
               {"totals",
                {{"sequences_before", graph.totals.sequences_before},
                 {"sequences_after", graph.totals.sequences_after},
                 {"flows_before", graph.totals.flows_before},
                 {"flows_after", graph.totals.flows_after}}}};
  return finish(doc);
}

std::string flow_view_json(const TaskAnalysis& analysis, const SessionStore& store, const FlowViewRequest& request) {
  const auto view = flow_view_data(analysis, store, request);
  ojson flows = ojson::array();
  for (const auto& f : view.flows) {
    ojson density = ojson::array();
    for (const auto& p : f.density) density.push_back(ojson::array({p.value, p.density}));
    flows.push_back({{"flow_id", f.flow_id},
                     {"label", f.label},
                     {"count", f.sample_count},
                     {"stats",
                      {{"min", f.stats.min},
                       {"max", f.stats.max},
                       {"mean", f.stats.mean},
                       {"median", f.stats.median},
                       {"q1", f.stats.q1},
                       {"q3", f.stats.q3}}},
                     {"density", density},
                     {"low_sample", f.low_sample},
                     {"degenerate", f.degenerate}});
  }
  ojson doc = {{"task", view.task_id},
               {"metric", std::string(flow_view::to_string(view.metric))},
               {"p_min", view.options.p_min},
               {"target_ms", optional_number(view.options.target_ms)},
               {"flows", flows}};
  return finish(doc);
}

std::string flow_sequences_json(const TaskAnalysis& analysis, std::string_view flow_id) {
  const auto& flow = analysis.flows.at(flow_id);
  ojson seqs = ojson::array();
  for (const auto& s : analysis.sequences) {
    if (s.flow_id != flow.flow_id) continue;
    seqs.push_back({{"sequence_id", s.sequence_id},
                    {"session_id", s.session_id},
                    {"time_on_task_ms", extraction::time_on_task(s)}});
  }
  ojson doc = {{"task", analysis.task.name},
               {"flow_id", flow.flow_id},
               {"labels", flow.labels},
               {"sequences", seqs}};
  return finish(doc);
}

std::string timeline_json(const Snapshot& snapshot, std::string_view sequence_id, const TimelineRequest& request) {
  const auto ref = snapshot.sequence(sequence_id);
  const auto tl = sequence_view::build_timeline(*ref.sequence, snapshot.store(), request.options);
  const auto m = sequence_view::timeline_metrics(tl);

  ojson interactions = ojson::array();
  for (const auto& i : tl.interactions) interactions.push_back({{"ts", i.ts}, {"label", i.label}});
  ojson glances = ojson::array();
  for (const auto& g : tl.glances) {
    glances.push_back({{"start", g.start},
                       {"end", g.end},
                       {"duration", g.duration},
                       {"class", std::string(sequence_view::to_string(g.glance_class))}});
  }
  ojson speed = ojson::array(), steering = ojson::array();
  for (const auto& p : tl.speed) speed.push_back(ojson::array({p.ts, p.value}));
  for (const auto& p : tl.steering) steering.push_back(ojson::array({p.ts, p.value}));

  ojson doc = {{"sequence_id", tl.sequence_id},
               {"task", ref.task->task.name},
               {"flow_id", ref.sequence->flow_id},
               {"session_id", tl.session_id},
               {"window", ojson::array({tl.t0, tl.t1})},
               {"params",
                {{"pad_ms", tl.options.pad_ms},
                 {"region", tl.options.display_region},
                 {"long_ms", tl.options.long_glance_threshold_ms}}},
               {"interactions", interactions},
               {"glances", glances},
               {"speed", speed},
               {"steering", steering},
               {"metrics",
                {{"glance_count", m.glance_count},
                 {"long_glance_count", m.long_glance_count},
                 {"total_glance_ms", m.total_glance_ms},
                 {"interaction_count", m.interaction_count},
                 {"mean_speed", optional_number(m.mean_speed)},
                 {"speed_delta", optional_number(m.speed_delta)},
                 {"max_abs_steering_delta", optional_number(m.max_abs_steering_delta)}}},
               {"flags",
                {{"interactions", tl.flags.interactions},
                 {"glances", tl.flags.glances},
                 {"driving", tl.flags.driving}}}};
  return finish(doc);
}

std::string extraction_json(const TaskAnalysis& analysis) {
  ojson flows = ojson::array();
  for (const auto& f : analysis.flows.flows) {
    flows.push_back({{"flow_id", f.flow_id},
                     {"labels", f.labels},
                     {"count", f.count},
                     {"relative_frequency", f.relative_frequency}});
  }
  ojson seqs = ojson::array();
  for (std::size_t k = 0; k < analysis.sequences.size(); ++k) {
    const auto& s = analysis.sequences[k];
    ojson events = ojson::array();
    for (const auto& e : s.events) {
      events.push_back({{"ts", e.ts}, {"ui_element", e.ui_element}, {"gesture", std::string(to_string(e.gesture))}});
    }
    ojson groups = ojson::array();
    for (const auto& g : analysis.collapsed[k].groups) {
      groups.push_back(
          {{"label", g.label()}, {"first_ts", g.first_ts}, {"last_ts", g.last_ts}, {"raw_count", g.raw_count}});
    }
    seqs.push_back({{"sequence_id", s.sequence_id},
                    {"session_id", s.session_id},
                    {"flow_id", s.flow_id},
                    {"time_on_task_ms", extraction::time_on_task(s)},
                    {"events", events},
                    {"groups", groups}});
  }
  ojson doc = {{"task", analysis.task.name}, {"flows", flows}, {"sequences", seqs}};
  return finish(doc);
}

}  // namespace views

}  // namespace flowscope
