#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowscope/extraction.hpp"
#include "flowscope/flow_view.hpp"
#include "flowscope/sequence_view.hpp"
#include "flowscope/task_view.hpp"

namespace flowscope {

/// Task definition document:
/// {name, start:[{element,gesture}], end:[...], termination:{elements:[...], t_max_s}, aggregate:[element...], p_min}
/// A matcher without "gesture" matches any gesture; termination elements may also be bare strings.
TaskDefinition parse_task_definition(std::istream& in);
TaskDefinition load_task_definition(const std::filesystem::path& path);
std::string task_definition_json(const TaskDefinition& task);

/// Everything derived from one task over one store.
struct TaskAnalysis {
  TaskDefinition task;
  /// flow_id filled in.
  std::vector<Sequence> sequences;
  std::vector<extraction::CollapsedSequence> collapsed;
  extraction::FlowTable flows;
};

TaskAnalysis analyze_task(const SessionStore& store, TaskDefinition task);

/// A store and its task analyses; immutable once built.
class Snapshot {
 public:
  /// Throws ConfigError for duplicate task names.
  Snapshot(SessionStore store, std::vector<TaskDefinition> tasks);

  const SessionStore& store() const { return store_; }
  const std::vector<TaskAnalysis>& tasks() const { return tasks_; }
  /// Throws NotFoundError.
  const TaskAnalysis& task(std::string_view name) const;

  struct SequenceRef {
    const TaskAnalysis* task;
    const Sequence* sequence;
  };
  /// Throws NotFoundError.
  SequenceRef sequence(std::string_view sequence_id) const;

 private:
  SessionStore store_;
  std::vector<TaskAnalysis> tasks_;
  std::map<std::string, std::pair<std::size_t, std::size_t>, std::less<>> sequence_index_;
};

namespace views {

/// Raw request parameters, as given on a query string or CLI flags.
using Params = std::map<std::string, std::string, std::less<>>;

/// p_min (defaults to the task's).
struct TaskViewRequest {
  std::optional<double> p_min;
};

/// metric, p_min, target_ms, region, grid.
struct FlowViewRequest {
  flow_view::Metric metric = flow_view::Metric::time_on_task;
  std::optional<double> p_min;
  std::optional<double> target_ms;
  std::optional<std::string> region;
  std::optional<std::size_t> grid;
};

/// pad_ms, region, long_ms.
struct TimelineRequest {
  sequence_view::TimelineOptions options;
};

// Parsers reject unknown keys and malformed values with ConfigError.
TaskViewRequest parse_task_view_request(const Params& params);
FlowViewRequest parse_flow_view_request(const Params& params);
TimelineRequest parse_timeline_request(const Params& params);

task_view::SankeyGraph task_view_graph(const TaskAnalysis& analysis, const TaskViewRequest& request);
flow_view::FlowView flow_view_data(const TaskAnalysis& analysis, const SessionStore& store,
                                   const FlowViewRequest& request);

// JSON contracts. Output is deterministic and ends with a newline; the CLI and the HTTP
// service emit exactly these bytes.
std::string tasks_json(const Snapshot& snapshot);
std::string task_view_json(const TaskAnalysis& analysis, const TaskViewRequest& request);
std::string flow_view_json(const TaskAnalysis& analysis, const SessionStore& store, const FlowViewRequest& request);
std::string flow_sequences_json(const TaskAnalysis& analysis, std::string_view flow_id);
std::string timeline_json(const Snapshot& snapshot, std::string_view sequence_id, const TimelineRequest& request);
std::string extraction_json(const TaskAnalysis& analysis);

}  // namespace views

}  // namespace flowscope
