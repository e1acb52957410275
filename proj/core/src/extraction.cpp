#include "flowscope/extraction.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "flowscope/error.hpp"

namespace flowscope::extraction {

namespace {

std::string sequence_id(const std::string& task, std::size_t n) {
  auto digits = std::to_string(n);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return task + "-" + digits;
}

bool cleansed(std::span<const InteractionEvent> match, const TaskDefinition& task) {
  for (std::size_t k = 0; k < match.size(); ++k) {
    if (matches_any(task.termination_elements, match[k])) return true;
    if (task.t_max && k > 0 && match[k].ts - match[k - 1].ts > *task.t_max) return true;
  }
  return false;
}

}  // namespace

std::vector<Sequence> extract_sequences(const SessionStore& store, const TaskDefinition& task) {
  task.validate();
  std::vector<Sequence> out;
  std::size_t next_id = 1;
  for (const auto& [session_id, session] : store.sessions()) {
    const auto& events = session.events;
    std::size_t i = 0;
    while (i < events.size()) {
      if (!matches_any(task.start_events, events[i])) {
        ++i;
        continue;
      }
      std::size_t j = i + 1;
      while (j < events.size() && !matches_any(task.end_events, events[j])) ++j;
      // No end after this start means no end after any later start either.
      if (j == events.size()) break;

      std::span<const InteractionEvent> match(events.data() + i, j - i + 1);
      if (!cleansed(match, task)) {
        Sequence s;
        s.sequence_id = sequence_id(task.name, next_id++);
        s.task_id = task.name;
        s.session_id = session_id;
        s.events.assign(match.begin(), match.end());
        out.push_back(std::move(s));
      }
      i = j + 1;
    }
  }
  return out;
}

std::vector<std::string> CollapsedSequence::labels() const {
  std::vector<std::string> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(g.label());
  return out;
}

CollapsedSequence collapse_repeats(const Sequence& sequence, const std::set<std::string>& aggregate_elements) {
  CollapsedSequence out{sequence.sequence_id, {}};
  for (const auto& e : sequence.events) {
    if (!out.groups.empty()) {
      auto& last = out.groups.back();
      if (last.ui_element == e.ui_element && last.gesture == e.gesture && aggregate_elements.contains(e.ui_element)) {
        last.last_ts = e.ts;
        ++last.raw_count;
        continue;
      }
    }
    out.groups.push_back({e.ui_element, e.gesture, e.ts, e.ts, 1});
  }
  return out;
}

std::size_t FlowTable::sequence_count() const {
  std::size_t n = 0;
  for (const auto& f : flows) n += f.count;
  return n;
}

const Flow& FlowTable::at(std::string_view flow_id) const {
  for (const auto& f : flows) {
    if (f.flow_id == flow_id) return f;
  }
  throw NotFoundError("unknown flow '" + std::string(flow_id) + "' in task '" + task_id + "'");
}

FlowTable assign_flow_ids(std::string task_id, std::span<const CollapsedSequence> sequences) {
  std::map<std::vector<std::string>, std::vector<std::string>> by_labels;
  for (const auto& s : sequences) by_labels[s.labels()].push_back(s.sequence_id);

  FlowTable table{std::move(task_id), {}};
  table.flows.reserve(by_labels.size());
  for (auto& [labels, ids] : by_labels) {
    Flow f;
    f.labels = labels;
    f.count = ids.size();
    f.sequence_ids = std::move(ids);
    table.flows.push_back(std::move(f));
  }
  // std::map iteration is already lexicographic, so a stable sort on count keeps the tie order.
  std::stable_sort(table.flows.begin(), table.flows.end(),
                   [](const Flow& a, const Flow& b) { return a.count > b.count; });
  const double total = static_cast<double>(sequences.size());
  for (std::size_t k = 0; k < table.flows.size(); ++k) {
    auto& f = table.flows[k];
    f.flow_id = "F" + std::to_string(k + 1);
    f.relative_frequency = static_cast<double>(f.count) / total;
  }
  return table;
}

void apply_flow_ids(std::span<Sequence> sequences, const FlowTable& table) {
  std::unordered_map<std::string, const std::string*> flow_of;
  for (const auto& f : table.flows) {
    for (const auto& id : f.sequence_ids) flow_of.emplace(id, &f.flow_id);
  }
  for (auto& s : sequences) {
    auto it = flow_of.find(s.sequence_id);
    if (it != flow_of.end()) s.flow_id = *it->second;
  }
}

Millis time_on_task(const Sequence& sequence) {
  if (sequence.events.empty()) throw DomainError("time_on_task of an empty sequence");
  return sequence.events.back().ts - sequence.events.front().ts;
}

}  // namespace flowscope::extraction
