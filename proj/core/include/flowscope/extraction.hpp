#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "flowscope/model.hpp"

namespace flowscope::extraction {

/// Scans every session left to right. A match opens at a start event and closes at the
/// first strictly later end event; matches never overlap. A match is cleansed (dropped)
/// when an adjacent gap exceeds t_max or any of its events is a termination element.
/// Survivors get ids "<task>-<n>" in session-id order; flow_id is left empty.
std::vector<Sequence> extract_sequences(const SessionStore& store, const TaskDefinition& task);

/// A run of identical aggregated events, or a single event.
struct EventGroup {
  std::string ui_element;
  Gesture gesture = Gesture::tap;
  Millis first_ts = 0;
  Millis last_ts = 0;
  std::size_t raw_count = 1;

  std::string label() const { return event_label(ui_element, gesture); }
  friend bool operator==(const EventGroup&, const EventGroup&) = default;
};

struct CollapsedSequence {
  std::string sequence_id;
  std::vector<EventGroup> groups;

  std::vector<std::string> labels() const;
  friend bool operator==(const CollapsedSequence&, const CollapsedSequence&) = default;
};

/// Collapses maximal runs of equal (element, gesture) events whose element is aggregated.
CollapsedSequence collapse_repeats(const Sequence& sequence, const std::set<std::string>& aggregate_elements);

struct Flow {
  std::string flow_id;
  std::vector<std::string> labels;
  std::vector<std::string> sequence_ids;
  std::size_t count = 0;
  double relative_frequency = 0.0;
};

struct FlowTable {
  std::string task_id;
  /// Descending count, ties by lexicographic label list. flow_id is "F<rank>".
  std::vector<Flow> flows;

  std::size_t sequence_count() const;
  /// Throws NotFoundError.
  const Flow& at(std::string_view flow_id) const;
};

FlowTable assign_flow_ids(std::string task_id, std::span<const CollapsedSequence> sequences);

/// Copies each sequence's flow id from the table (matched by sequence id).
void apply_flow_ids(std::span<Sequence> sequences, const FlowTable& table);

/// ts(last) - ts(first). Throws DomainError for an empty sequence.
Millis time_on_task(const Sequence& sequence);

}  // namespace flowscope::extraction
