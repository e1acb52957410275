#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowscope/extraction.hpp"

namespace flowscope::task_view {

struct SankeyNode {
  std::size_t id = 0;
  std::string label;
  std::size_t step = 0;
  std::size_t cardinality = 0;
  /// FNV-1a of the label; equal labels at different steps share it.
  std::uint32_t color_key = 0;
};

struct SankeyLink {
  std::size_t id = 0;
  std::size_t source = 0;
  std::size_t target = 0;
  std::size_t weight = 0;
  double mean_transition_ms = 0.0;
  double normalized_time = 0.5;
};

struct SankeyTotals {
  std::size_t sequences_before = 0;
  std::size_t sequences_after = 0;
  std::size_t flows_before = 0;
  std::size_t flows_after = 0;
};

struct SankeyGraph {
  std::string task_id;
  double p_min = 0.0;
  /// Ordered by step, then descending cardinality, then label. node.id is the index.
  std::vector<SankeyNode> nodes;
  /// Ordered by (source, target). link.id is the index.
  std::vector<SankeyLink> links;
  SankeyTotals totals;
  /// Flows existed but every one was at or below p_min.
  bool below_threshold = false;
};

std::uint32_t color_key(std::string_view label);

/// Superimposes the sequences of every flow whose relative frequency exceeds p_min.
/// Throws ConfigError when p_min is outside [0,1].
SankeyGraph build_sankey(const extraction::FlowTable& flows, std::span<const extraction::CollapsedSequence> sequences,
                         double p_min);

/// first_ts(step + 1) - first_ts(step): the whole span of a collapsed group rides its outgoing link.
/// Throws DomainError when step + 1 is not a valid group index.
Millis transition_duration(const extraction::CollapsedSequence& sequence, std::size_t step);

/// Global min-max normalization of mean transition times; all-equal maps to 0.5.
SankeyGraph normalize_link_times(SankeyGraph graph);

struct NodeSummary {
  SankeyNode node;
  std::vector<SankeyLink> incoming;
  std::vector<SankeyLink> outgoing;
};

struct LinkSummary {
  SankeyLink link;
  std::size_t weight = 0;
  /// weight / source cardinality
  double relative = 0.0;
  double mean_transition_ms = 0.0;
};

NodeSummary node_summary(const SankeyGraph& graph, std::size_t node_id);
LinkSummary link_summary(const SankeyGraph& graph, std::size_t link_id);

}  // namespace flowscope::task_view
