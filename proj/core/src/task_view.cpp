#include "flowscope/task_view.hpp"

#include <algorithm>
#include <map>
#include <tuple>
#include <unordered_set>

#include "flowscope/error.hpp"

namespace flowscope::task_view {

using extraction::CollapsedSequence;
using extraction::FlowTable;

std::uint32_t color_key(std::string_view label) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : label) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

Millis transition_duration(const CollapsedSequence& sequence, std::size_t step) {
  if (step + 1 >= sequence.groups.size()) {
    throw DomainError("transition_duration: step " + std::to_string(step) + " has no successor in " +
                      sequence.sequence_id);
  }
  return sequence.groups[step + 1].first_ts - sequence.groups[step].first_ts;
}

SankeyGraph build_sankey(const FlowTable& flows, std::span<const CollapsedSequence> sequences, double p_min) {
  if (!(p_min >= 0.0 && p_min <= 1.0)) throw ConfigError("p_min must lie in [0,1]");

  SankeyGraph graph;
  graph.task_id = flows.task_id;
  graph.p_min = p_min;
  graph.totals.flows_before = flows.flows.size();
  graph.totals.sequences_before = flows.sequence_count();

  std::unordered_set<std::string> kept;
  for (const auto& f : flows.flows) {
    if (f.relative_frequency > p_min) {
      ++graph.totals.flows_after;
      kept.insert(f.sequence_ids.begin(), f.sequence_ids.end());
    }
  }
  graph.below_threshold = graph.totals.flows_before > 0 && graph.totals.flows_after == 0;

  // (step, label) -> cardinality; (step, from, to) -> (count, summed duration).
  std::map<std::pair<std::size_t, std::string>, std::size_t> node_count;
  std::map<std::tuple<std::size_t, std::string, std::string>, std::pair<std::size_t, Millis>> link_acc;
  for (const auto& s : sequences) {
    if (!kept.contains(s.sequence_id)) continue;
    ++graph.totals.sequences_after;
    for (std::size_t step = 0; step < s.groups.size(); ++step) {
      ++node_count[{step, s.groups[step].label()}];
      if (step + 1 < s.groups.size()) {
        auto& acc = link_acc[{step, s.groups[step].label(), s.groups[step + 1].label()}];
        ++acc.first;
        acc.second += transition_duration(s, step);
      }
    }
  }

  for (const auto& [key, count] : node_count) {
    graph.nodes.push_back({0, key.second, key.first, count, color_key(key.second)});
  }
  std::sort(graph.nodes.begin(), graph.nodes.end(), [](const SankeyNode& a, const SankeyNode& b) {
    if (a.step != b.step) return a.step < b.step;
    if (a.cardinality != b.cardinality) return a.cardinality > b.cardinality;
    return a.label < b.label;
  });
  std::map<std::pair<std::size_t, std::string>, std::size_t> node_id;
  for (std::size_t k = 0; k < graph.nodes.size(); ++k) {
    graph.nodes[k].id = k;
    node_id[{graph.nodes[k].step, graph.nodes[k].label}] = k;
  }

  for (const auto& [key, acc] : link_acc) {
    const auto& [step, from, to] = key;
    SankeyLink link;
    link.source = node_id.at({step, from});
    link.target = node_id.at({step + 1, to});
    link.weight = acc.first;
    link.mean_transition_ms = static_cast<double>(acc.second) / static_cast<double>(acc.first);
    graph.links.push_back(link);
  }
  std::sort(graph.links.begin(), graph.links.end(), [](const SankeyLink& a, const SankeyLink& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  for (std::size_t k = 0; k < graph.links.size(); ++k) graph.links[k].id = k;

  return normalize_link_times(std::move(graph));
}

SankeyGraph normalize_link_times(SankeyGraph graph) {
  if (graph.links.empty()) return graph;
  const auto [lo, hi] = std::minmax_element(
      graph.links.begin(), graph.links.end(),
      [](const SankeyLink& a, const SankeyLink& b) { return a.mean_transition_ms < b.mean_transition_ms; });
  const double min = lo->mean_transition_ms;
  const double max = hi->mean_transition_ms;
  for (auto& link : graph.links) {
    link.normalized_time = max > min ? (link.mean_transition_ms - min) / (max - min) : 0.5;
  }
  return graph;
}

NodeSummary node_summary(const SankeyGraph& graph, std::size_t node_id) {
  if (node_id >= graph.nodes.size()) throw NotFoundError("unknown node " + std::to_string(node_id));
  NodeSummary out{graph.nodes[node_id], {}, {}};
  for (const auto& link : graph.links) {
    if (link.target == node_id) out.incoming.push_back(link);
    if (link.source == node_id) out.outgoing.push_back(link);
  }
  return out;
}

LinkSummary link_summary(const SankeyGraph& graph, std::size_t link_id) {
  if (link_id >= graph.links.size()) throw NotFoundError("unknown link " + std::to_string(link_id));
  const auto& link = graph.links[link_id];
  const auto& source = graph.nodes.at(link.source);
  return {link, link.weight, static_cast<double>(link.weight) / static_cast<double>(source.cardinality),
          link.mean_transition_ms};
}

}  // namespace flowscope::task_view
