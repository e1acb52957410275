#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "flowscope/error.hpp"
#include "flowscope/extraction.hpp"
#include "flowscope/task_view.hpp"
#include "oracles.hpp"

using namespace flowscope;
using namespace flowscope::testing;
using extraction::CollapsedSequence;
using extraction::EventGroup;
using task_view::SankeyGraph;

namespace {

struct Built {
  std::vector<Sequence> sequences;
  std::vector<CollapsedSequence> collapsed;
  extraction::FlowTable table;
};

Built build(const SessionStore& store, const TaskDefinition& task) {
  Built b;
  b.sequences = extraction::extract_sequences(store, task);
  for (const auto& s : b.sequences) b.collapsed.push_back(extraction::collapse_repeats(s, task.aggregate_elements));
  b.table = extraction::assign_flow_ids(task.name, b.collapsed);
  return b;
}

/// `copies` sessions of each given element path, one episode each, 1 s apart.
SessionStore path_store(const std::vector<std::pair<std::vector<std::string>, int>>& paths) {
  std::vector<InteractionEvent> events;
  int n = 0;
  for (const auto& [path, copies] : paths) {
    for (int c = 0; c < copies; ++c) {
      const auto id = "s" + std::to_string(n++);
      Millis t = 0;
      for (const auto& el : path) events.push_back(ev(id, t += 1'000, el));
    }
  }
  return ingest::assemble_store(events, {}, {});
}

CollapsedSequence groups_at(std::initializer_list<std::pair<Millis, Millis>> spans) {
  CollapsedSequence c;
  c.sequence_id = "x";
  int k = 0;
  for (const auto& [a, b] : spans) c.groups.push_back({"E" + std::to_string(k++), Gesture::tap, a, b, 1});
  return c;
}

SessionStore random_store(std::uint64_t seed, int sessions) {
  std::mt19937_64 rng(seed);
  std::vector<InteractionEvent> events;
  for (int k = 0; k < sessions; ++k) {
    auto s = oracle::random_session(rng, "r" + std::to_string(k), 40);
    events.insert(events.end(), s.begin(), s.end());
  }
  return ingest::assemble_store(events, {}, {});
}

}  // namespace

TEST_SUITE("task_view") {
  TEST_CASE("single flow of ten sequences is a path graph") {
    const auto b = build(path_store({{{"NavigateToButton", "List", "StartNavigationButton"}, 10}}), navigation_task());
    const auto g = task_view::build_sankey(b.table, b.collapsed, 0.005);
    CHECK(g.nodes.size() == 3);
    REQUIRE(g.links.size() == 2);
    for (const auto& l : g.links) {
      CHECK(l.weight == 10);
      CHECK(g.nodes[l.target].step == g.nodes[l.source].step + 1);
      CHECK(task_view::link_summary(g, l.id).relative == 1.0);
    }
    const auto mid = task_view::node_summary(g, 1);
    CHECK(mid.incoming.size() == 1);
    CHECK(mid.outgoing.size() == 1);
    CHECK(mid.node.cardinality == 10);
    CHECK(task_view::node_summary(g, 0).incoming.empty());
    CHECK(g.totals.sequences_before == 10);
    CHECK(g.totals.sequences_after == 10);
    CHECK_FALSE(g.below_threshold);
    // Equal means everywhere: the degenerate normalization.
    for (const auto& l : g.links) CHECK(l.normalized_time == 0.5);
  }

  TEST_CASE("step-1 cardinalities follow the path split") {
    const auto b = build(path_store({{{"NavigateToButton", "OnScreenKeyboard", "List", "StartNavigationButton"}, 62},
                                     {{"NavigateToButton", "PreviousDestinationsButton", "List", "StartNavigationButton"}, 28},
                                     {{"NavigateToButton", "FavoritesButton", "List", "StartNavigationButton"}, 7},
                                     {{"NavigateToButton", "TextField", "OnScreenKeyboard", "List", "StartNavigationButton"}, 3}}),
                         navigation_task());
    const auto g = task_view::build_sankey(b.table, b.collapsed, 0.005);
    REQUIRE(g.nodes[0].step == 0);
    CHECK(g.nodes[0].cardinality == 100);
    std::map<std::string, std::size_t> step1;
    for (const auto& n : g.nodes) {
      if (n.step == 1) step1[n.label] = n.cardinality;
    }
    CHECK(step1["OnScreenKeyboard_tap"] == 62);
    CHECK(step1["PreviousDestinationsButton_tap"] == 28);
    CHECK(step1["FavoritesButton_tap"] == 7);
    CHECK(step1["TextField_tap"] == 3);
    // Vertical order inside a step: descending cardinality.
    CHECK(g.nodes[1].label == "OnScreenKeyboard_tap");
    CHECK(g.nodes[4].label == "TextField_tap");

    const auto& keyboard_link = g.links[0];
    CHECK(keyboard_link.source == 0);
    CHECK(keyboard_link.target == 1);
    const auto s = task_view::link_summary(g, keyboard_link.id);
    CHECK(s.weight == 62);
    CHECK(s.relative == doctest::Approx(0.62));
  }

  TEST_CASE("p_min 0.005 drops a 4-in-1000 flow and keeps a 6-in-1000 flow") {
    const auto b = build(path_store({{{"NavigateToButton", "OnScreenKeyboard", "List", "StartNavigationButton"}, 990},
                                     {{"NavigateToButton", "FavoritesButton", "List", "StartNavigationButton"}, 6},
                                     {{"NavigateToButton", "HelpButton", "List", "StartNavigationButton"}, 4}}),
                         navigation_task());
    REQUIRE(b.table.sequence_count() == 1000);
    const auto g = task_view::build_sankey(b.table, b.collapsed, 0.005);
    auto has = [&](const std::string& label) {
      return std::any_of(g.nodes.begin(), g.nodes.end(), [&](const auto& n) { return n.label == label; });
    };
    CHECK(has("FavoritesButton_tap"));
    CHECK_FALSE(has("HelpButton_tap"));
    CHECK(g.totals.flows_before == 3);
    CHECK(g.totals.flows_after == 2);
    CHECK(g.totals.sequences_after == 996);
  }

  TEST_CASE("everything filtered out is flagged below threshold") {
    const auto b = build(path_store({{{"NavigateToButton", "StartNavigationButton"}, 3}}), navigation_task());
    const auto g = task_view::build_sankey(b.table, b.collapsed, 1.0);
    CHECK(g.below_threshold);
    CHECK(g.nodes.empty());
    CHECK(g.links.empty());

    const auto empty = task_view::build_sankey(extraction::FlowTable{"t", {}}, {}, 0.1);
    CHECK_FALSE(empty.below_threshold);
    CHECK(empty.nodes.empty());
  }

  TEST_CASE("p_min outside [0,1] is rejected") {
    CHECK_THROWS_AS(task_view::build_sankey(extraction::FlowTable{}, {}, -0.01), ConfigError);
    CHECK_THROWS_AS(task_view::build_sankey(extraction::FlowTable{}, {}, 1.01), ConfigError);
  }

  TEST_CASE("transition durations") {
    CHECK(task_view::transition_duration(groups_at({{1'000, 1'000}, {3'300, 3'300}}), 0) == 2'300);
    CHECK(task_view::transition_duration(groups_at({{0, 0}, {2'000, 9'000}, {10'000, 10'000}}), 1) == 8'000);
    CHECK(task_view::transition_duration(groups_at({{500, 500}, {500, 500}}), 0) == 0);
    CHECK_THROWS_AS(task_view::transition_duration(groups_at({{0, 0}}), 0), DomainError);
  }

  TEST_CASE("min-max normalization") {
    SankeyGraph g;
    for (double m : {3'000.0, 2'000.0, 4'000.0}) g.links.push_back({g.links.size(), 0, 1, 1, m, 0.0});
    const auto n = task_view::normalize_link_times(g);
    CHECK(n.links[0].normalized_time == 0.5);
    CHECK(n.links[1].normalized_time == 0.0);
    CHECK(n.links[2].normalized_time == 1.0);

    SankeyGraph single;
    single.links.push_back({0, 0, 1, 1, 1234.0, 0.0});
    CHECK(task_view::normalize_link_times(single).links[0].normalized_time == 0.5);
  }

  TEST_CASE("equal labels share a color key across steps") {
    const auto b = build(path_store({{{"NavigateToButton", "List", "HomeButton", "List", "StartNavigationButton"}, 2}}),
                         TaskDefinition{"t", {{"NavigateToButton", Gesture::tap}}, {{"StartNavigationButton", Gesture::tap}}, {}, {}, {}, 0.0});
    const auto g = task_view::build_sankey(b.table, b.collapsed, 0.0);
    std::vector<std::uint32_t> list_keys;
    for (const auto& n : g.nodes) {
      if (n.label == "List_tap") list_keys.push_back(n.color_key);
    }
    REQUIRE(list_keys.size() == 2);
    CHECK(list_keys[0] == list_keys[1]);
    CHECK(task_view::color_key("List_tap") != task_view::color_key("List_drag"));
  }

  TEST_CASE("unknown node or link") {
    const SankeyGraph g;
    CHECK_THROWS_AS(task_view::node_summary(g, 0), NotFoundError);
    CHECK_THROWS_AS(task_view::link_summary(g, 3), NotFoundError);
  }

  TEST_CASE("random stores: brute-force recount, conservation, bounds") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto task = navigation_task();
      const auto b = build(random_store(seed, 400), task);
      const auto g = task_view::build_sankey(b.table, b.collapsed, 0.0);

      std::vector<std::vector<InteractionEvent>> raw;
      for (const auto& s : b.sequences) raw.push_back(s.events);
      const auto tally = oracle::link_tally(raw, task.aggregate_elements);
      REQUIRE(g.links.size() == tally.size());
      for (const auto& l : g.links) {
        const auto& src = g.nodes[l.source];
        const auto& dst = g.nodes[l.target];
        CHECK(dst.step == src.step + 1);
        const auto it = tally.find({src.step, src.label, dst.label});
        REQUIRE(it != tally.end());
        CHECK(l.weight == it->second.count);
        CHECK(l.mean_transition_ms == doctest::Approx(static_cast<double>(it->second.total_ms / it->second.count)));
        CHECK(l.normalized_time >= 0.0);
        CHECK(l.normalized_time <= 1.0);
        const auto summary = task_view::link_summary(g, l.id);
        CHECK(summary.relative == doctest::Approx(static_cast<double>(it->second.count) / static_cast<double>(src.cardinality)));
      }

      for (const auto& n : g.nodes) {
        const auto s = task_view::node_summary(g, n.id);
        std::size_t in = 0, out = 0;
        for (const auto& l : s.incoming) in += l.weight;
        for (const auto& l : s.outgoing) out += l.weight;
        if (n.step == 0) {
          CHECK(in == 0);
          CHECK(out <= n.cardinality);
        } else {
          CHECK(in == n.cardinality);
        }
        if (n.step > 0 && !s.outgoing.empty()) CHECK(out == in);
        // Sinks are end events: a match closes there.
        if (s.outgoing.empty()) CHECK(n.label == "StartNavigationButton_tap");
      }

      // Extreme means map to 0 and 1.
      if (g.links.size() > 1) {
        const auto [lo, hi] = std::minmax_element(g.links.begin(), g.links.end(), [](const auto& a, const auto& c) {
          return a.mean_transition_ms < c.mean_transition_ms;
        });
        if (hi->mean_transition_ms > lo->mean_transition_ms) {
          CHECK(lo->normalized_time == 0.0);
          CHECK(hi->normalized_time == 1.0);
        }
      }

      // Width order equals brute-force count order.
      auto links = g.links;
      std::stable_sort(links.begin(), links.end(), [](const auto& a, const auto& c) { return a.weight < c.weight; });
      for (std::size_t k = 1; k < links.size(); ++k) {
        const auto count = [&](const task_view::SankeyLink& l) {
          return tally.at({g.nodes[l.source].step, g.nodes[l.source].label, g.nodes[l.target].label}).count;
        };
        CHECK(count(links[k - 1]) <= count(links[k]));
      }
    }
  }

  TEST_CASE("raising p_min never grows the graph") {
    const auto task = navigation_task();
    const auto b = build(random_store(77, 600), task);
    std::size_t prev_nodes = SIZE_MAX, prev_links = SIZE_MAX;
    for (double p : {0.0, 0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.5, 1.0}) {
      const auto g = task_view::build_sankey(b.table, b.collapsed, p);
      CHECK(g.nodes.size() <= prev_nodes);
      CHECK(g.links.size() <= prev_links);
      prev_nodes = g.nodes.size();
      prev_links = g.links.size();
    }
  }

  TEST_CASE("permuting the sequence list leaves the graph unchanged") {
    const auto task = navigation_task();
    const auto b = build(random_store(8, 300), task);
    const auto ref = task_view::build_sankey(b.table, b.collapsed, 0.0);
    auto shuffled = b.collapsed;
    std::mt19937_64 rng(1);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto g = task_view::build_sankey(b.table, shuffled, 0.0);
    REQUIRE(g.nodes.size() == ref.nodes.size());
    REQUIRE(g.links.size() == ref.links.size());
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
      CHECK(g.nodes[k].label == ref.nodes[k].label);
      CHECK(g.nodes[k].step == ref.nodes[k].step);
      CHECK(g.nodes[k].cardinality == ref.nodes[k].cardinality);
    }
    for (std::size_t k = 0; k < g.links.size(); ++k) {
      CHECK(g.links[k].source == ref.links[k].source);
      CHECK(g.links[k].target == ref.links[k].target);
      CHECK(g.links[k].weight == ref.links[k].weight);
      CHECK(g.links[k].mean_transition_ms == ref.links[k].mean_transition_ms);
    }
  }
}
