#include "flowscope/model.hpp"

#include <algorithm>

#include "flowscope/error.hpp"

namespace flowscope {

std::string_view to_string(Gesture g) {
  switch (g) {
    case Gesture::tap:
      return "tap";
    case Gesture::drag:
      return "drag";
    case Gesture::other:
      return "other";
  }
  return "other";
}

std::optional<Gesture> parse_gesture(std::string_view text) {
  if (text == "tap") return Gesture::tap;
  if (text == "drag") return Gesture::drag;
  if (text == "other") return Gesture::other;
  return std::nullopt;
}

std::string event_label(std::string_view ui_element, Gesture gesture) {
  std::string out(ui_element);
  out += '_';
  out += to_string(gesture);
  return out;
}

bool matches_any(const std::vector<EventMatcher>& matchers, const InteractionEvent& e) {
  return std::any_of(matchers.begin(), matchers.end(),
                     [&](const EventMatcher& m) { return m.matches(e); });
}

namespace {

bool valid_task_name(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-' || c == '.';
  });
}

}  // namespace

void TaskDefinition::validate() const {
  // Task names become sequence-id prefixes and URL path segments.
  if (!valid_task_name(name)) {
    throw ConfigError("task name must be non-empty and use only [A-Za-z0-9_.-]: '" + name + "'");
  }
  if (start_events.empty()) throw ConfigError("task '" + name + "': start events must not be empty");
  if (end_events.empty()) throw ConfigError("task '" + name + "': end events must not be empty");
  auto check_elements = [&](const std::vector<EventMatcher>& ms, const char* what) {
    for (const auto& m : ms) {
      if (m.element.empty()) throw ConfigError("task '" + name + "': empty element in " + what);
    }
  };
  check_elements(start_events, "start");
  check_elements(end_events, "end");
  check_elements(termination_elements, "termination");
  if (t_max && *t_max <= 0) throw ConfigError("task '" + name + "': t_max must be positive");
  if (!(p_min >= 0.0 && p_min <= 1.0)) throw ConfigError("task '" + name + "': p_min must lie in [0,1]");
}

std::optional<std::pair<Millis, Millis>> Session::bounds() const {
  std::optional<std::pair<Millis, Millis>> out;
  auto extend = [&](Millis lo, Millis hi) {
    if (!out) {
      out.emplace(lo, hi);
    } else {
      out->first = std::min(out->first, lo);
      out->second = std::max(out->second, hi);
    }
  };
  for (const auto& e : events) extend(e.ts, e.ts);
  for (const auto& g : glances) extend(std::min(g.start, g.end), std::max(g.start, g.end));
  for (const auto& d : driving) extend(d.ts, d.ts);
  return out;
}

const Session* SessionStore::find(std::string_view id) const {
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : &it->second;
}

const Session& SessionStore::at(std::string_view id) const {
  if (const Session* s = find(id)) return *s;
  throw NotFoundError("unknown session '" + std::string(id) + "'");
}

std::size_t ValidationReport::count(ValidationIssue::Kind kind) const {
  return static_cast<std::size_t>(
      std::count_if(issues.begin(), issues.end(), [&](const ValidationIssue& i) { return i.kind == kind; }));
}

ValidationReport validate_session(std::string_view session_id, const SessionStore& store) {
  using Kind = ValidationIssue::Kind;
  const Session& s = store.at(session_id);
  ValidationReport report{s.id, {}};
  auto add = [&](Kind k, std::string msg, std::size_t i) { report.issues.push_back({k, std::move(msg), i}); };

  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto& e = s.events[i];
    if (e.ts < 0) add(Kind::invalid_value, "negative event timestamp", i);
    if (e.ui_element.empty()) add(Kind::invalid_value, "empty ui_element", i);
    if (i > 0 && e.ts < s.events[i - 1].ts) add(Kind::ordering, "events out of order", i);
  }

  for (std::size_t i = 0; i < s.glances.size(); ++i) {
    const auto& g = s.glances[i];
    if (g.end < g.start) {
      add(Kind::negative_duration, "negative glance duration", i);
    } else if (g.end == g.start) {
      add(Kind::negative_duration, "empty glance", i);
    }
    if (i > 0 && g.start < s.glances[i - 1].start) add(Kind::ordering, "glances out of order", i);
  }

  for (std::size_t i = 0; i < s.driving.size(); ++i) {
    const auto& d = s.driving[i];
    if (d.speed_kmh < 0.0) add(Kind::invalid_value, "negative speed", i);
    if (i == 0) continue;
    const Millis gap = d.ts - s.driving[i - 1].ts;
    if (gap <= 0) {
      add(Kind::ordering, "driving samples not strictly increasing", i);
    } else if (gap > kMaxDrivingGapMs) {
      add(Kind::sampling_gap, "driving sampling gap of " + std::to_string(gap) + " ms", i);
    }
  }
  return report;
}

}  // namespace flowscope
