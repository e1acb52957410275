#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace flowscope {

/// Milliseconds relative to the (possibly rebased) session epoch.
using Millis = std::int64_t;

enum class Gesture { tap, drag, other };

std::string_view to_string(Gesture g);

/// Exact parse; nullopt for anything outside {"tap","drag","other"}.
std::optional<Gesture> parse_gesture(std::string_view text);

/// One timestamped touch interaction.
struct InteractionEvent {
  std::string session_id;
  Millis ts = 0;
  std::string ui_element;
  Gesture gesture = Gesture::tap;

  friend bool operator==(const InteractionEvent&, const InteractionEvent&) = default;
};

/// "Element_gesture", the label used for flows and Sankey nodes.
std::string event_label(std::string_view ui_element, Gesture gesture);
inline std::string event_label(const InteractionEvent& e) { return event_label(e.ui_element, e.gesture); }

/// A glance interval toward one region of interest.
struct GlanceRecord {
  std::string session_id;
  Millis start = 0;
  Millis end = 0;
  std::string region_id;

  Millis duration() const { return end - start; }
  friend bool operator==(const GlanceRecord&, const GlanceRecord&) = default;
};

/// One 5 Hz driving sample.
struct DrivingSample {
  std::string session_id;
  Millis ts = 0;
  double speed_kmh = 0.0;
  double steering_deg = 0.0;

  friend bool operator==(const DrivingSample&, const DrivingSample&) = default;
};

inline constexpr Millis kDrivingPeriodMs = 200;
/// Gaps above this between consecutive driving samples are reported as anomalies.
inline constexpr Millis kMaxDrivingGapMs = 400;

/// Matches an event by element and, optionally, gesture (nullopt = any gesture).
struct EventMatcher {
  std::string element;
  std::optional<Gesture> gesture;

  bool matches(const InteractionEvent& e) const {
    return e.ui_element == element && (!gesture || *gesture == e.gesture);
  }
  friend bool operator==(const EventMatcher&, const EventMatcher&) = default;
};

bool matches_any(const std::vector<EventMatcher>& matchers, const InteractionEvent& e);

/// Start/end conditions, cleansing criteria and view defaults for one task.
struct TaskDefinition {
  std::string name;
  std::vector<EventMatcher> start_events;
  std::vector<EventMatcher> end_events;
  std::vector<EventMatcher> termination_elements;
  std::optional<Millis> t_max;
  std::set<std::string> aggregate_elements;
  double p_min = 0.0;

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
  friend bool operator==(const TaskDefinition&, const TaskDefinition&) = default;
};

/// One extracted task instance.
struct Sequence {
  std::string sequence_id;
  std::string task_id;
  std::string flow_id;
  std::string session_id;
  std::vector<InteractionEvent> events;

  friend bool operator==(const Sequence&, const Sequence&) = default;
};

struct Session {
  std::string id;
  std::vector<InteractionEvent> events;
  std::vector<GlanceRecord> glances;
  std::vector<DrivingSample> driving;

  /// Earliest and latest timestamp over all channels; nullopt for an empty session.
  std::optional<std::pair<Millis, Millis>> bounds() const;
  friend bool operator==(const Session&, const Session&) = default;
};

using SessionMap = std::map<std::string, Session, std::less<>>;

/// Immutable collection of sessions keyed by session id.
class SessionStore {
 public:
  SessionStore() = default;
  explicit SessionStore(SessionMap sessions) : sessions_(std::move(sessions)) {}

  const Session* find(std::string_view id) const;
  /// Throws NotFoundError.
  const Session& at(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  std::size_t size() const { return sessions_.size(); }
  bool empty() const { return sessions_.empty(); }
  const SessionMap& sessions() const { return sessions_; }

  friend bool operator==(const SessionStore&, const SessionStore&) = default;

 private:
  SessionMap sessions_;
};

struct ValidationIssue {
  enum class Kind { ordering, negative_duration, sampling_gap, invalid_value };
  Kind kind;
  std::string message;
  /// Index into the channel the issue was found in.
  std::size_t index = 0;
};

struct ValidationReport {
  std::string session_id;
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  std::size_t count(ValidationIssue::Kind kind) const;
};

/// Checks a stored session against the model invariants. Throws NotFoundError.
ValidationReport validate_session(std::string_view session_id, const SessionStore& store);

}  // namespace flowscope
