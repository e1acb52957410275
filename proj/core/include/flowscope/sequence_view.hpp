#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowscope/model.hpp"

namespace flowscope::sequence_view {

enum class GlanceClass { short_glance, long_glance };

std::string_view to_string(GlanceClass c);

inline constexpr Millis kDefaultLongGlanceMs = 2000;
inline constexpr Millis kDefaultPadMs = 2000;
inline constexpr const char* kDefaultDisplayRegion = "CENTER_DISPLAY";

/// Long iff duration > threshold (strict). Throws DomainError for duration <= 0.
GlanceClass classify_glance(Millis duration_ms, Millis threshold_ms = kDefaultLongGlanceMs);

struct TimelineOptions {
  Millis pad_ms = kDefaultPadMs;
  std::string display_region = kDefaultDisplayRegion;
  Millis long_glance_threshold_ms = kDefaultLongGlanceMs;
};

struct TimelineInteraction {
  Millis ts = 0;
  std::string label;
};

struct TimelineGlance {
  Millis start = 0;
  Millis end = 0;
  Millis duration = 0;
  GlanceClass glance_class = GlanceClass::short_glance;
};

struct SeriesPoint {
  Millis ts = 0;
  double value = 0.0;
};

/// Whether the session carried any data on a channel at all.
struct ChannelFlags {
  bool interactions = false;
  bool glances = false;
  bool driving = false;
};

struct SequenceTimeline {
  std::string sequence_id;
  std::string session_id;
  Millis t0 = 0;
  Millis t1 = 0;
  std::vector<TimelineInteraction> interactions;
  std::vector<TimelineGlance> glances;
  std::vector<SeriesPoint> speed;
  std::vector<SeriesPoint> steering;
  ChannelFlags flags;
  TimelineOptions options;
};

/// Window = [first - pad, last + pad] clipped to the session's bounds. Display-region glances
/// are truncated to the window; driving samples inside the window pass through unresampled.
/// Throws NotFoundError when the session is missing, ConfigError for a negative pad.
SequenceTimeline build_timeline(const Sequence& sequence, const SessionStore& store, const TimelineOptions& options = {});

/// Looks the sequence up by id first; throws NotFoundError for an unknown id.
SequenceTimeline build_timeline(std::string_view sequence_id, std::span<const Sequence> sequences,
                                const SessionStore& store, const TimelineOptions& options = {});

struct TimelineMetrics {
  std::size_t glance_count = 0;
  std::size_t long_glance_count = 0;
  Millis total_glance_ms = 0;
  std::size_t interaction_count = 0;
  // Absent when the window holds no driving samples.
  std::optional<double> mean_speed;
  std::optional<double> speed_delta;
  std::optional<double> max_abs_steering_delta;
};

TimelineMetrics timeline_metrics(const SequenceTimeline& timeline);

/// Nearest sample by time; ties go to the earlier sample. Series must be non-empty.
const SeriesPoint& nearest_sample(std::span<const SeriesPoint> series, Millis ts);

}  // namespace flowscope::sequence_view
