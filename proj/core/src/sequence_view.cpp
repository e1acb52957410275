#include "flowscope/sequence_view.hpp"

#include <algorithm>
#include <cmath>

#include "flowscope/error.hpp"

namespace flowscope::sequence_view {

std::string_view to_string(GlanceClass c) { return c == GlanceClass::long_glance ? "long" : "short"; }

GlanceClass classify_glance(Millis duration_ms, Millis threshold_ms) {
  if (duration_ms <= 0) throw DomainError("glance duration must be positive");
  return duration_ms > threshold_ms ? GlanceClass::long_glance : GlanceClass::short_glance;
}

SequenceTimeline build_timeline(const Sequence& sequence, const SessionStore& store, const TimelineOptions& options) {
  if (options.pad_ms < 0) throw ConfigError("pad_ms must be non-negative");
  if (sequence.events.empty()) throw DomainError("timeline of an empty sequence");
  const Session& session = store.at(sequence.session_id);

  SequenceTimeline tl;
  tl.sequence_id = sequence.sequence_id;
  tl.session_id = sequence.session_id;
  tl.options = options;
  tl.flags = {!session.events.empty(), !session.glances.empty(), !session.driving.empty()};

  tl.t0 = sequence.events.front().ts - options.pad_ms;
  tl.t1 = sequence.events.back().ts + options.pad_ms;
  if (auto bounds = session.bounds()) {
    tl.t0 = std::max(tl.t0, bounds->first);
    tl.t1 = std::min(tl.t1, bounds->second);
  }

  for (const auto& e : sequence.events) tl.interactions.push_back({e.ts, event_label(e)});

  for (const auto& g : session.glances) {
    if (g.region_id != options.display_region || g.end <= tl.t0 || g.start >= tl.t1) continue;
    const Millis start = std::max(g.start, tl.t0);
    const Millis end = std::min(g.end, tl.t1);
    tl.glances.push_back({start, end, end - start, classify_glance(end - start, options.long_glance_threshold_ms)});
  }

  for (const auto& d : session.driving) {
    if (d.ts < tl.t0 || d.ts > tl.t1) continue;
    tl.speed.push_back({d.ts, d.speed_kmh});
    tl.steering.push_back({d.ts, d.steering_deg});
  }
  return tl;
}

SequenceTimeline build_timeline(std::string_view sequence_id, std::span<const Sequence> sequences,
                                const SessionStore& store, const TimelineOptions& options) {
  auto it = std::find_if(sequences.begin(), sequences.end(),
                         [&](const Sequence& s) { return s.sequence_id == sequence_id; });
  if (it == sequences.end()) throw NotFoundError("unknown sequence '" + std::string(sequence_id) + "'");
  return build_timeline(*it, store, options);
}

const SeriesPoint& nearest_sample(std::span<const SeriesPoint> series, Millis ts) {
  if (series.empty()) throw DomainError("nearest_sample on an empty series");
  auto it = std::lower_bound(series.begin(), series.end(), ts,
                             [](const SeriesPoint& p, Millis t) { return p.ts < t; });
  if (it == series.end()) return series.back();
  if (it == series.begin()) return *it;
  auto prev = std::prev(it);
  return (ts - prev->ts) <= (it->ts - ts) ? *prev : *it;
}

TimelineMetrics timeline_metrics(const SequenceTimeline& tl) {
  TimelineMetrics m;
  m.interaction_count = tl.interactions.size();
  m.glance_count = tl.glances.size();
  for (const auto& g : tl.glances) {
    m.total_glance_ms += g.duration;
    if (g.glance_class == GlanceClass::long_glance) ++m.long_glance_count;
  }
  if (!tl.speed.empty()) {
    double sum = 0.0;
    for (const auto& p : tl.speed) sum += p.value;
    m.mean_speed = sum / static_cast<double>(tl.speed.size());
    if (!tl.interactions.empty()) {
      m.speed_delta = nearest_sample(tl.speed, tl.interactions.back().ts).value -
                      nearest_sample(tl.speed, tl.interactions.front().ts).value;
    }
  }
  if (!tl.steering.empty()) {
    const double ref = tl.steering.front().value;
    double worst = 0.0;
    for (const auto& p : tl.steering) worst = std::max(worst, std::abs(p.value - ref));
    m.max_abs_steering_delta = worst;
  }
  return m;
}

}  // namespace flowscope::sequence_view
