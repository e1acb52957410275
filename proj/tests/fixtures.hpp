#pragma once

// Hand-built sessions shared by the unit and acceptance suites.

#include <string>
#include <vector>

#include "flowscope/ingest.hpp"
#include "flowscope/model.hpp"

namespace flowscope::testing {

inline InteractionEvent ev(const std::string& session, Millis ts, const std::string& element,
                           Gesture g = Gesture::tap) {
  return {session, ts, element, g};
}

inline GlanceRecord glance(const std::string& session, Millis start, Millis end,
                           const std::string& region = "CENTER_DISPLAY") {
  return {session, start, end, region};
}

/// 5 Hz samples on [from, to] with speed(ts) and steering(ts).
template <typename Speed, typename Steering>
std::vector<DrivingSample> drive(const std::string& session, Millis from, Millis to, Speed speed, Steering steering) {
  std::vector<DrivingSample> out;
  for (Millis ts = from; ts <= to; ts += kDrivingPeriodMs) out.push_back({session, ts, speed(ts), steering(ts)});
  return out;
}

inline std::vector<DrivingSample> cruise(const std::string& session, Millis from, Millis to, double kmh = 50.0) {
  return drive(session, from, to, [kmh](Millis) { return kmh; }, [](Millis) { return 0.0; });
}

/// The navigation task used throughout: t_max 60 s, keyboard aggregated, p_min 0.005.
inline TaskDefinition navigation_task() {
  TaskDefinition t;
  t.name = "navigation";
  t.start_events = {{"NavigateToButton", Gesture::tap}};
  t.end_events = {{"StartNavigationButton", Gesture::tap}};
  t.termination_elements = {{"CancelButton", std::nullopt}};
  t.t_max = 60'000;
  t.aggregate_elements = {"OnScreenKeyboard"};
  t.p_min = 0.005;
  return t;
}

struct Fixture {
  std::vector<InteractionEvent> events;
  std::vector<GlanceRecord> glances;
  std::vector<DrivingSample> driving;

  SessionStore store() const { return ingest::assemble_store(events, glances, driving); }
};

/// Keyboard entry with a list drag: 14 interactions over ~19 s, 8 display glances of which
/// 5 exceed 2 s, speed dipping while typing.
inline Fixture keyboard_drag_fixture(const std::string& s = "kbd-drag") {
  Fixture f;
  f.events.push_back(ev(s, 10'000, "NavigateToButton"));
  for (int k = 0; k < 10; ++k) f.events.push_back(ev(s, 12'000 + 900 * k, "OnScreenKeyboard"));
  f.events.push_back(ev(s, 22'000, "List", Gesture::drag));
  f.events.push_back(ev(s, 25'000, "List"));
  f.events.push_back(ev(s, 29'000, "StartNavigationButton"));

  // Display glances: short, long, long, short, long, long, long, short.
  const std::vector<std::pair<Millis, Millis>> display = {{9'500, 10'600},  {11'500, 14'200}, {14'600, 17'000},
                                                          {17'400, 18'300}, {18'700, 21'000}, {21'400, 24'000},
                                                          {24'500, 27'000}, {28'000, 29'500}};
  Millis cursor = 0;
  for (const auto& [a, b] : display) {
    f.glances.push_back(glance(s, cursor, a, "ROAD"));
    f.glances.push_back(glance(s, a, b));
    cursor = b;
  }
  f.glances.push_back(glance(s, cursor, 40'000, "ROAD"));
  // Outside any padded window.
  f.glances.push_back(glance(s, 40'000, 41'000));
  f.glances.push_back(glance(s, 41'000, 45'000, "ROAD"));

  f.driving = drive(
      s, 0, 45'000,
      [](Millis ts) {
        if (ts < 12'000) return 80.0;
        if (ts < 20'000) return 80.0 - 15.0 * static_cast<double>(ts - 12'000) / 8'000.0;
        if (ts < 29'000) return 65.0;
        return std::min(80.0, 65.0 + 15.0 * static_cast<double>(ts - 29'000) / 5'000.0);
      },
      [](Millis ts) { return ts > 12'000 && ts < 16'000 ? 0.5 * static_cast<double>(ts - 12'000) / 4'000.0 : 0.0; });
  return f;
}

/// Previous-destinations path: 4 interactions over ~6 s, 4 short display glances.
inline Fixture previous_destinations_fixture(const std::string& s = "prev-dest") {
  Fixture f;
  f.events = {ev(s, 5'000, "NavigateToButton"), ev(s, 6'600, "PreviousDestinationsButton"), ev(s, 9'500, "List"),
              ev(s, 11'000, "StartNavigationButton")};
  f.glances = {glance(s, 0, 4'700, "ROAD"),       glance(s, 4'700, 5'600),  glance(s, 5'600, 6'200, "ROAD"),
               glance(s, 6'200, 7'800),            glance(s, 7'800, 8'900, "ROAD"), glance(s, 8'900, 10'100),
               glance(s, 10'100, 10'500, "ROAD"), glance(s, 10'500, 11'400), glance(s, 11'400, 16'000, "ROAD")};
  f.driving = drive(
      s, 0, 16'000, [](Millis ts) { return ts < 6'000 ? 60.0 : 58.0; }, [](Millis) { return 0.2; });
  return f;
}

/// Parked typing: the car stops before the first of 30 interactions (25 keyboard taps) and
/// the driver looks at the display twice.
inline Fixture parked_typing_fixture(const std::string& s = "parked") {
  Fixture f;
  f.events.push_back(ev(s, 30'000, "NavigateToButton"));
  f.events.push_back(ev(s, 31'500, "TextField"));
  for (int k = 0; k < 25; ++k) f.events.push_back(ev(s, 33'000 + 1'000 * k, "OnScreenKeyboard"));
  f.events.push_back(ev(s, 58'500, "List", Gesture::drag));
  f.events.push_back(ev(s, 59'500, "List"));
  f.events.push_back(ev(s, 61'000, "StartNavigationButton"));
  f.glances = {glance(s, 0, 29'500, "ROAD"), glance(s, 29'500, 45'000), glance(s, 45'000, 45'500, "ROAD"),
               glance(s, 45'500, 61'500), glance(s, 61'500, 80'000, "ROAD")};
  f.driving = drive(
      s, 0, 80'000,
      [](Millis ts) {
        if (ts < 20'000) return 50.0;
        if (ts < 28'000) return 50.0 * static_cast<double>(28'000 - ts) / 8'000.0;
        if (ts <= 63'000) return 0.0;
        return std::min(50.0, 50.0 * static_cast<double>(ts - 63'000) / 8'000.0);
      },
      [](Millis ts) { return ts < 20'000 ? 0.0 : (ts < 28'000 ? 15.0 : 20.0); });
  return f;
}

}  // namespace flowscope::testing
