#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "flowscope/ingest.hpp"
#include "flowscope/model.hpp"

namespace flowscope::synth {

/// Lognormal duration parameterized by its median: median * exp(sigma * Z).
struct LognormalMs {
  double median_ms = 1000.0;
  double sigma = 0.3;
};

/// One way of completing the task. Steps are event labels ("Element_gesture"); a step whose
/// element is the keyboard element expands into a run of keyboard taps.
struct PathTemplate {
  std::string name;
  double probability = 0.0;
  std::vector<std::string> steps;
};

/// Time from the last event of step `from` to the first event of step `to`.
struct TransitionModel {
  std::string from;
  std::string to;
  LognormalMs time;
};

struct KeyboardModel {
  std::string element = "OnScreenKeyboard";
  int min_taps = 8;
  int max_taps = 25;
  LognormalMs inter_tap{330.0, 0.35};
};

struct GlanceModel {
  std::string display_region = "CENTER_DISPLAY";
  std::string road_region = "ROAD";
  /// Chance that an interaction not already covered by a display glance starts one.
  double probability = 0.7;
  LognormalMs duration{1200.0, 0.5};
  /// How far before the interaction the glance starts.
  LognormalMs lead{250.0, 0.4};
};

struct DrivingModel {
  double cruise_min_kmh = 40.0;
  double cruise_max_kmh = 110.0;
  double typing_dip_kmh = 12.0;
  double steering_noise_deg = 1.2;
  double stop_and_type_probability = 0.05;
};

struct NoiseModel {
  std::vector<std::string> elements = {"HomeButton_tap", "MediaButton_tap", "VolumeSlider_drag", "ClimateButton_tap",
                                       "PhoneButton_tap"};
  int min_events = 0;
  int max_events = 3;
  LognormalMs gap{4000.0, 0.6};
};

struct FleetConfig {
  std::uint64_t seed = 42;
  std::size_t n_sessions = 1000;
  std::size_t episodes_per_session = 1;
  std::vector<PathTemplate> paths;
  std::vector<TransitionModel> transitions;
  LognormalMs default_transition{1500.0, 0.35};
  /// Idle time between the surrounding noise and a task episode.
  LognormalMs episode_gap{6000.0, 0.5};
  Millis session_tail_ms = 8000;
  KeyboardModel keyboard;
  GlanceModel glance;
  DrivingModel driving;
  NoiseModel noise;

  /// Throws ConfigError.
  void validate() const;
};

/// Navigation-task fleet: keyboard / previous destinations / favorites / text field at 62/28/7/3 %.
FleetConfig default_fleet_config();

/// Missing keys keep their defaults; unknown keys are rejected. Throws ConfigError.
FleetConfig parse_fleet_config(std::istream& in);
FleetConfig load_fleet_config(const std::filesystem::path& path);
std::string fleet_config_json(const FleetConfig& config);

/// One generated session plus the ground truth behind it.
struct GeneratedSession {
  Session session;
  /// Index into FleetConfig::paths for each episode.
  std::vector<std::size_t> episode_paths;
  /// [first, last] event timestamp of each episode.
  std::vector<std::pair<Millis, Millis>> episode_spans;
  bool stop_and_type = false;
};

/// Deterministic in (config.seed, index); independent of every other session.
GeneratedSession generate_session(const FleetConfig& config, std::size_t index);

std::string session_name(std::size_t index);

struct FleetData {
  std::vector<InteractionEvent> events;
  std::vector<GlanceRecord> glances;
  std::vector<DrivingSample> driving;
};

FleetData generate_fleet_data(const FleetConfig& config);

/// Writes events.jsonl, glances.jsonl, driving.jsonl and manifest.json into out_dir.
ingest::LogBundle generate_fleet(const FleetConfig& config, const std::filesystem::path& out_dir);

}  // namespace flowscope::synth
