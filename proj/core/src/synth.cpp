#include "flowscope/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <random>

#include <json.hpp>

#include "flowscope/error.hpp"

namespace flowscope::synth {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Splits "Element_gesture" at the last underscore.
std::pair<std::string, Gesture> split_label(const std::string& label) {
  const auto pos = label.rfind('_');
  if (pos == std::string::npos || pos == 0) throw ConfigError("step label must look like Element_gesture: " + label);
  auto gesture = parse_gesture(std::string_view(label).substr(pos + 1));
  if (!gesture) throw ConfigError("unknown gesture in step label: " + label);
  return {label.substr(0, pos), *gesture};
}

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

/// 0 outside, 1 on [s0, s1], smooth ramps of length ramp_in before and ramp_out after.
double plateau(double t, double s0, double s1, double ramp_in, double ramp_out) {
  if (t < s0) return t <= s0 - ramp_in ? 0.0 : smoothstep((t - (s0 - ramp_in)) / ramp_in);
  if (t <= s1) return 1.0;
  return t >= s1 + ramp_out ? 0.0 : 1.0 - smoothstep((t - s1) / ramp_out);
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

class SessionRng {
 public:
  SessionRng(std::uint64_t seed, std::size_t index) : rng_(splitmix64(seed ^ splitmix64(index + 1))) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  double uniform(double lo, double hi) { return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return normal_(rng_); }
  /// Rounded to whole milliseconds, at least 1 ms.
  Millis duration(const LognormalMs& m) {
    return std::max<Millis>(1, std::llround(m.median_ms * std::exp(m.sigma * normal())));
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct Episode {
  Millis first = 0;
  Millis last = 0;
  bool stopped = false;
};

}  // namespace

void FleetConfig::validate() const {
  if (paths.empty()) throw ConfigError("fleet config needs at least one path");
  double total = 0.0;
  for (const auto& p : paths) {
    if (!(p.probability >= 0.0)) throw ConfigError("path '" + p.name + "' has a negative probability");
    if (p.steps.empty()) throw ConfigError("path '" + p.name + "' has no steps");
    for (const auto& s : p.steps) split_label(s);
    total += p.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("path probabilities must sum to 1 (got " + std::to_string(total) + ")");

  auto check = [](const LognormalMs& m, const std::string& what) {
    if (!(m.median_ms > 0.0) || !(m.sigma >= 0.0)) throw ConfigError(what + ": median_ms must be > 0 and sigma >= 0");
  };
  check(default_transition, "default_transition");
  check(episode_gap, "episode_gap");
  for (const auto& t : transitions) check(t.time, "transition " + t.from + " -> " + t.to);
  check(keyboard.inter_tap, "keyboard.inter_tap");
  check(glance.duration, "glance.duration");
  check(glance.lead, "glance.lead");
  check(noise.gap, "noise.gap");
  if (keyboard.min_taps < 1 || keyboard.max_taps < keyboard.min_taps) throw ConfigError("keyboard tap range is invalid");
  if (noise.min_events < 0 || noise.max_events < noise.min_events) throw ConfigError("noise event range is invalid");
  if (noise.max_events > 0 && noise.elements.empty()) throw ConfigError("noise events need at least one element");
  for (const auto& e : noise.elements) split_label(e);
  if (!(glance.probability >= 0.0 && glance.probability <= 1.0)) throw ConfigError("glance.probability must lie in [0,1]");
  if (glance.display_region.empty() || glance.road_region.empty() || glance.display_region == glance.road_region) {
    throw ConfigError("glance regions must be non-empty and distinct");
  }
  if (!(driving.cruise_min_kmh >= 0.0) || driving.cruise_max_kmh < driving.cruise_min_kmh) {
    throw ConfigError("driving cruise range is invalid");
  }
  if (!(driving.typing_dip_kmh >= 0.0) || !(driving.steering_noise_deg >= 0.0)) {
    throw ConfigError("driving dip and steering noise must be non-negative");
  }
  if (!(driving.stop_and_type_probability >= 0.0 && driving.stop_and_type_probability <= 1.0)) {
    throw ConfigError("driving.stop_and_type_probability must lie in [0,1]");
  }
  if (episodes_per_session < 1) throw ConfigError("episodes_per_session must be >= 1");
  if (session_tail_ms < 0) throw ConfigError("session_tail_ms must be non-negative");
}

FleetConfig default_fleet_config() {
  FleetConfig c;
  c.paths = {
      {"keyboard", 0.62, {"NavigateToButton_tap", "OnScreenKeyboard_tap", "List_tap", "StartNavigationButton_tap"}},
      {"previous_destinations",
       0.28,
       {"NavigateToButton_tap", "PreviousDestinationsButton_tap", "List_tap", "StartNavigationButton_tap"}},
      {"favorites", 0.07, {"NavigateToButton_tap", "FavoritesButton_tap", "List_tap", "StartNavigationButton_tap"}},
      {"text_field",
       0.03,
       {"NavigateToButton_tap", "TextField_tap", "OnScreenKeyboard_tap", "List_tap", "StartNavigationButton_tap"}},
  };
  c.transitions = {
      {"NavigateToButton_tap", "OnScreenKeyboard_tap", {1800.0, 0.35}},
      {"NavigateToButton_tap", "PreviousDestinationsButton_tap", {1800.0, 0.35}},
      {"NavigateToButton_tap", "FavoritesButton_tap", {1500.0, 0.35}},
      {"NavigateToButton_tap", "TextField_tap", {1500.0, 0.35}},
      {"TextField_tap", "OnScreenKeyboard_tap", {1200.0, 0.35}},
      {"OnScreenKeyboard_tap", "List_tap", {1800.0, 0.4}},
      {"PreviousDestinationsButton_tap", "List_tap", {3000.0, 0.3}},
      {"FavoritesButton_tap", "List_tap", {2300.0, 0.3}},
      {"List_tap", "StartNavigationButton_tap", {1200.0, 0.3}},
  };
  return c;
}

// ---------------------------------------------------------------------------
// JSON config

namespace {

void check_keys(const json& j, const std::string& ctx, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(ctx + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + ctx);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_lognormal(const json& j, const char* key, LognormalMs& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  check_keys(v, key, {"median_ms", "sigma"});
  read(v, "median_ms", out.median_ms);
  read(v, "sigma", out.sigma);
}

json lognormal_json(const LognormalMs& m) { return {{"median_ms", m.median_ms}, {"sigma", m.sigma}}; }

}  // namespace

FleetConfig parse_fleet_config(std::istream& in) {
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("fleet config is not valid JSON");
  FleetConfig c = default_fleet_config();
  try {
    check_keys(doc, "fleet config",
               {"seed", "n_sessions", "episodes_per_session", "paths", "transitions", "default_transition",
                "episode_gap", "session_tail_ms", "keyboard", "glance", "driving", "noise"});
    read(doc, "seed", c.seed);
    read(doc, "n_sessions", c.n_sessions);
    read(doc, "episodes_per_session", c.episodes_per_session);
    read(doc, "session_tail_ms", c.session_tail_ms);
    read_lognormal(doc, "default_transition", c.default_transition);
    read_lognormal(doc, "episode_gap", c.episode_gap);
    if (doc.contains("paths")) {
      c.paths.clear();
      for (const auto& p : doc.at("paths")) {
        check_keys(p, "path", {"name", "probability", "steps"});
        PathTemplate t;
        read(p, "name", t.name);
        t.probability = p.at("probability").get<double>();
        t.steps = p.at("steps").get<std::vector<std::string>>();
        c.paths.push_back(std::move(t));
      }
    }
    if (doc.contains("transitions")) {
      c.transitions.clear();
      for (const auto& t : doc.at("transitions")) {
        check_keys(t, "transition", {"from", "to", "median_ms", "sigma"});
        TransitionModel m;
        m.from = t.at("from").get<std::string>();
        m.to = t.at("to").get<std::string>();
        m.time.median_ms = t.at("median_ms").get<double>();
        read(t, "sigma", m.time.sigma);
        c.transitions.push_back(std::move(m));
      }
    }
    if (doc.contains("keyboard")) {
      const auto& k = doc.at("keyboard");
      check_keys(k, "keyboard", {"element", "min_taps", "max_taps", "inter_tap"});
      read(k, "element", c.keyboard.element);
      read(k, "min_taps", c.keyboard.min_taps);
      read(k, "max_taps", c.keyboard.max_taps);
      read_lognormal(k, "inter_tap", c.keyboard.inter_tap);
    }
    if (doc.contains("glance")) {
      const auto& g = doc.at("glance");
      check_keys(g, "glance", {"display_region", "road_region", "probability", "duration", "lead"});
      read(g, "display_region", c.glance.display_region);
      read(g, "road_region", c.glance.road_region);
      read(g, "probability", c.glance.probability);
      read_lognormal(g, "duration", c.glance.duration);
      read_lognormal(g, "lead", c.glance.lead);
    }
    if (doc.contains("driving")) {
      const auto& d = doc.at("driving");
      check_keys(d, "driving",
                 {"cruise_min_kmh", "cruise_max_kmh", "typing_dip_kmh", "steering_noise_deg", "stop_and_type_probability"});
      read(d, "cruise_min_kmh", c.driving.cruise_min_kmh);
      read(d, "cruise_max_kmh", c.driving.cruise_max_kmh);
      read(d, "typing_dip_kmh", c.driving.typing_dip_kmh);
      read(d, "steering_noise_deg", c.driving.steering_noise_deg);
      read(d, "stop_and_type_probability", c.driving.stop_and_type_probability);
    }
    if (doc.contains("noise")) {
      const auto& n = doc.at("noise");
      check_keys(n, "noise", {"elements", "min_events", "max_events", "gap"});
      read(n, "elements", c.noise.elements);
      read(n, "min_events", c.noise.min_events);
      read(n, "max_events", c.noise.max_events);
      read_lognormal(n, "gap", c.noise.gap);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("fleet config: ") + e.what());
  }
  c.validate();
  return c;
}

FleetConfig load_fleet_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("fleet config not found: " + path.string());
  return parse_fleet_config(in);
}

std::string fleet_config_json(const FleetConfig& c) {
  json paths = json::array();
  for (const auto& p : c.paths) paths.push_back({{"name", p.name}, {"probability", p.probability}, {"steps", p.steps}});
  json transitions = json::array();
  for (const auto& t : c.transitions) {
    transitions.push_back({{"from", t.from}, {"to", t.to}, {"median_ms", t.time.median_ms}, {"sigma", t.time.sigma}});
  }
  json doc = {
      {"seed", c.seed},
      {"n_sessions", c.n_sessions},
      {"episodes_per_session", c.episodes_per_session},
      {"paths", paths},
      {"transitions", transitions},
      {"default_transition", lognormal_json(c.default_transition)},
      {"episode_gap", lognormal_json(c.episode_gap)},
      {"session_tail_ms", c.session_tail_ms},
      {"keyboard",
       {{"element", c.keyboard.element},
        {"min_taps", c.keyboard.min_taps},
        {"max_taps", c.keyboard.max_taps},
        {"inter_tap", lognormal_json(c.keyboard.inter_tap)}}},
      {"glance",
       {{"display_region", c.glance.display_region},
        {"road_region", c.glance.road_region},
        {"probability", c.glance.probability},
        {"duration", lognormal_json(c.glance.duration)},
        {"lead", lognormal_json(c.glance.lead)}}},
      {"driving",
       {{"cruise_min_kmh", c.driving.cruise_min_kmh},
        {"cruise_max_kmh", c.driving.cruise_max_kmh},
        {"typing_dip_kmh", c.driving.typing_dip_kmh},
        {"steering_noise_deg", c.driving.steering_noise_deg},
        {"stop_and_type_probability", c.driving.stop_and_type_probability}}},
      {"noise",
       {{"elements", c.noise.elements},
        {"min_events", c.noise.min_events},
        {"max_events", c.noise.max_events},
        {"gap", lognormal_json(c.noise.gap)}}},
  };
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Generation

std::string session_name(std::size_t index) {
  auto digits = std::to_string(index + 1);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "session-" + digits;
}

GeneratedSession generate_session(const FleetConfig& config, std::size_t index) {
  SessionRng rng(config.seed, index);
  GeneratedSession out;
  Session& s = out.session;
  s.id = session_name(index);

  auto emit = [&](const std::string& label, Millis ts) {
    auto [element, gesture] = split_label(label);
    s.events.push_back({s.id, ts, std::move(element), gesture});
  };
  auto emit_noise = [&](Millis& t) {
    const int n = rng.uniform_int(config.noise.min_events, config.noise.max_events);
    for (int k = 0; k < n; ++k) {
      t += rng.duration(config.noise.gap);
      const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(config.noise.elements.size()) - 1));
      emit(config.noise.elements[pick], t);
    }
  };
  auto transition = [&](const std::string& from, const std::string& to) -> const LognormalMs& {
    for (const auto& m : config.transitions) {
      if (m.from == from && m.to == to) return m.time;
    }
    return config.default_transition;
  };

  const bool stop_and_type = rng.uniform() < config.driving.stop_and_type_probability;
  out.stop_and_type = stop_and_type;
  const double cruise = rng.uniform(config.driving.cruise_min_kmh, config.driving.cruise_max_kmh);

  Millis t = 0;
  emit_noise(t);
  std::vector<Episode> episodes;
  for (std::size_t e = 0; e < config.episodes_per_session; ++e) {
    double u = rng.uniform();
    std::size_t path = config.paths.size() - 1;
    for (std::size_t p = 0; p < config.paths.size(); ++p) {
      if (u < config.paths[p].probability) {
        path = p;
        break;
      }
      u -= config.paths[p].probability;
    }
    t += rng.duration(config.episode_gap);
    const Millis first = t;
    const auto& steps = config.paths[path].steps;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      if (k > 0) t += rng.duration(transition(steps[k - 1], steps[k]));
      if (split_label(steps[k]).first == config.keyboard.element) {
        const int taps = rng.uniform_int(config.keyboard.min_taps, config.keyboard.max_taps);
        for (int tap = 0; tap < taps; ++tap) {
          if (tap > 0) t += rng.duration(config.keyboard.inter_tap);
          emit(steps[k], t);
        }
      } else {
        emit(steps[k], t);
      }
    }
    out.episode_paths.push_back(path);
    out.episode_spans.emplace_back(first, t);
    episodes.push_back({first, t, stop_and_type});
  }
  emit_noise(t);

  // Display glances, non-overlapping and separated by at least a short road glance.
  constexpr Millis kMinRoadGlance = 150;
  std::vector<std::pair<Millis, Millis>> display;
  Millis covered_until = -kMinRoadGlance;
  for (const auto& ev : s.events) {
    if (ev.ts < covered_until) continue;
    auto stopped = std::find_if(episodes.begin(), episodes.end(),
                                [&](const Episode& ep) { return ep.stopped && ev.ts >= ep.first && ev.ts <= ep.last; });
    if (stopped != episodes.end()) {
      // Parked: two long looks at the display cover the whole episode.
      const Millis mid = stopped->first + (stopped->last - stopped->first) / 2;
      const Millis a0 = std::max({Millis{0}, covered_until + kMinRoadGlance, stopped->first - 500});
      const Millis a1 = std::max(mid, a0 + 1);
      const Millis b0 = a1 + 300;
      const Millis b1 = std::max(stopped->last + 500, b0 + 1);
      display.emplace_back(a0, a1);
      display.emplace_back(b0, b1);
      covered_until = b1;
      continue;
    }
    if (rng.uniform() >= config.glance.probability) continue;
    const Millis start = std::max({Millis{0}, covered_until + kMinRoadGlance, ev.ts - rng.duration(config.glance.lead)});
    if (start > ev.ts) continue;
    const Millis end = std::max(start + rng.duration(config.glance.duration), ev.ts + 100);
    display.emplace_back(start, end);
    covered_until = end;
  }

  const Millis last_event = s.events.empty() ? 0 : s.events.back().ts;
  const Millis session_end = std::max(last_event + config.session_tail_ms, covered_until + 1000);

  Millis cursor = 0;
  for (const auto& [start, end] : display) {
    if (start > cursor) s.glances.push_back({s.id, cursor, start, config.glance.road_region});
    s.glances.push_back({s.id, start, end, config.glance.display_region});
    cursor = end;
  }
  if (session_end > cursor) s.glances.push_back({s.id, cursor, session_end, config.glance.road_region});

  // 5 Hz driving trace.
  double steering = rng.normal() * config.driving.steering_noise_deg;
  constexpr double kSteeringMemory = 0.92;
  const double steering_step = config.driving.steering_noise_deg * std::sqrt(1.0 - kSteeringMemory * kSteeringMemory);
  const double dip = std::min(config.driving.typing_dip_kmh, cruise * 0.5);
  for (Millis ts = 0; ts <= session_end; ts += kDrivingPeriodMs) {
    const double tt = static_cast<double>(ts);
    double reduction = 0.0;
    for (const auto& ep : episodes) {
      if (ep.stopped) {
        reduction += cruise * plateau(tt, static_cast<double>(ep.first) - 1500.0, static_cast<double>(ep.last) + 1000.0,
                                      6000.0, 8000.0);
      } else {
        reduction += dip * plateau(tt, static_cast<double>(ep.first), static_cast<double>(ep.last), 2000.0, 3000.0);
      }
    }
    double speed = 0.0;
    if (reduction < cruise) {
      speed = std::max(0.0, cruise - reduction + 0.3 * rng.normal());
      steering = kSteeringMemory * steering + steering_step * rng.normal();
    }
    s.driving.push_back({s.id, ts, round2(speed), round2(steering)});
  }
  return out;
}

FleetData generate_fleet_data(const FleetConfig& config) {
  config.validate();
  FleetData data;
  for (std::size_t k = 0; k < config.n_sessions; ++k) {
    auto g = generate_session(config, k);
    auto& s = g.session;
    std::move(s.events.begin(), s.events.end(), std::back_inserter(data.events));
    std::move(s.glances.begin(), s.glances.end(), std::back_inserter(data.glances));
    std::move(s.driving.begin(), s.driving.end(), std::back_inserter(data.driving));
  }
  return data;
}

ingest::LogBundle generate_fleet(const FleetConfig& config, const std::filesystem::path& out_dir) {
  const auto data = generate_fleet_data(config);
  std::filesystem::create_directories(out_dir);
  ingest::LogBundle bundle{out_dir / "events.jsonl", out_dir / "glances.jsonl", out_dir / "driving.jsonl",
                           ingest::kSchemaVersion};
  auto open = [](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + p.string());
    return f;
  };
  {
    auto f = open(bundle.events_path);
    ingest::write_event_log(f, data.events);
  }
  {
    auto f = open(bundle.glances_path);
    ingest::write_glance_log(f, data.glances);
  }
  {
    auto f = open(bundle.driving_path);
    ingest::write_driving_log(f, data.driving);
  }
  ingest::write_manifest(out_dir, bundle);
  return bundle;
}

}  // namespace flowscope::synth
