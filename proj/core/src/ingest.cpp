#include "flowscope/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <tuple>
#include <unordered_set>

#include <json.hpp>

#include "flowscope/error.hpp"

namespace flowscope::ingest {

using nlohmann::json;

namespace {

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

/// Checks that `obj` has exactly `fields`; returns an error message or empty.
std::string check_fields(const json& obj, std::initializer_list<const char*> fields) {
  if (!obj.is_object()) return "record is not a JSON object";
  for (const char* f : fields) {
    if (!obj.contains(f)) return std::string("missing field '") + f + "'";
  }
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(fields.begin(), fields.end(), [&](const char* f) { return key == f; }) == fields.end()) {
      return "unexpected field '" + key + "'";
    }
  }
  return {};
}

std::string expect_string(const json& obj, const char* field, bool non_empty) {
  const auto& v = obj.at(field);
  if (!v.is_string()) throw Error(std::string("field '") + field + "' must be a string");
  auto s = v.get<std::string>();
  if (non_empty && s.empty()) throw Error(std::string("field '") + field + "' must not be empty");
  return s;
}

Millis expect_millis(const json& obj, const char* field) {
  const auto& v = obj.at(field);
  if (!v.is_number_integer()) throw Error(std::string("field '") + field + "' must be an integer");
  const Millis ms = v.get<Millis>();
  if (ms < 0) throw Error(std::string("field '") + field + "' must be non-negative");
  return ms;
}

double expect_number(const json& obj, const char* field) {
  const auto& v = obj.at(field);
  if (!v.is_number()) throw Error(std::string("field '") + field + "' must be a number");
  return v.get<double>();
}

/// Drives the shared line loop. `convert` returns the record or throws Error with a message.
template <typename Record, typename Convert>
ParseResult<Record> parse_lines(std::istream& in, std::initializer_list<const char*> fields, Convert convert) {
  ParseResult<Record> result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded()) {
      result.errors.push_back({line_no, "malformed JSON"});
      continue;
    }
    if (auto msg = check_fields(obj, fields); !msg.empty()) {
      result.errors.push_back({line_no, std::move(msg)});
      continue;
    }
    try {
      result.records.push_back(convert(obj, line_no, result.warnings));
    } catch (const Error& e) {
      result.errors.push_back({line_no, e.what()});
    }
  }
  return result;
}

}  // namespace

ParseResult<InteractionEvent> parse_event_log(std::istream& in) {
  return parse_lines<InteractionEvent>(
      in, {"session_id", "ts", "ui_element", "gesture"},
      [](const json& obj, std::size_t line_no, std::vector<ParseIssue>& warnings) {
        InteractionEvent e;
        e.session_id = expect_string(obj, "session_id", true);
        e.ts = expect_millis(obj, "ts");
        e.ui_element = expect_string(obj, "ui_element", true);
        const auto gesture = expect_string(obj, "gesture", false);
        if (auto g = parse_gesture(gesture)) {
          e.gesture = *g;
        } else {
          e.gesture = Gesture::other;
          warnings.push_back({line_no, "unknown gesture '" + gesture + "' mapped to 'other'"});
        }
        return e;
      });
}

ParseResult<GlanceRecord> parse_glance_log(std::istream& in) {
  std::vector<std::size_t> lines;
  auto result = parse_lines<GlanceRecord>(
      in, {"session_id", "start", "end", "region"},
      [&lines](const json& obj, std::size_t line_no, std::vector<ParseIssue>&) {
        GlanceRecord g;
        g.session_id = expect_string(obj, "session_id", true);
        g.start = expect_millis(obj, "start");
        g.end = expect_millis(obj, "end");
        g.region_id = expect_string(obj, "region", true);
        if (g.end == g.start) throw Error("empty glance");
        if (g.end < g.start) throw Error("negative glance duration");
        lines.push_back(line_no);
        return g;
      });

  // Overlapping intervals within a session are kept but reported.
  std::map<std::string, std::vector<std::size_t>> by_session;
  for (std::size_t i = 0; i < result.records.size(); ++i) by_session[result.records[i].session_id].push_back(i);
  for (auto& [_, idx] : by_session) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(result.records[a].start, lines[a]) < std::tie(result.records[b].start, lines[b]);
    });
    Millis reach = std::numeric_limits<Millis>::min();
    for (std::size_t i : idx) {
      if (result.records[i].start < reach) {
        result.warnings.push_back({lines[i], "glance overlaps an earlier glance of the same session"});
      }
      reach = std::max(reach, result.records[i].end);
    }
  }
  std::sort(result.warnings.begin(), result.warnings.end(),
            [](const ParseIssue& a, const ParseIssue& b) { return a.line < b.line; });
  return result;
}

ParseResult<DrivingSample> parse_driving_log(std::istream& in) {
  return parse_lines<DrivingSample>(in, {"session_id", "ts", "speed", "steering"},
                                    [](const json& obj, std::size_t, std::vector<ParseIssue>&) {
                                      DrivingSample d;
                                      d.session_id = expect_string(obj, "session_id", true);
                                      d.ts = expect_millis(obj, "ts");
                                      d.speed_kmh = expect_number(obj, "speed");
                                      d.steering_deg = expect_number(obj, "steering");
                                      if (d.speed_kmh < 0.0) throw Error("negative speed");
                                      return d;
                                    });
}

void write_event_log(std::ostream& out, std::span<const InteractionEvent> events) {
  for (const auto& e : events) {
    json obj = {{"session_id", e.session_id},
                {"ts", e.ts},
                {"ui_element", e.ui_element},
                {"gesture", std::string(to_string(e.gesture))}};
    out << obj.dump() << '\n';
  }
}

void write_glance_log(std::ostream& out, std::span<const GlanceRecord> glances) {
  for (const auto& g : glances) {
    json obj = {{"session_id", g.session_id}, {"start", g.start}, {"end", g.end}, {"region", g.region_id}};
    out << obj.dump() << '\n';
  }
}

void write_driving_log(std::ostream& out, std::span<const DrivingSample> samples) {
  for (const auto& d : samples) {
    json obj = {{"session_id", d.session_id}, {"ts", d.ts}, {"speed", d.speed_kmh}, {"steering", d.steering_deg}};
    out << obj.dump() << '\n';
  }
}

void LogBundle::validate() const {
  for (const auto* p : {&events_path, &glances_path, &driving_path}) {
    if (!std::filesystem::is_regular_file(*p)) throw NotFoundError("log file not found: " + p->string());
  }
  if (schema_version != kSchemaVersion) {
    throw FormatError("unsupported schema_version " + std::to_string(schema_version) + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
  }
}

LogBundle load_bundle(const std::filesystem::path& dir) {
  const auto manifest = dir / kManifestName;
  std::ifstream in(manifest);
  if (!in) throw NotFoundError("bundle manifest not found: " + manifest.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw FormatError("malformed manifest: " + manifest.string());
  try {
    LogBundle bundle;
    bundle.schema_version = doc.at("schema_version").get<int>();
    bundle.events_path = dir / doc.at("events").get<std::string>();
    bundle.glances_path = dir / doc.at("glances").get<std::string>();
    bundle.driving_path = dir / doc.at("driving").get<std::string>();
    bundle.validate();
    return bundle;
  } catch (const json::exception& e) {
    throw FormatError("malformed manifest " + manifest.string() + ": " + e.what());
  }
}

void write_manifest(const std::filesystem::path& dir, const LogBundle& bundle) {
  json doc = {{"schema_version", bundle.schema_version},
              {"events", bundle.events_path.filename().string()},
              {"glances", bundle.glances_path.filename().string()},
              {"driving", bundle.driving_path.filename().string()}};
  std::ofstream out(dir / kManifestName, std::ios::binary);
  out << doc.dump(2) << '\n';
}

SessionStore assemble_store(std::vector<InteractionEvent> events, std::vector<GlanceRecord> glances,
                            std::vector<DrivingSample> driving) {
  SessionMap sessions;
  auto session = [&](const std::string& id) -> Session& {
    auto [it, inserted] = sessions.try_emplace(id);
    if (inserted) it->second.id = id;
    return it->second;
  };
  for (auto& e : events) session(e.session_id).events.push_back(std::move(e));
  for (auto& g : glances) session(g.session_id).glances.push_back(std::move(g));
  for (auto& d : driving) session(d.session_id).driving.push_back(std::move(d));

  for (auto& [_, s] : sessions) {
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const InteractionEvent& a, const InteractionEvent& b) { return a.ts < b.ts; });
    std::sort(s.glances.begin(), s.glances.end(), [](const GlanceRecord& a, const GlanceRecord& b) {
      return std::tie(a.start, a.end, a.region_id) < std::tie(b.start, b.end, b.region_id);
    });
    std::sort(s.driving.begin(), s.driving.end(), [](const DrivingSample& a, const DrivingSample& b) {
      return std::tie(a.ts, a.speed_kmh, a.steering_deg) < std::tie(b.ts, b.speed_kmh, b.steering_deg);
    });
  }
  return SessionStore(std::move(sessions));
}

SessionStore anonymize(const SessionStore& store, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::unordered_set<std::string> used;
  SessionMap out;
  for (const auto& [id, s] : store.sessions()) {
    std::string token;
    do {
      static constexpr char kHex[] = "0123456789abcdef";
      std::uint64_t bits = rng();
      token.assign(16, '0');
      for (int i = 15; i >= 0; --i, bits >>= 4) token[static_cast<std::size_t>(i)] = kHex[bits & 0xF];
    } while (!used.insert(token).second);

    const Millis offset = static_cast<Millis>(rng() % static_cast<std::uint64_t>(kAnonymizeOffsetRange));
    const Millis first = s.bounds() ? s.bounds()->first : 0;
    const Millis shift = offset - first;

    Session anon;
    anon.id = token;
    anon.events = s.events;
    anon.glances = s.glances;
    anon.driving = s.driving;
    for (auto& e : anon.events) {
      e.session_id = token;
      e.ts += shift;
    }
    for (auto& g : anon.glances) {
      g.session_id = token;
      g.start += shift;
      g.end += shift;
    }
    for (auto& d : anon.driving) {
      d.session_id = token;
      d.ts += shift;
    }
    out.emplace(token, std::move(anon));
  }
  return SessionStore(std::move(out));
}

}  // namespace flowscope::ingest
