#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "flowscope/model.hpp"

namespace flowscope::ingest {

inline constexpr int kSchemaVersion = 1;

/// A line-level problem found while parsing a log stream. Lines are 1-based.
struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

template <typename Record>
struct ParseResult {
  std::vector<Record> records;
  std::vector<ParseIssue> errors;
  std::vector<ParseIssue> warnings;
};

// Newline-delimited JSON, one record per line. Blank lines are skipped.
// Records that violate a field contract are reported in `errors` and not returned.
ParseResult<InteractionEvent> parse_event_log(std::istream& in);
ParseResult<GlanceRecord> parse_glance_log(std::istream& in);
ParseResult<DrivingSample> parse_driving_log(std::istream& in);

void write_event_log(std::ostream& out, std::span<const InteractionEvent> events);
void write_glance_log(std::ostream& out, std::span<const GlanceRecord> glances);
void write_driving_log(std::ostream& out, std::span<const DrivingSample> samples);

/// The three per-signal log files of one export, plus the schema version they declare.
struct LogBundle {
  std::filesystem::path events_path;
  std::filesystem::path glances_path;
  std::filesystem::path driving_path;
  int schema_version = kSchemaVersion;

  /// Throws NotFoundError for a missing file and FormatError for an unsupported schema version.
  void validate() const;
};

inline constexpr const char* kManifestName = "manifest.json";

/// Reads `dir/manifest.json` ({schema_version, events, glances, driving}).
LogBundle load_bundle(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir, const LogBundle& bundle);

/// Union of all session ids; per-session channels sorted by time.
/// Events are stably sorted by ts so equal timestamps keep input order; glances and driving
/// samples are sorted on their full field tuple.
SessionStore assemble_store(std::vector<InteractionEvent> events, std::vector<GlanceRecord> glances,
                            std::vector<DrivingSample> driving);

inline constexpr Millis kAnonymizeOffsetRange = 86'400'000;

/// Rebases every session so its first datapoint sits at a seed-derived offset in
/// [0, kAnonymizeOffsetRange) and replaces session ids with opaque tokens.
SessionStore anonymize(const SessionStore& store, std::uint64_t seed);

// Binary snapshot, see README ("Store format").
void save_store(const SessionStore& store, std::ostream& out);
SessionStore load_store(std::istream& in);
void save_store_file(const SessionStore& store, const std::filesystem::path& path);
/// Throws NotFoundError when the file does not exist, FormatError when it is not a store.
SessionStore load_store_file(const std::filesystem::path& path);

}  // namespace flowscope::ingest
