#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "flowscope/analysis.hpp"

namespace flowscope::server {

/// Holds the current snapshot. Readers keep whatever snapshot they fetched alive, so a
/// replace() never disturbs in-flight requests.
class SnapshotHolder {
 public:
  explicit SnapshotHolder(std::shared_ptr<const Snapshot> snapshot) : snapshot_(std::move(snapshot)) {}

  std::shared_ptr<const Snapshot> get() const {
    std::lock_guard lock(mu_);
    return snapshot_;
  }
  void replace(std::shared_ptr<const Snapshot> snapshot) {
    std::lock_guard lock(mu_);
    snapshot_.swap(snapshot);
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const Snapshot> snapshot_;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Routes one read-only GET request. Never throws: bad parameters map to 400, unknown ids
/// and routes to 404.
///   /tasks
///   /tasks/{task}/sankey?p_min=
///   /tasks/{task}/flows?metric=&p_min=&target_ms=&region=&grid=
///   /tasks/{task}/flows/{flow}/sequences
///   /sequences/{id}/timeline?pad_ms=&region=&long_ms=
Response handle_get(const Snapshot& snapshot, std::string_view path, const views::Params& params);

struct BindAddress {
  std::string host = "127.0.0.1";
  int port = 8080;
};

/// Parses "host:port" (or ":port"). Throws ConfigError.
BindAddress parse_bind_address(std::string_view text);

/// FLOWSCOPE_BIND when set, otherwise `fallback`.
BindAddress resolve_bind_address(std::string_view fallback);

struct ServerOptions {
  /// Explorer assets served at "/".
  std::optional<std::filesystem::path> static_dir;
};

class ApiServer {
 public:
  ApiServer(std::shared_ptr<const Snapshot> snapshot, ServerOptions options = {});
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Atomically swaps the served snapshot.
  void reload(std::shared_ptr<const Snapshot> snapshot) { holder_.replace(std::move(snapshot)); }

  /// Binds; port 0 picks a free port. Returns the bound port. Throws Error on failure.
  int bind(const BindAddress& address);
  /// Blocks until stop().
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  SnapshotHolder holder_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace flowscope::server
