#include "flowscope/server.hpp"

#include <charconv>
#include <cstdlib>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "flowscope/error.hpp"

namespace flowscope::server {

namespace {

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (pos < path.size()) {
    if (path[pos] == '/') {
      ++pos;
      continue;
    }
    const auto next = path.find('/', pos);
    const auto end = next == std::string_view::npos ? path.size() : next;
    parts.push_back(path.substr(pos, end - pos));
    pos = end;
  }
  return parts;
}

Response error(int status, const std::string& message) {
  return {status, nlohmann::json({{"error", message}, {"status", status}}).dump() + "\n"};
}

void no_params(const views::Params& params) {
  if (!params.empty()) throw ConfigError("unknown parameter '" + params.begin()->first + "'");
}

}  // namespace

Response handle_get(const Snapshot& snapshot, std::string_view path, const views::Params& params) {
  const auto parts = split_path(path);
  try {
    if (parts.size() == 1 && parts[0] == "tasks") {
      no_params(params);
      return {200, views::tasks_json(snapshot)};
    }
    if (parts.size() == 3 && parts[0] == "tasks" && parts[2] == "sankey") {
      const auto& task = snapshot.task(parts[1]);
      return {200, views::task_view_json(task, views::parse_task_view_request(params))};
    }
    if (parts.size() == 3 && parts[0] == "tasks" && parts[2] == "flows") {
      const auto& task = snapshot.task(parts[1]);
      return {200, views::flow_view_json(task, snapshot.store(), views::parse_flow_view_request(params))};
    }
    if (parts.size() == 5 && parts[0] == "tasks" && parts[2] == "flows" && parts[4] == "sequences") {
      const auto& task = snapshot.task(parts[1]);
      no_params(params);
      return {200, views::flow_sequences_json(task, parts[3])};
    }
    if (parts.size() == 3 && parts[0] == "sequences" && parts[2] == "timeline") {
      return {200, views::timeline_json(snapshot, parts[1], views::parse_timeline_request(params))};
    }
    return error(404, "no route for " + std::string(path));
  } catch (const NotFoundError& e) {
    return error(404, e.what());
  } catch (const ConfigError& e) {
    return error(400, e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

BindAddress parse_bind_address(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw ConfigError("bind address must look like host:port, got '" + std::string(text) + "'");
  BindAddress out;
  if (colon > 0) out.host = std::string(text.substr(0, colon));
  const auto port_text = text.substr(colon + 1);
  int port = -1;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
    throw ConfigError("invalid port in bind address '" + std::string(text) + "'");
  }
  out.port = port;
  return out;
}

BindAddress resolve_bind_address(std::string_view fallback) {
  if (const char* env = std::getenv("FLOWSCOPE_BIND"); env != nullptr && *env != '\0') return parse_bind_address(env);
  return parse_bind_address(fallback);
}

struct ApiServer::Impl {
  httplib::Server http;
};

ApiServer::ApiServer(std::shared_ptr<const Snapshot> snapshot, ServerOptions options)
    : holder_(std::move(snapshot)), impl_(std::make_unique<Impl>()) {
  if (options.static_dir) {
    if (!impl_->http.set_mount_point("/", options.static_dir->string())) {
      throw NotFoundError("static asset directory not found: " + options.static_dir->string());
    }
  }
  impl_->http.Get(R"(/(tasks|sequences)(/.*)?)", [this](const httplib::Request& req, httplib::Response& res) {
    views::Params params;
    Response out;
    bool duplicate = false;
    for (const auto& [key, value] : req.params) duplicate |= !params.emplace(key, value).second;
    if (duplicate) {
      out = error(400, "repeated query parameter");
    } else {
      // Hold a reference so a concurrent reload cannot free the snapshot mid-request.
      const auto snapshot = holder_.get();
      out = handle_get(*snapshot, req.path, params);
    }
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const BindAddress& address) {
  int port = address.port;
  if (port == 0) {
    port = impl_->http.bind_to_any_port(address.host);
    if (port < 0) throw Error("cannot bind " + address.host);
  } else if (!impl_->http.bind_to_port(address.host, port)) {
    throw Error("cannot bind " + address.host + ":" + std::to_string(port));
  }
  return port;
}

void ApiServer::listen() { impl_->http.listen_after_bind(); }

void ApiServer::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

void ApiServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace flowscope::server
