// Copyright 2026 The mudkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mudkit/service.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "httplib.h"
#include "mudkit/codec.hpp"
#include "mudkit/context.hpp"
#include "mudkit/flow_graph.hpp"
#include "mudkit/logging.hpp"
#include "spdlog/spdlog.h"

namespace mudkit {
namespace {

using json = nlohmann::json;

constexpr std::string_view kWorkspaceFormat = "mudkit-workspace/1";

ApiResponse Error(int status, std::string message) {
  return {status, json{{"error", std::move(message)}}};
}

// Accepts numbers and numeric strings.
template <class T>
std::optional<T> Number(const json& value, long long min, long long max) {
  long long n = 0;
  if (value.is_number_integer()) {
    n = value.get<long long>();
  } else if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
      return std::nullopt;
    }
  } else {
    return std::nullopt;
  }
  if (n < min || n > max) return std::nullopt;
  return static_cast<T>(n);
}

std::optional<std::string> Text(const json& params, const char* key) {
  auto it = params.find(key);
  if (it == params.end() || !it->is_string() || it->get_ref<const std::string&>().empty()) {
    return std::nullopt;
  }
  return it->get<std::string>();
}

}  // namespace

bool IsValidUtf8(std::string_view bytes) {
  std::size_t i = 0;
  while (i < bytes.size()) {
    auto c = static_cast<unsigned char>(bytes[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3
                                   : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > bytes.size()) return false;
    std::uint32_t cp = len == 1 ? c : c & (0x7F >> len);
    for (std::size_t k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(bytes[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

Workspace::Workspace(ServiceOptions options) : options_(std::move(options)) {
  if (options_.persist_path && std::filesystem::exists(*options_.persist_path)) {
    Load();
  }
}

std::shared_ptr<const Workspace::StoredFile> Workspace::Store(std::string id,
                                                              std::string body) {
  auto stored = std::make_shared<StoredFile>();
  stored->id = id;
  stored->parsed = ParseMudFile(body);
  stored->body = std::move(body);
  if (stored->parsed.file) {
    stored->file = std::make_shared<const MudFile>(*stored->parsed.file);
  }
  files_[id] = stored;
  return stored;
}

ApiResponse Workspace::AddFile(std::string_view body) {
  if (body.size() > options_.max_body_bytes) {
    return Error(413, "body exceeds " + std::to_string(options_.max_body_bytes) +
                          " bytes");
  }
  if (!IsValidUtf8(body)) return Error(400, "body is not valid UTF-8");

  std::lock_guard lock(mu_);
  std::string id = "f" + std::to_string(next_id_++);
  auto stored = Store(id, std::string(body));
  ++revision_;
  Persist();
  spdlog::debug("stored MUD file {} ({} findings), revision {}", id,
               stored->parsed.findings.size(), revision_);
  return {201, json{{"id", id},
                    {"ok", stored->parsed.ok()},
                    {"findings", ToJson(stored->parsed.findings)},
                    {"revision", revision_}}};
}

ApiResponse Workspace::RemoveFile(const std::string& id) {
  std::lock_guard lock(mu_);
  if (files_.erase(id) == 0) return Error(404, "unknown MUD file '" + id + "'");
  ++revision_;
  Persist();
  return {200, json{{"id", id}, {"revision", revision_}}};
}

ApiResponse Workspace::SetContext(std::string_view body) {
  if (body.size() > options_.max_body_bytes) {
    return Error(413, "body exceeds " + std::to_string(options_.max_body_bytes) +
                          " bytes");
  }
  if (!IsValidUtf8(body)) return Error(400, "body is not valid UTF-8");
  DeploymentContext context;
  try {
    context = ParseDeploymentContext(body);
  } catch (const ContextError& e) {
    return Error(e.reason() == ContextError::Reason::kUnknownDevice ? 409 : 400,
                 e.what());
  }
  std::lock_guard lock(mu_);
  context_ = std::move(context);
  ++revision_;
  Persist();
  return {200, json{{"revision", revision_}}};
}

ApiResponse Workspace::ListFiles() const {
  std::lock_guard lock(mu_);
  json files = json::array();
  for (const auto& [id, stored] : files_) {
    files.push_back({{"id", id},
                     {"ok", stored->parsed.ok()},
                     {"mud_url", stored->file ? json(stored->file->mud_url)
                                              : json(nullptr)},
                     {"finding_count", stored->parsed.findings.size()}});
  }
  return {200, json{{"files", std::move(files)}, {"revision", revision_}}};
}

ApiResponse Workspace::GetFile(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = files_.find(id);
  if (it == files_.end()) return Error(404, "unknown MUD file '" + id + "'");
  return {200, json{{"id", id},
                    {"ok", it->second->parsed.ok()},
                    {"body", it->second->body},
                    {"findings", ToJson(it->second->parsed.findings)}}};
}

ApiResponse Workspace::GetContext() const {
  std::lock_guard lock(mu_);
  return {200, json{{"context", context_ ? EncodeDeploymentContext(*context_)
                                         : json(nullptr)},
                    {"revision", revision_}}};
}

std::uint64_t Workspace::revision() const {
  std::lock_guard lock(mu_);
  return revision_;
}

std::shared_ptr<const Snapshot> Workspace::Compute(
    std::uint64_t revision, const FileMap& files,
    const std::optional<DeploymentContext>& context) {
  std::vector<Finding> workspace_findings;
  DeploymentContext ctx;
  if (context) {
    ctx = *context;
    std::vector<std::shared_ptr<const MudFile>> valid;
    for (const auto& [id, stored] : files) {
      if (stored->file) valid.push_back(stored->file);
    }
    for (const auto& file : AttachFiles(ctx, valid)) {
      workspace_findings.push_back(Finding{
          FindingKind::kSemanticWarning, Severity::kWarning,
          "MUD file " + file->mud_url + " is not bound to any context device",
          {RuleRef{file->mud_url, "", "", std::nullopt}},
          {}});
    }
  } else {
    std::vector<std::pair<std::string, std::shared_ptr<const MudFile>>> devices;
    for (const auto& [id, stored] : files) {
      if (stored->file) devices.emplace_back(id, stored->file);
    }
    ctx = SyntheticContext(devices);
  }

  auto snapshot = std::make_shared<Snapshot>();
  snapshot->revision = revision;
  snapshot->ruleset = Merge(ctx);
  snapshot->graph = GraphToJson(ToGraph(snapshot->ruleset));
  snapshot->graph["revision"] = revision;

  json findings = json::array();
  for (const auto& [id, stored] : files) {
    for (const auto& finding : stored->parsed.findings) {
      json entry = ToJson(finding);
      entry["source"] = "file:" + id;
      findings.push_back(std::move(entry));
    }
  }
  for (const auto& finding : workspace_findings) {
    json entry = ToJson(finding);
    entry["source"] = "workspace";
    findings.push_back(std::move(entry));
  }
  for (const auto& finding : snapshot->ruleset.findings) {
    json entry = ToJson(finding);
    entry["source"] = "merge";
    findings.push_back(std::move(entry));
  }
  snapshot->findings = json{{"revision", revision}, {"findings", std::move(findings)}};
  return snapshot;
}

std::shared_ptr<const Snapshot> Workspace::CurrentSnapshot() {
  std::uint64_t revision;
  FileMap files;
  std::optional<DeploymentContext> context;
  {
    std::lock_guard lock(mu_);
    if (cached_ && cached_->revision == revision_) return cached_;
    revision = revision_;
    files = files_;
    context = context_;
  }
  // Computed outside the lock from a consistent copy of one revision.
  auto snapshot = Compute(revision, files, context);
  std::lock_guard lock(mu_);
  if (!cached_ || cached_->revision < snapshot->revision) cached_ = snapshot;
  return snapshot;
}

ApiResponse Workspace::Graph() { return {200, CurrentSnapshot()->graph}; }

ApiResponse Workspace::Findings() { return {200, CurrentSnapshot()->findings}; }

ApiResponse Workspace::Devices() {
  auto snapshot = CurrentSnapshot();
  json devices = json::array();
  for (const auto& id : snapshot->ruleset.devices) {
    devices.push_back(SummaryToJson(Summarize(snapshot->ruleset, id)));
  }
  return {200, json{{"revision", snapshot->revision}, {"devices", std::move(devices)}}};
}

ApiResponse Workspace::Flows(std::string_view src, std::string_view dst) {
  if (src.empty() || dst.empty()) return Error(400, "src and dst are required");
  auto snapshot = CurrentSnapshot();
  try {
    return {200, json{{"revision", snapshot->revision},
                      {"flows", ToJson(FlowsBetween(snapshot->ruleset, src, dst))}}};
  } catch (const UnknownDeviceError& e) {
    return Error(404, e.what());
  }
}

ApiResponse Workspace::Query(const json& params) {
  if (!params.is_object()) return Error(400, "query must be an object");
  auto device = Text(params, "device");
  auto remote = Text(params, "remote");
  if (!device || !remote) return Error(400, "device and remote are required");

  auto snapshot = CurrentSnapshot();
  PacketQuery packet;
  packet.device_id = *device;
  packet.remote = InterpretRemote(snapshot->ruleset, *remote);

  auto direction = Text(params, "direction");
  if (direction) {
    auto parsed = ParseDirection(*direction);
    if (!parsed) return Error(400, "direction must be from-device or to-device");
    packet.direction = *parsed;
  }
  if (auto initiated = Text(params, "initiated")) {
    auto parsed = ParseDirection(*initiated);
    if (!parsed) return Error(400, "initiated must be from-device or to-device");
    packet.initiated = parsed;
  }
  if (auto it = params.find("protocol"); it != params.end()) {
    if (it->is_string() && *it == "tcp") {
      packet.protocol = kProtocolTcp;
    } else if (it->is_string() && *it == "udp") {
      packet.protocol = kProtocolUdp;
    } else if (auto n = Number<std::uint8_t>(*it, 0, 255)) {
      packet.protocol = *n;
    } else {
      return Error(400, "protocol must be tcp, udp or 0-255");
    }
  }
  for (auto [key, field] : {std::pair{"src_port", &packet.src_port},
                            std::pair{"dst_port", &packet.dst_port}}) {
    if (auto it = params.find(key); it != params.end()) {
      auto n = Number<std::uint16_t>(*it, 0, 65535);
      if (!n) return Error(400, std::string(key) + " must be 0-65535");
      *field = *n;
    }
  }
  try {
    QueryResult result = IsAllowed(snapshot->ruleset, packet);
    json refs = json::array();
    for (const auto& ref : result.refs) refs.push_back(ToJson(ref));
    return {200, json{{"revision", snapshot->revision},
                      {"decision", std::string(ToString(result.decision))},
                      {"refs", std::move(refs)}}};
  } catch (const UnknownDeviceError& e) {
    return Error(404, e.what());
  }
}

ApiResponse Workspace::Summary(std::string_view device) {
  if (device.empty()) return Error(400, "device is required");
  auto snapshot = CurrentSnapshot();
  try {
    json body = SummaryToJson(Summarize(snapshot->ruleset, device));
    body["revision"] = snapshot->revision;
    return {200, std::move(body)};
  } catch (const UnknownDeviceError& e) {
    return Error(404, e.what());
  }
}

void Workspace::Persist() const {
  if (!options_.persist_path) return;
  json files = json::array();
  for (const auto& [id, stored] : files_) {
    files.push_back({{"id", id}, {"body", stored->body}});
  }
  json doc{{"format", kWorkspaceFormat},
           {"revision", revision_},
           {"next_id", next_id_},
           {"files", std::move(files)},
           {"context", context_ ? EncodeDeploymentContext(*context_) : json(nullptr)}};
  auto tmp = *options_.persist_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << doc.dump(2) << "\n";
    if (!out) {
      spdlog::error("cannot write workspace to {}", tmp.string());
      return;
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, *options_.persist_path, ec);
  if (ec) spdlog::error("cannot replace {}: {}", options_.persist_path->string(), ec.message());
}

void Workspace::Load() {
  std::ifstream in(*options_.persist_path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc = json::parse(buffer.str(), nullptr, false);
  if (doc.is_discarded() || doc.value("format", "") != kWorkspaceFormat) {
    spdlog::warn("ignoring unreadable workspace file {}",
                 options_.persist_path->string());
    return;
  }
  std::lock_guard lock(mu_);
  for (const auto& entry : doc.value("files", json::array())) {
    if (entry.contains("id") && entry.contains("body")) {
      Store(entry["id"].get<std::string>(), entry["body"].get<std::string>());
    }
  }
  if (doc.contains("context") && !doc["context"].is_null()) {
    try {
      context_ = DecodeDeploymentContext(doc["context"]);
    } catch (const ContextError& e) {
      spdlog::warn("ignoring stored context: {}", e.what());
    }
  }
  revision_ = doc.value("revision", std::uint64_t{0});
  next_id_ = doc.value("next_id", std::uint64_t{files_.size() + 1});
  spdlog::info("loaded workspace with {} files at revision {}", files_.size(),
               revision_);
}

Service::Service(ServiceOptions options)
    : options_(options),
      workspace_(std::move(options)),
      server_(std::make_unique<httplib::Server>()) {
  // httplib defaults to SO_REUSEPORT, which lets a second server share a busy
  // port. Keep SO_REUSEADDR only so a taken port fails to bind.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  InitLogging();
  InstallRoutes();
}

Service::~Service() { Stop(); }

void Service::InstallRoutes() {
  httplib::Server& s = *server_;
  // Leave room for the workspace to answer 413 itself with a JSON body.
  s.set_payload_max_length(options_.max_body_bytes + 1);

  auto send = [](httplib::Response& res, const ApiResponse& api) {
    res.status = api.status;
    res.set_content(api.body.dump(), "application/json");
  };

  s.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });
  s.Get("/api/mudfiles", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, workspace_.ListFiles());
  });
  s.Post("/api/mudfiles", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, workspace_.AddFile(req.body));
  });
  s.Get("/api/mudfiles/:id", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, workspace_.GetFile(req.path_params.at("id")));
  });
  s.Delete("/api/mudfiles/:id", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, workspace_.RemoveFile(req.path_params.at("id")));
  });
  s.Get("/api/context", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, workspace_.GetContext());
  });
  s.Put("/api/context", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, workspace_.SetContext(req.body));
  });
  s.Get("/api/graph", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, workspace_.Graph());
  });
  s.Get("/api/findings", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, workspace_.Findings());
  });
  s.Get("/api/devices", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, workspace_.Devices());
  });
  s.Get("/api/summary", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, workspace_.Summary(req.get_param_value("device")));
  });
  s.Get("/api/flows", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, workspace_.Flows(req.get_param_value("src"), req.get_param_value("dst")));
  });
  s.Get("/api/query", [this, send](const httplib::Request& req, httplib::Response& res) {
    json params = json::object();
    for (const auto& [key, value] : req.params) params[key] = value;
    send(res, workspace_.Query(params));
  });
  s.Post("/api/query", [this, send](const httplib::Request& req, httplib::Response& res) {
    json params = json::parse(req.body, nullptr, false);
    if (params.is_discarded()) {
      send(res, Error(400, "query body is not valid JSON"));
      return;
    }
    send(res, workspace_.Query(params));
  });

  if (options_.static_dir) {
    if (!s.set_mount_point("/", options_.static_dir->string())) {
      spdlog::warn("static directory {} not found", options_.static_dir->string());
    }
  } else {
    s.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(
          "<!doctype html><title>mudkit</title><p>mudkit service is running. "
          "The review UI is not installed; the JSON API lives under /api/.</p>",
          "text/html");
    });
  }

  if (options_.dev_cors) {
    std::string origin = options_.cors_origin;
    s.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    s.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });
  }

  s.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
  });
}

int Service::Bind(const std::string& host, int port) {
  return server_->bind_to_port(host, port) ? port : -1;
}

int Service::BindToAnyPort(const std::string& host) {
  return server_->bind_to_any_port(host);
}

bool Service::ListenAfterBind() { return server_->listen_after_bind(); }

void Service::Stop() {
  if (server_) server_->stop();
}

void Service::WaitUntilReady() const { server_->wait_until_ready(); }

}  // namespace mudkit
