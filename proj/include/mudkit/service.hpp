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

// JSON-over-HTTP backend for the review UI. The workspace holds uploaded MUD
// files and one deployment context; analysis results are computed lazily per
// revision and published as immutable snapshots.

#ifndef MUDKIT_SERVICE_HPP_
#define MUDKIT_SERVICE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "mudkit/ace_tree.hpp"
#include "mudkit/parser.hpp"

namespace httplib {
class Server;
}

namespace mudkit {

struct ServiceOptions {
  std::size_t max_body_bytes = 1 << 20;
  // Workspace file rewritten on every mutation and loaded at startup.
  std::optional<std::filesystem::path> persist_path;
  // Built web UI assets served at "/".
  std::optional<std::filesystem::path> static_dir;
  // Adds CORS headers for a UI served from another origin.
  bool dev_cors = false;
  std::string cors_origin = "*";
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Everything derived from one workspace revision.
struct Snapshot {
  std::uint64_t revision = 0;
  MergedRuleset ruleset;
  nlohmann::json graph;     // graph JSON plus "revision"
  nlohmann::json findings;  // parse and merge findings plus "revision"
};

class Workspace {
 public:
  explicit Workspace(ServiceOptions options = {});

  ApiResponse AddFile(std::string_view body);
  ApiResponse RemoveFile(const std::string& id);
  ApiResponse SetContext(std::string_view body);

  ApiResponse ListFiles() const;
  ApiResponse GetFile(const std::string& id) const;
  ApiResponse GetContext() const;
  ApiResponse Graph();
  ApiResponse Findings();
  ApiResponse Devices();
  ApiResponse Flows(std::string_view src, std::string_view dst);
  // Fields: device, direction, remote, protocol, src_port, dst_port and
  // optionally initiated. Values may be strings or numbers.
  ApiResponse Query(const nlohmann::json& params);
  ApiResponse Summary(std::string_view device);

  std::uint64_t revision() const;
  std::shared_ptr<const Snapshot> CurrentSnapshot();

 private:
  struct StoredFile {
    std::string id;
    std::string body;
    ParseResult parsed;
    std::shared_ptr<const MudFile> file;  // null when parsing failed
  };
  using FileMap = std::map<std::string, std::shared_ptr<const StoredFile>>;

  static std::shared_ptr<const Snapshot> Compute(
      std::uint64_t revision, const FileMap& files,
      const std::optional<DeploymentContext>& context);

  // Callers hold mu_.
  std::shared_ptr<const StoredFile> Store(std::string id, std::string body);
  void Persist() const;
  void Load();

  const ServiceOptions options_;
  mutable std::mutex mu_;
  FileMap files_;
  std::optional<DeploymentContext> context_;
  std::uint64_t revision_ = 0;
  std::uint64_t next_id_ = 1;
  std::shared_ptr<const Snapshot> cached_;
};

class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Workspace& workspace() { return workspace_; }

  // Returns the bound port, or -1.
  int Bind(const std::string& host, int port);
  int BindToAnyPort(const std::string& host);
  // Blocks until Stop().
  bool ListenAfterBind();
  void Stop();
  void WaitUntilReady() const;

 private:
  void InstallRoutes();

  ServiceOptions options_;
  Workspace workspace_;
  std::unique_ptr<httplib::Server> server_;
};

bool IsValidUtf8(std::string_view bytes);

}  // namespace mudkit

#endif  // MUDKIT_SERVICE_HPP_
