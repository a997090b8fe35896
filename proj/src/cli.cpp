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

#include "mudkit/cli.hpp"

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "mudkit/ace_tree.hpp"
#include "mudkit/codec.hpp"
#include "mudkit/context.hpp"
#include "mudkit/flow_graph.hpp"
#include "mudkit/logging.hpp"
#include "mudkit/parser.hpp"
#include "mudkit/service.hpp"

namespace mudkit {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::optional<std::string> ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return buffer.str();
}

ParseResult ParsePath(const std::string& path) {
  auto bytes = ReadFile(path);
  if (!bytes) {
    ParseResult result;
    result.findings.push_back(Finding{FindingKind::kProtocolError, Severity::kError,
                                      "cannot read file " + path, {}, {}});
    return result;
  }
  return ParseMudFile(*bytes);
}

std::size_t CountSeverity(const std::vector<Finding>& findings, Severity severity) {
  std::size_t n = 0;
  for (const auto& f : findings) n += f.severity == severity;
  return n;
}

void PrintFinding(std::ostream& os, const Finding& finding) {
  os << ToString(finding.severity) << " [" << ToString(finding.kind) << "] "
     << finding.message;
  for (const auto& ref : finding.refs) {
    if (ref.acl_name.empty()) continue;
    os << " (" << ref.acl_name;
    if (!ref.ace_name.empty()) os << "/" << ref.ace_name;
    os << ")";
  }
  os << "\n";
}

void PrintFindings(std::ostream& os, const std::vector<Finding>& findings) {
  for (const auto& f : findings) PrintFinding(os, f);
}

// Parses every path and attaches the files to a deployment. Returns nullopt
// after reporting to `err` when any input is unusable.
std::optional<MergedRuleset> LoadRuleset(const std::vector<std::string>& paths,
                                         const std::string& context_path,
                                         std::ostream& err) {
  std::vector<std::pair<std::string, std::shared_ptr<const MudFile>>> files;
  bool failed = false;
  for (const auto& path : paths) {
    ParseResult parsed = ParsePath(path);
    if (!parsed.ok()) {
      err << "== " << path << " ==\n";
      PrintFindings(err, parsed.findings);
      failed = true;
      continue;
    }
    files.emplace_back(fs::path(path).stem().string(),
                       std::make_shared<const MudFile>(std::move(*parsed.file)));
  }
  if (failed) {
    err << "aborting: not every input parsed\n";
    return std::nullopt;
  }

  if (context_path.empty()) {
    // One device per file, named by its stem. Repeating a path merges the
    // same device's file again; distinct files sharing a stem get a suffix.
    std::vector<MergeEntry> entries;
    std::vector<std::pair<std::string, std::shared_ptr<const MudFile>>> devices;
    for (auto& [id, file] : files) {
      std::string unique_id = id;
      for (int n = 2;; ++n) {
        auto it = std::find_if(devices.begin(), devices.end(),
                               [&](const auto& d) { return d.first == unique_id; });
        if (it == devices.end()) {
          devices.emplace_back(unique_id, file);
          break;
        }
        if (*it->second == *file) break;
        unique_id = id + "-" + std::to_string(n);
      }
      entries.push_back({unique_id, file});
    }
    return Merge(entries, SyntheticContext(devices));
  }

  auto text = ReadFile(context_path);
  if (!text) {
    err << "cannot read context " << context_path << "\n";
    return std::nullopt;
  }
  DeploymentContext context;
  try {
    context = ParseDeploymentContext(*text);
  } catch (const ContextError& e) {
    err << "invalid context: " << e.what() << "\n";
    return std::nullopt;
  }
  std::vector<std::shared_ptr<const MudFile>> bare;
  for (const auto& [id, file] : files) bare.push_back(file);
  for (const auto& unclaimed : AttachFiles(context, bare)) {
    err << "warning: " << unclaimed->mud_url
        << " is not bound to any context device\n";
  }
  return Merge(context);
}

int Validate(const std::vector<std::string>& paths, const std::string& format,
             std::ostream& out) {
  bool errors = false;
  json report = json::array();
  for (const auto& path : paths) {
    ParseResult parsed = ParsePath(path);
    std::size_t n_errors = CountSeverity(parsed.findings, Severity::kError);
    std::size_t n_warnings = CountSeverity(parsed.findings, Severity::kWarning);
    errors = errors || n_errors > 0;
    if (format == "json") {
      report.push_back({{"path", path},
                        {"errors", n_errors},
                        {"warnings", n_warnings},
                        {"findings", ToJson(parsed.findings)}});
      continue;
    }
    if (paths.size() > 1) out << "== " << path << " ==\n";
    PrintFindings(out, parsed.findings);
    out << n_errors << " errors, " << n_warnings << " warnings\n";
  }
  if (format == "json") out << report.dump(2) << "\n";
  return errors ? 1 : 0;
}

int MergeCommand(const std::vector<std::string>& paths,
                 const std::string& context_path, const std::string& format,
                 const std::string& out_path, std::ostream& out,
                 std::ostream& err) {
  auto ruleset = LoadRuleset(paths, context_path, err);
  if (!ruleset) return 1;
  PrintFindings(err, ruleset->findings);
  std::string exported = ExportGraph(
      ToGraph(*ruleset), format == "dot" ? GraphFormat::kDot : GraphFormat::kJson);
  if (out_path.empty()) {
    out << exported;
  } else {
    std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
    file << exported;
    if (!file) {
      err << "cannot write " << out_path << "\n";
      return 1;
    }
  }
  return HasErrors(ruleset->findings) ? 1 : 0;
}

void PrintSummaryText(std::ostream& out, const DeviceSummary& s) {
  out << "device " << s.device_id << "\n";
  out << "  rules: " << s.rule_count_before << " before pruning, "
      << s.rule_count_after << " after\n";
  out << "  remote hosts:";
  if (s.allowed_remote_hosts.empty()) out << " none";
  for (const auto& host : s.allowed_remote_hosts) out << " " << host;
  out << "\n  local peers:";
  if (s.allowed_local_peers.empty() && !s.allows_any_local) out << " none";
  for (const auto& peer : s.allowed_local_peers) out << " " << peer;
  if (s.allows_any_local) out << " (any local)";
  out << "\n";
  for (const auto& tally : s.protocols) {
    out << "  " << tally.protocol << ": " << tally.rule_count << " rules, ports";
    for (const auto& range : tally.dst_ports) out << " " << ToString(range);
    out << "\n";
  }
}

int SummarizeCommand(const std::vector<std::string>& paths,
                     const std::string& context_path, std::string device,
                     const std::string& format, std::ostream& out,
                     std::ostream& err) {
  auto ruleset = LoadRuleset(paths, context_path, err);
  if (!ruleset) return 1;
  PrintFindings(err, ruleset->findings);
  std::vector<std::string> devices;
  if (device.empty()) {
    devices = ruleset->devices;
  } else {
    if (!ruleset->HasDevice(device)) {
      err << "unknown device '" << device << "'\n";
      return 2;
    }
    devices.push_back(device);
  }
  json report = json::array();
  for (const auto& id : devices) {
    DeviceSummary summary = Summarize(*ruleset, id);
    if (format == "json") {
      report.push_back(SummaryToJson(summary));
    } else {
      PrintSummaryText(out, summary);
    }
  }
  if (format == "json") {
    out << (report.size() == 1 ? report[0] : report).dump(2) << "\n";
  }
  return HasErrors(ruleset->findings) ? 1 : 0;
}

int Serve(const ServiceOptions& options, const std::string& host, int port,
          const std::vector<std::string>& preload, std::ostream& out,
          std::ostream& err) {
  // Handled by sigwait below rather than by an async handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(options);
  for (const auto& path : preload) {
    auto bytes = ReadFile(path);
    if (!bytes) {
      err << "cannot read " << path << "\n";
      return 1;
    }
    auto response = service.workspace().AddFile(*bytes);
    err << path << " -> " << response.body.value("id", "?") << "\n";
  }
  int bound = port == 0 ? service.BindToAnyPort(host) : service.Bind(host, port);
  if (bound < 0) {
    err << "cannot listen on " << host << ":" << port
        << " (address in use or not permitted)\n";
    return 1;
  }
  out << "listening on http://" << host << ":" << bound << "\n" << std::flush;

  std::thread listener([&] { service.ListenAfterBind(); });
  int sig = 0;
  sigwait(&signals, &sig);
  err << "shutting down\n";
  service.Stop();
  listener.join();
  return 0;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  InitLogging();
  CLI::App app{"Validate, merge and explore MUD files", "mudkit"};
  app.require_subcommand(1);

  std::vector<std::string> paths;
  std::string format;
  std::string context_path;
  std::string out_path;
  std::string device;

  auto* validate = app.add_subcommand("validate", "Check MUD files and report findings");
  validate->add_option("paths", paths, "MUD files")->required();
  validate->add_option("--format", format, "text or json")
      ->check(CLI::IsMember({"text", "json"}))
      ->default_val("text");

  auto* merge = app.add_subcommand("merge", "Merge MUD files into one flow graph");
  merge->add_option("paths", paths, "MUD files")->required();
  merge->add_option("--context", context_path, "Deployment context JSON");
  merge->add_option("--format", format, "json or dot")
      ->check(CLI::IsMember({"json", "dot"}))
      ->default_val("json");
  merge->add_option("--out", out_path, "Write the graph here instead of stdout");

  auto* summarize = app.add_subcommand("summarize", "Summarize what a device may reach");
  summarize->add_option("paths", paths, "MUD files")->required();
  summarize->add_option("--device", device, "Device id (default: all)");
  summarize->add_option("--context", context_path, "Deployment context JSON");
  summarize->add_option("--format", format, "text or json")
      ->check(CLI::IsMember({"text", "json"}))
      ->default_val("text");

  ServiceOptions service_options;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  std::string persist;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API and review UI");
  serve->add_option("paths", paths, "MUD files to preload");
  serve->add_option("--port", port, "TCP port, 0 for any")->check(CLI::Range(0, 65535));
  serve->add_option("--listen-address", host, "Address to bind");
  serve->add_option("--static-dir", static_dir, "Built web UI directory");
  serve->add_option("--persist", persist, "Workspace file");
  serve->add_option("--max-body", service_options.max_body_bytes,
                    "Upload size limit in bytes");
  serve->add_flag("--dev", service_options.dev_cors, "Enable CORS for a dev UI");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  if (*validate) return Validate(paths, format, out);
  if (*merge) return MergeCommand(paths, context_path, format, out_path, out, err);
  if (*summarize) {
    return SummarizeCommand(paths, context_path, device, format, out, err);
  }
  if (!static_dir.empty()) service_options.static_dir = static_dir;
  if (!persist.empty()) service_options.persist_path = persist;
  return Serve(service_options, host, port, paths, out, err);
}

}  // namespace mudkit
