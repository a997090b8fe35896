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

#include "mudkit/context.hpp"

#include <set>

namespace mudkit {
namespace {

using json = nlohmann::json;

[[noreturn]] void Malformed(const std::string& message) {
  throw ContextError(ContextError::Reason::kMalformed, message);
}

std::vector<std::string> StringList(const json& value,
                                    const std::string& where) {
  if (!value.is_array()) Malformed(where + " must be a list of strings");
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) Malformed(where + " must be a list of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::map<std::string, std::set<std::string>> Bindings(const json& doc,
                                                      const char* key) {
  std::map<std::string, std::set<std::string>> out;
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return out;
  if (!it->is_object()) Malformed(std::string(key) + " must be an object");
  for (const auto& [name, targets] : it->items()) {
    auto list = StringList(targets, std::string(key) + "." + name);
    out[name].insert(list.begin(), list.end());
  }
  return out;
}

IpPrefix Prefix(const std::string& text, const std::string& where) {
  auto prefix = IpPrefix::Parse(text);
  if (!prefix) Malformed(where + ": invalid prefix '" + text + "'");
  return *prefix;
}

}  // namespace

DeploymentContext DecodeDeploymentContext(const json& doc) {
  if (!doc.is_object()) Malformed("context must be a JSON object");
  DeploymentContext context;

  if (auto devices = doc.find("devices"); devices != doc.end()) {
    if (!devices->is_array()) Malformed("devices must be a list");
    for (const auto& entry : *devices) {
      if (!entry.is_object() || !entry.contains("id") ||
          !entry["id"].is_string() || !entry.contains("mud_url") ||
          !entry["mud_url"].is_string()) {
        Malformed("each device needs string 'id' and 'mud_url'");
      }
      context.devices.push_back(Device{entry["id"].get<std::string>(),
                                       entry["mud_url"].get<std::string>(),
                                       nullptr});
    }
  }
  context.controller_bindings = Bindings(doc, "controller_bindings");
  context.my_controller_bindings = Bindings(doc, "my_controller_bindings");

  if (auto prefixes = doc.find("local_prefixes");
      prefixes != doc.end() && !prefixes->is_null()) {
    for (const auto& text : StringList(*prefixes, "local_prefixes")) {
      context.local_prefixes.push_back(Prefix(text, "local_prefixes"));
    }
  }
  if (auto dns = doc.find("dns_bindings"); dns != doc.end() && !dns->is_null()) {
    if (!dns->is_object()) Malformed("dns_bindings must be an object");
    auto& bindings = context.dns_bindings.emplace();
    for (const auto& [domain, targets] : dns->items()) {
      auto& list = bindings[ToLower(domain)];
      for (const auto& text : StringList(targets, "dns_bindings." + domain)) {
        list.push_back(Prefix(text, "dns_bindings." + domain));
      }
    }
  }

  auto problems = CheckContext(context);
  if (!problems.empty()) {
    throw ContextError(ContextError::Reason::kUnknownDevice, problems.front());
  }
  return context;
}

DeploymentContext ParseDeploymentContext(std::string_view text) {
  json doc = json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded()) Malformed("context is not valid JSON");
  return DecodeDeploymentContext(doc);
}

json EncodeDeploymentContext(const DeploymentContext& context) {
  json devices = json::array();
  for (const auto& d : context.devices) {
    devices.push_back({{"id", d.id}, {"mud_url", d.mud_url}});
  }
  auto bindings = [](const std::map<std::string, std::set<std::string>>& m) {
    json out = json::object();
    for (const auto& [key, targets] : m) out[key] = targets;
    return out;
  };
  json prefixes = json::array();
  for (const auto& p : context.local_prefixes) prefixes.push_back(p.ToString());
  json doc{
      {"devices", std::move(devices)},
      {"controller_bindings", bindings(context.controller_bindings)},
      {"my_controller_bindings", bindings(context.my_controller_bindings)},
      {"local_prefixes", std::move(prefixes)},
  };
  if (context.dns_bindings) {
    json dns = json::object();
    for (const auto& [domain, list] : *context.dns_bindings) {
      json& entry = dns[domain] = json::array();
      for (const auto& p : list) entry.push_back(p.ToString());
    }
    doc["dns_bindings"] = std::move(dns);
  }
  return doc;
}

std::vector<std::string> CheckContext(const DeploymentContext& context) {
  std::vector<std::string> problems;
  std::set<std::string> ids;
  for (const auto& d : context.devices) {
    if (d.id.empty()) problems.push_back("device with empty id");
    if (!ids.insert(d.id).second) {
      problems.push_back("duplicate device id '" + d.id + "'");
    }
  }
  auto check_targets = [&](const std::set<std::string>& targets,
                           const std::string& where) {
    for (const auto& t : targets) {
      if (!ids.count(t)) {
        problems.push_back(where + " references unknown device '" + t + "'");
      }
    }
  };
  for (const auto& [cls, targets] : context.controller_bindings) {
    check_targets(targets, "controller binding '" + cls + "'");
  }
  for (const auto& [device, targets] : context.my_controller_bindings) {
    if (!ids.count(device)) {
      problems.push_back("my-controller binding for unknown device '" + device +
                         "'");
    }
    check_targets(targets, "my-controller binding of '" + device + "'");
  }
  return problems;
}

std::vector<std::shared_ptr<const MudFile>> AttachFiles(
    DeploymentContext& context,
    const std::vector<std::shared_ptr<const MudFile>>& files) {
  std::vector<std::shared_ptr<const MudFile>> unclaimed;
  for (const auto& file : files) {
    bool claimed = false;
    for (auto& device : context.devices) {
      if (device.mud_url == file->mud_url) {
        device.file = file;
        claimed = true;
      }
    }
    if (!claimed) unclaimed.push_back(file);
  }
  return unclaimed;
}

DeploymentContext SyntheticContext(
    const std::vector<std::pair<std::string, std::shared_ptr<const MudFile>>>&
        devices) {
  DeploymentContext context;
  for (const auto& [id, file] : devices) {
    context.devices.push_back(Device{id, file->mud_url, file});
  }
  return context;
}

}  // namespace mudkit
