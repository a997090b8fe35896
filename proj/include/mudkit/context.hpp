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

// Deployment context documents: which devices sit on the network, which MUD
// URL each one emits, and how controller classes are bound.
//
//   {
//     "devices": [{"id": "thermostat", "mud_url": "https://mfg.example.com/t"}],
//     "controller_bindings": {"urn:example:ctl": ["hub"]},
//     "my_controller_bindings": {"thermostat": ["hub"]},
//     "local_prefixes": ["192.168.1.0/24"],
//     "dns_bindings": {"cloud.example.com": ["203.0.113.0/24"]}
//   }

#ifndef MUDKIT_CONTEXT_HPP_
#define MUDKIT_CONTEXT_HPP_

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mudkit/model.hpp"

namespace mudkit {

class ContextError : public std::runtime_error {
 public:
  enum class Reason { kMalformed, kUnknownDevice };

  ContextError(Reason reason, const std::string& message)
      : std::runtime_error(message), reason_(reason) {}
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

// Throws ContextError. Devices come back without files; see AttachFiles.
DeploymentContext DecodeDeploymentContext(const nlohmann::json& doc);
DeploymentContext ParseDeploymentContext(std::string_view text);
nlohmann::json EncodeDeploymentContext(const DeploymentContext& context);

// Invariant violations (duplicate ids, bindings naming undeclared devices).
std::vector<std::string> CheckContext(const DeploymentContext& context);

// Gives every device the file whose mud_url equals its own. Returns the files
// no device claimed.
std::vector<std::shared_ptr<const MudFile>> AttachFiles(
    DeploymentContext& context,
    const std::vector<std::shared_ptr<const MudFile>>& files);

// One device per (id, file) pair and no bindings.
DeploymentContext SyntheticContext(
    const std::vector<std::pair<std::string, std::shared_ptr<const MudFile>>>&
        devices);

}  // namespace mudkit

#endif  // MUDKIT_CONTEXT_HPP_
