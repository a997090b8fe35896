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

#ifndef MUDKIT_RESOLVER_HPP_
#define MUDKIT_RESOLVER_HPP_

#include <optional>
#include <string_view>
#include <vector>

#include "mudkit/model.hpp"

namespace mudkit {

struct EndpointResolution {
  std::vector<ResolvedEndpoint> endpoints;
  // Set when a device-relative abstraction bound to nobody.
  std::optional<Finding> finding;
};

// Expands one abstraction for `device_id`. Local peers come back in context
// order and never include `device_id` itself.
//
//   domain-name        -> the domain, plus one network per dns_bindings entry
//   local-networks     -> LocalAny
//   manufacturer(a)    -> every device whose MUD URL authority is a
//   same-manufacturer  -> every device sharing this device's authority
//   model(u)           -> every device whose MUD URL is u
//   controller(c)      -> controller_bindings[c]
//   my-controller      -> my_controller_bindings[device_id]
//   network            -> the prefix
EndpointResolution ResolveEndpoint(const EndpointSpec& spec,
                                   std::string_view device_id,
                                   const DeploymentContext& context);

struct FileResolution {
  std::vector<ConcreteFlow> flows;
  std::vector<Finding> findings;
};

// Flows for every ACE of every policy-referenced ACL. ACEs whose abstraction
// resolves to nothing yield one placeholder flow with an Unresolved remote.
// Throws UnknownDeviceError when `device_id` is not in the context.
FileResolution ResolveFile(std::string_view device_id, const MudFile& file,
                           const DeploymentContext& context);

}  // namespace mudkit

#endif  // MUDKIT_RESOLVER_HPP_
