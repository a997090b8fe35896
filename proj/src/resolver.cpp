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

#include "mudkit/resolver.hpp"

#include <string>

#include "overloaded.hpp"

namespace mudkit {
namespace {

using internal::Overloaded;

// Devices in context order, skipping `self`.
template <class Pred>
std::vector<ResolvedEndpoint> PeersWhere(const DeploymentContext& context,
                                         std::string_view self, Pred pred) {
  std::vector<ResolvedEndpoint> out;
  for (const auto& device : context.devices) {
    if (device.id != self && pred(device)) {
      out.push_back(resolved::LocalDevice{device.id});
    }
  }
  return out;
}

Finding Unbound(Severity severity, std::string message) {
  return Finding{FindingKind::kUnresolvedAbstraction, severity,
                 std::move(message), {}, {}};
}

}  // namespace

EndpointResolution ResolveEndpoint(const EndpointSpec& spec,
                                   std::string_view device_id,
                                   const DeploymentContext& context) {
  const Device* self = context.FindDevice(device_id);
  const std::string id(device_id);
  EndpointResolution result;

  std::visit(
      Overloaded{
          [&](const endpoint::DnsName& e) {
            result.endpoints.push_back(resolved::InternetDomain{e.domain});
            if (context.dns_bindings) {
              if (auto it = context.dns_bindings->find(e.domain);
                  it != context.dns_bindings->end()) {
                for (const auto& prefix : it->second) {
                  result.endpoints.push_back(resolved::InternetNetwork{prefix});
                }
              }
            }
          },
          [&](const endpoint::LocalNetworks&) {
            result.endpoints.push_back(resolved::LocalAny{});
          },
          [&](const endpoint::ExplicitNetwork& e) {
            result.endpoints.push_back(resolved::InternetNetwork{e.prefix});
          },
          [&](const endpoint::Manufacturer& e) {
            std::string wanted = ToLower(e.authority);
            result.endpoints = PeersWhere(context, id, [&](const Device& d) {
              return d.authority() == wanted;
            });
            if (result.endpoints.empty()) {
              result.finding = Unbound(
                  Severity::kInfo, "manufacturer(" + wanted + ") for device '" +
                                       id + "' matches no other device");
            }
          },
          [&](const endpoint::SameManufacturer&) {
            auto own = self ? self->authority() : std::nullopt;
            if (own) {
              result.endpoints = PeersWhere(context, id, [&](const Device& d) {
                return d.authority() == own;
              });
            }
            if (result.endpoints.empty()) {
              result.finding =
                  Unbound(Severity::kInfo, "same-manufacturer for device '" +
                                               id + "' has no peer device");
            }
          },
          [&](const endpoint::Model& e) {
            result.endpoints = PeersWhere(context, id, [&](const Device& d) {
              return d.mud_url == e.model_uri;
            });
            if (result.endpoints.empty()) {
              result.finding = Unbound(
                  Severity::kInfo, "model(" + e.model_uri + ") for device '" +
                                       id + "' has no other instance");
            }
          },
          [&](const endpoint::Controller& e) {
            if (auto it = context.controller_bindings.find(e.class_uri);
                it != context.controller_bindings.end()) {
              result.endpoints =
                  PeersWhere(context, id, [&](const Device& d) {
                    return it->second.count(d.id) > 0;
                  });
            }
            if (result.endpoints.empty()) {
              result.finding = Unbound(
                  Severity::kWarning, "controller(" + e.class_uri +
                                          ") is not bound for device '" + id +
                                          "'");
            }
          },
          [&](const endpoint::MyController&) {
            if (auto it = context.my_controller_bindings.find(id);
                it != context.my_controller_bindings.end()) {
              result.endpoints =
                  PeersWhere(context, id, [&](const Device& d) {
                    return it->second.count(d.id) > 0;
                  });
            }
            if (result.endpoints.empty()) {
              result.finding = Unbound(
                  Severity::kWarning,
                  "my-controller is not bound for device '" + id + "'");
            }
          },
      },
      spec);
  return result;
}

FileResolution ResolveFile(std::string_view device_id, const MudFile& file,
                           const DeploymentContext& context) {
  if (context.FindDevice(device_id) == nullptr) {
    throw UnknownDeviceError(std::string(device_id));
  }
  FileResolution out;

  auto resolve_policy = [&](const std::vector<std::string>& policy,
                            Direction direction) {
    for (const auto& acl_name : policy) {
      const Acl* acl = file.FindAcl(acl_name);
      if (acl == nullptr) continue;
      for (const Ace& ace : acl->aces) {
        if (!ace.match.endpoint) continue;
        const EndpointSpec& spec = *ace.match.endpoint;
        RuleRef ref{file.mud_url, acl->name, ace.name, KindOf(spec)};

        ConcreteFlow base;
        base.device_id = std::string(device_id);
        base.direction = direction;
        base.protocol = ace.match.protocol;
        base.src_port = ace.match.src_port.value_or(PortRange::Full());
        base.dst_port = ace.match.dst_port.value_or(PortRange::Full());
        base.direction_initiated = ace.match.direction_initiated;
        base.action = ace.action;
        base.provenance = {ref};

        auto resolution = ResolveEndpoint(spec, device_id, context);
        for (auto& endpoint : resolution.endpoints) {
          ConcreteFlow flow = base;
          flow.remote = std::move(endpoint);
          out.flows.push_back(std::move(flow));
        }
        if (resolution.endpoints.empty()) {
          ConcreteFlow placeholder = base;
          placeholder.remote = resolved::Unresolved{spec};
          out.flows.push_back(placeholder);
          Finding finding = resolution.finding.value_or(
              Unbound(Severity::kWarning, Describe(spec) + " resolved to nothing"));
          finding.refs.push_back(ref);
          finding.flows.push_back(std::move(placeholder));
          out.findings.push_back(std::move(finding));
        }
      }
    }
  };
  resolve_policy(file.from_device_policy, Direction::kFromDevice);
  resolve_policy(file.to_device_policy, Direction::kToDevice);
  return out;
}

}  // namespace mudkit
