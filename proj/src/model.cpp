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

#include "mudkit/model.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "overloaded.hpp"

namespace mudkit {
namespace {

using internal::Overloaded;

constexpr std::array<std::pair<AbstractionKind, std::string_view>, 8>
    kAbstractionNames = {{
        {AbstractionKind::kDomainName, "domain-name"},
        {AbstractionKind::kLocalNetworks, "local-networks"},
        {AbstractionKind::kController, "controller"},
        {AbstractionKind::kMyController, "my-controller"},
        {AbstractionKind::kManufacturer, "manufacturer"},
        {AbstractionKind::kSameManufacturer, "same-manufacturer"},
        {AbstractionKind::kModel, "model"},
        {AbstractionKind::kExplicitNetwork, "network"},
    }};

}  // namespace

std::string_view ToString(Action action) {
  return action == Action::kAccept ? "accept" : "drop";
}

std::string_view ToString(Direction direction) {
  return direction == Direction::kFromDevice ? "from-device" : "to-device";
}

std::optional<Action> ParseAction(std::string_view text) {
  if (text == "accept") return Action::kAccept;
  if (text == "drop") return Action::kDrop;
  return std::nullopt;
}

std::optional<Direction> ParseDirection(std::string_view text) {
  if (text == "from-device") return Direction::kFromDevice;
  if (text == "to-device") return Direction::kToDevice;
  return std::nullopt;
}

std::string ToString(PortRange range) {
  if (range.is_full()) return "any";
  if (range.lo == range.hi) return std::to_string(range.lo);
  return std::to_string(range.lo) + "-" + std::to_string(range.hi);
}

AbstractionKind KindOf(const EndpointSpec& spec) {
  return std::visit(
      Overloaded{
          [](const endpoint::DnsName&) { return AbstractionKind::kDomainName; },
          [](const endpoint::LocalNetworks&) {
            return AbstractionKind::kLocalNetworks;
          },
          [](const endpoint::Controller&) {
            return AbstractionKind::kController;
          },
          [](const endpoint::MyController&) {
            return AbstractionKind::kMyController;
          },
          [](const endpoint::Manufacturer&) {
            return AbstractionKind::kManufacturer;
          },
          [](const endpoint::SameManufacturer&) {
            return AbstractionKind::kSameManufacturer;
          },
          [](const endpoint::Model&) { return AbstractionKind::kModel; },
          [](const endpoint::ExplicitNetwork&) {
            return AbstractionKind::kExplicitNetwork;
          },
      },
      spec);
}

std::string_view ToString(AbstractionKind kind) {
  for (const auto& [k, name] : kAbstractionNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<AbstractionKind> ParseAbstractionKind(std::string_view text) {
  for (const auto& [k, name] : kAbstractionNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::string Describe(const EndpointSpec& spec) {
  std::string name(ToString(KindOf(spec)));
  std::visit(Overloaded{
                 [&](const endpoint::DnsName& e) {
                   name += "(" + e.domain + ")";
                 },
                 [&](const endpoint::Controller& e) {
                   name += "(" + e.class_uri + ")";
                 },
                 [&](const endpoint::Manufacturer& e) {
                   name += "(" + e.authority + ")";
                 },
                 [&](const endpoint::Model& e) {
                   name += "(" + e.model_uri + ")";
                 },
                 [&](const endpoint::ExplicitNetwork& e) {
                   name += "(" + e.prefix.ToString() + ")";
                 },
                 [](const auto&) {},
             },
             spec);
  return name;
}

MatchSet Canonicalize(MatchSet match) {
  if (match.src_port && match.src_port->is_full()) match.src_port.reset();
  if (match.dst_port && match.dst_port->is_full()) match.dst_port.reset();
  if (match.endpoint) {
    if (auto* dns = std::get_if<endpoint::DnsName>(&*match.endpoint)) {
      dns->domain = ToLower(dns->domain);
    } else if (auto* mfg =
                   std::get_if<endpoint::Manufacturer>(&*match.endpoint)) {
      mfg->authority = ToLower(mfg->authority);
    }
  }
  return match;
}

const Acl* MudFile::FindAcl(std::string_view name) const {
  auto it = std::find_if(acls.begin(), acls.end(),
                         [&](const Acl& acl) { return acl.name == name; });
  return it == acls.end() ? nullptr : &*it;
}

std::string EndpointRef(const ResolvedEndpoint& endpoint) {
  return std::visit(
      Overloaded{
          [](const resolved::InternetDomain& e) {
            return "domain:" + e.domain;
          },
          [](const resolved::InternetNetwork& e) {
            return "network:" + e.prefix.ToString();
          },
          [](const resolved::LocalDevice& e) {
            return "device:" + e.device_id;
          },
          [](const resolved::LocalAny&) { return std::string("local-any"); },
          [](const resolved::Unresolved& e) {
            return "unresolved:" + Describe(e.spec);
          },
      },
      endpoint);
}

std::optional<ResolvedEndpoint> ParseEndpointRef(std::string_view text) {
  auto starts = [&](std::string_view prefix) {
    return text.substr(0, prefix.size()) == prefix;
  };
  if (text == "local-any") return resolved::LocalAny{};
  if (starts("domain:") && text.size() > 7) {
    return resolved::InternetDomain{ToLower(text.substr(7))};
  }
  if (starts("device:") && text.size() > 7) {
    return resolved::LocalDevice{std::string(text.substr(7))};
  }
  if (starts("network:")) {
    if (auto prefix = IpPrefix::Parse(text.substr(8))) {
      return resolved::InternetNetwork{*prefix};
    }
  }
  return std::nullopt;
}

std::string ProtocolName(std::optional<std::uint8_t> protocol) {
  if (!protocol) return "any";
  if (*protocol == kProtocolTcp) return "tcp";
  if (*protocol == kProtocolUdp) return "udp";
  return std::to_string(*protocol);
}

std::string Describe(const ConcreteFlow& flow) {
  std::string out = flow.device_id + " " + std::string(ToString(flow.direction)) +
                    " " + EndpointRef(flow.remote) + " " +
                    ProtocolName(flow.protocol);
  if (!flow.src_port.is_full()) out += " src " + ToString(flow.src_port);
  if (!flow.dst_port.is_full()) out += " dst " + ToString(flow.dst_port);
  if (flow.direction_initiated) {
    out += " initiated " + std::string(ToString(*flow.direction_initiated));
  }
  out += " ";
  out += ToString(flow.action);
  return out;
}

bool SameMatchAndAction(const ConcreteFlow& a, const ConcreteFlow& b) {
  return a.device_id == b.device_id && a.direction == b.direction &&
         a.remote == b.remote && a.protocol == b.protocol &&
         a.src_port == b.src_port && a.dst_port == b.dst_port &&
         a.direction_initiated == b.direction_initiated &&
         a.action == b.action;
}

std::string_view ToString(FindingKind kind) {
  switch (kind) {
    case FindingKind::kProtocolError:
      return "protocol_error";
    case FindingKind::kSemanticWarning:
      return "semantic_warning";
    case FindingKind::kUnresolvedAbstraction:
      return "unresolved_abstraction";
    case FindingKind::kDuplicate:
      return "duplicate";
    case FindingKind::kSubsumed:
      return "subsumed";
    case FindingKind::kOverlap:
      return "overlap";
    case FindingKind::kConflict:
      return "conflict";
  }
  return "unknown";
}

std::string_view ToString(Severity severity) {
  switch (severity) {
    case Severity::kError:
      return "error";
    case Severity::kWarning:
      return "warning";
    case Severity::kInfo:
      return "info";
  }
  return "unknown";
}

bool HasErrors(const std::vector<Finding>& findings) {
  return std::any_of(findings.begin(), findings.end(), [](const Finding& f) {
    return f.severity == Severity::kError;
  });
}

const Device* DeploymentContext::FindDevice(std::string_view id) const {
  auto it = std::find_if(devices.begin(), devices.end(),
                         [&](const Device& d) { return d.id == id; });
  return it == devices.end() ? nullptr : &*it;
}

}  // namespace mudkit
