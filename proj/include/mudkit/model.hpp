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

// Domain types shared by every mudkit module. Nothing in here performs I/O;
// all values are immutable once built and may be shared across threads.

#ifndef MUDKIT_MODEL_HPP_
#define MUDKIT_MODEL_HPP_

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mudkit/net.hpp"

namespace mudkit {

enum class Action : std::uint8_t { kAccept, kDrop };
enum class Direction : std::uint8_t { kFromDevice, kToDevice };

inline constexpr std::uint8_t kProtocolTcp = 6;
inline constexpr std::uint8_t kProtocolUdp = 17;

inline constexpr int kMudVersion = 1;
inline constexpr int kDefaultCacheValidity = 48;
inline constexpr int kMinCacheValidity = 1;
inline constexpr int kMaxCacheValidity = 168;

std::string_view ToString(Action action);
std::string_view ToString(Direction direction);  // "from-device" / "to-device"
std::optional<Action> ParseAction(std::string_view text);
std::optional<Direction> ParseDirection(std::string_view text);

// Inclusive port interval. An absent port constraint is the full range.
struct PortRange {
  std::uint16_t lo = 0;
  std::uint16_t hi = 65535;

  static constexpr PortRange Full() { return {0, 65535}; }
  static constexpr PortRange Single(std::uint16_t port) { return {port, port}; }

  constexpr bool valid() const { return lo <= hi; }
  constexpr bool is_full() const { return lo == 0 && hi == 65535; }
  constexpr bool Contains(std::uint16_t port) const {
    return lo <= port && port <= hi;
  }
  constexpr bool Contains(PortRange other) const {
    return lo <= other.lo && other.hi <= hi;
  }
  constexpr bool Intersects(PortRange other) const {
    return lo <= other.hi && other.lo <= hi;
  }

  auto operator<=>(const PortRange&) const = default;
};

std::string ToString(PortRange range);  // "443", "10-20", "any"

// The seven MUD abstractions plus an explicit address prefix.
namespace endpoint {
struct DnsName {
  std::string domain;
  auto operator<=>(const DnsName&) const = default;
};
struct LocalNetworks {
  auto operator<=>(const LocalNetworks&) const = default;
};
struct Controller {
  std::string class_uri;
  auto operator<=>(const Controller&) const = default;
};
struct MyController {
  auto operator<=>(const MyController&) const = default;
};
struct Manufacturer {
  std::string authority;
  auto operator<=>(const Manufacturer&) const = default;
};
struct SameManufacturer {
  auto operator<=>(const SameManufacturer&) const = default;
};
struct Model {
  std::string model_uri;
  auto operator<=>(const Model&) const = default;
};
struct ExplicitNetwork {
  IpPrefix prefix;
  auto operator<=>(const ExplicitNetwork&) const = default;
};
}  // namespace endpoint

using EndpointSpec =
    std::variant<endpoint::DnsName, endpoint::LocalNetworks,
                 endpoint::Controller, endpoint::MyController,
                 endpoint::Manufacturer, endpoint::SameManufacturer,
                 endpoint::Model, endpoint::ExplicitNetwork>;

enum class AbstractionKind : std::uint8_t {
  kDomainName,
  kLocalNetworks,
  kController,
  kMyController,
  kManufacturer,
  kSameManufacturer,
  kModel,
  kExplicitNetwork,
};

AbstractionKind KindOf(const EndpointSpec& spec);
std::string_view ToString(AbstractionKind kind);  // "same-manufacturer", ...
std::optional<AbstractionKind> ParseAbstractionKind(std::string_view text);
// "domain-name(cloud.example.com)", "my-controller", ...
std::string Describe(const EndpointSpec& spec);

struct MatchSet {
  std::optional<std::uint8_t> protocol;  // absent: any IP protocol
  std::optional<EndpointSpec> endpoint;
  std::optional<PortRange> src_port;  // absent: full range
  std::optional<PortRange> dst_port;
  std::optional<Direction> direction_initiated;

  // True when no dimension is constrained at all.
  bool empty() const {
    return !protocol && !endpoint && !src_port && !dst_port &&
           !direction_initiated;
  }

  bool operator==(const MatchSet&) const = default;
};

// Full-range ports collapse to "absent" and domain names are lowercased.
// Canonicalize(Canonicalize(m)) == Canonicalize(m).
MatchSet Canonicalize(MatchSet match);

struct Ace {
  std::string name;
  MatchSet match;
  Action action = Action::kAccept;

  bool operator==(const Ace&) const = default;
};

struct Acl {
  std::string name;
  IpVersion ip_version = IpVersion::v4;
  std::vector<Ace> aces;

  bool operator==(const Acl&) const = default;
};

struct MudFile {
  int mud_version = kMudVersion;
  std::string mud_url;
  std::string last_update;
  int cache_validity = kDefaultCacheValidity;
  bool is_supported = true;
  std::optional<std::string> systeminfo;
  std::optional<std::string> mfg_name;
  std::optional<std::string> model_name;
  std::optional<std::string> documentation;
  std::vector<std::string> from_device_policy;
  std::vector<std::string> to_device_policy;
  std::vector<Acl> acls;

  // Nodes the model does not interpret, kept verbatim (compact JSON text) so
  // that serialization reproduces them. Keyed by member name.
  std::map<std::string, std::string> extra_mud_nodes;
  std::map<std::string, std::string> extra_top_level_nodes;

  const Acl* FindAcl(std::string_view name) const;

  bool operator==(const MudFile&) const = default;
};

// Provenance of a concrete flow: which ACE of which file produced it.
struct RuleRef {
  std::string mud_url;
  std::string acl_name;
  std::string ace_name;
  std::optional<AbstractionKind> abstraction;

  auto operator<=>(const RuleRef&) const = default;
};

namespace resolved {
struct InternetDomain {
  std::string domain;
  auto operator<=>(const InternetDomain&) const = default;
};
struct InternetNetwork {
  IpPrefix prefix;
  auto operator<=>(const InternetNetwork&) const = default;
};
struct LocalDevice {
  std::string device_id;
  auto operator<=>(const LocalDevice&) const = default;
};
struct LocalAny {
  auto operator<=>(const LocalAny&) const = default;
};
// Declared intent that the deployment context could not bind. Kept for
// display only; never matches packets.
struct Unresolved {
  EndpointSpec spec;
  auto operator<=>(const Unresolved&) const = default;
};
}  // namespace resolved

using ResolvedEndpoint =
    std::variant<resolved::InternetDomain, resolved::InternetNetwork,
                 resolved::LocalDevice, resolved::LocalAny,
                 resolved::Unresolved>;

// Stable textual reference: "domain:x", "network:p", "device:id",
// "local-any", "unresolved:<abstraction>".
std::string EndpointRef(const ResolvedEndpoint& endpoint);
// Inverse of EndpointRef for the concrete variants (not "unresolved:").
std::optional<ResolvedEndpoint> ParseEndpointRef(std::string_view text);

inline bool IsUnresolved(const ResolvedEndpoint& endpoint) {
  return std::holds_alternative<resolved::Unresolved>(endpoint);
}

struct ConcreteFlow {
  std::string device_id;
  Direction direction = Direction::kFromDevice;
  ResolvedEndpoint remote;
  std::optional<std::uint8_t> protocol;
  PortRange src_port;
  PortRange dst_port;
  std::optional<Direction> direction_initiated;
  Action action = Action::kAccept;
  std::set<RuleRef> provenance;

  auto operator<=>(const ConcreteFlow&) const = default;
  bool operator==(const ConcreteFlow&) const = default;
};

// "tcp", "udp", "any" or the protocol number.
std::string ProtocolName(std::optional<std::uint8_t> protocol);

// One-line human description, e.g.
// "thermostat from-device domain:cloud.example.com tcp dst 443 accept".
std::string Describe(const ConcreteFlow& flow);

// Equality of everything except provenance.
bool SameMatchAndAction(const ConcreteFlow& a, const ConcreteFlow& b);

enum class FindingKind : std::uint8_t {
  kProtocolError,
  kSemanticWarning,
  kUnresolvedAbstraction,
  kDuplicate,
  kSubsumed,
  kOverlap,
  kConflict,
};

enum class Severity : std::uint8_t { kError, kWarning, kInfo };

std::string_view ToString(FindingKind kind);
std::string_view ToString(Severity severity);

struct Finding {
  FindingKind kind = FindingKind::kProtocolError;
  Severity severity = Severity::kError;
  std::string message;
  std::vector<RuleRef> refs;
  std::vector<ConcreteFlow> flows;

  auto operator<=>(const Finding&) const = default;
  bool operator==(const Finding&) const = default;
};

bool HasErrors(const std::vector<Finding>& findings);

struct Device {
  std::string id;
  std::string mud_url;
  std::shared_ptr<const MudFile> file;  // null: peer known only by URL

  std::optional<std::string> authority() const { return UriAuthority(mud_url); }
};

struct DeploymentContext {
  std::vector<Device> devices;
  std::map<std::string, std::set<std::string>> controller_bindings;
  std::map<std::string, std::set<std::string>> my_controller_bindings;
  std::vector<IpPrefix> local_prefixes;
  std::optional<std::map<std::string, std::vector<IpPrefix>>> dns_bindings;

  const Device* FindDevice(std::string_view id) const;
};

// Raised for queries naming a device the ruleset or context does not know.
class UnknownDeviceError : public std::out_of_range {
 public:
  explicit UnknownDeviceError(const std::string& device_id)
      : std::out_of_range("unknown device: " + device_id),
        device_id_(device_id) {}
  const std::string& device_id() const { return device_id_; }

 private:
  std::string device_id_;
};

}  // namespace mudkit

#endif  // MUDKIT_MODEL_HPP_
