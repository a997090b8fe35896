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

#include "mudkit/parser.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <utility>

#include "json.hpp"
#include "overloaded.hpp"

namespace mudkit {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
using internal::Overloaded;

constexpr std::string_view kMudContainer = "ietf-mud:mud";
constexpr std::string_view kAclsContainer = "ietf-access-control-list:acls";
constexpr std::string_view kAclModulePrefix = "ietf-access-control-list:";
constexpr std::string_view kDirectionInitiated = "ietf-mud:direction-initiated";
constexpr std::string_view kDstDnsName = "ietf-acldns:dst-dnsname";
constexpr std::string_view kSrcDnsName = "ietf-acldns:src-dnsname";

// Leaves of the ietf-mud container that are standard but not modeled; they
// round-trip without a warning.
const std::set<std::string, std::less<>> kPassthroughMudNodes = {
    "firmware-rev", "software-rev", "extensions", "mud-signature"};

Finding MakeFinding(FindingKind kind, Severity severity, std::string message,
                    std::vector<RuleRef> refs = {}) {
  return Finding{kind, severity, std::move(message), std::move(refs), {}};
}

Finding ProtocolError(std::string message, std::vector<RuleRef> refs = {}) {
  return MakeFinding(FindingKind::kProtocolError, Severity::kError,
                     std::move(message), std::move(refs));
}

std::string_view StripAclPrefix(std::string_view value) {
  if (value.substr(0, kAclModulePrefix.size()) == kAclModulePrefix) {
    value.remove_prefix(kAclModulePrefix.size());
  }
  return value;
}

bool IsEmptyLeaf(const json& value) {
  return value.is_null() ||
         (value.is_array() && value.size() == 1 && value.front().is_null());
}

class Decoder {
 public:
  ParseResult Run(const json& doc) {
    if (!doc.is_object()) {
      Error("document root must be a JSON object");
      return Finish(std::nullopt);
    }
    MudFile file;
    for (const auto& [key, value] : doc.items()) {
      if (key == kMudContainer || key == kAclsContainer) continue;
      file.extra_top_level_nodes[key] = value.dump();
      Warning("unknown top-level node '" + key + "' preserved");
    }

    auto mud = doc.find(kMudContainer);
    if (mud == doc.end() || !mud->is_object()) {
      Error("missing '" + std::string(kMudContainer) + "' container");
    } else {
      DecodeMudContainer(*mud, file);
    }

    if (auto acls = doc.find(kAclsContainer); acls != doc.end()) {
      DecodeAcls(*acls, file);
    }
    CheckReferences(file);

    for (auto& finding : ValidateSemantics(file)) {
      findings_.push_back(std::move(finding));
    }
    return Finish(std::move(file));
  }

 private:
  void Error(std::string message, std::vector<RuleRef> refs = {}) {
    findings_.push_back(ProtocolError(std::move(message), std::move(refs)));
  }

  void Warning(std::string message) {
    findings_.push_back(MakeFinding(FindingKind::kSemanticWarning,
                                    Severity::kWarning, std::move(message)));
  }

  RuleRef Ref(std::string_view acl = {}, std::string_view ace = {}) const {
    return RuleRef{mud_url_, std::string(acl), std::string(ace), std::nullopt};
  }

  ParseResult Finish(std::optional<MudFile> file) {
    ParseResult result;
    result.findings = std::move(findings_);
    if (!HasErrors(result.findings)) result.file = std::move(file);
    return result;
  }

  template <class T>
  std::optional<T> Leaf(const json& container, std::string_view key,
                        bool required, std::string_view where) {
    auto it = container.find(key);
    if (it == container.end()) {
      if (required) {
        Error("missing '" + std::string(key) + "' in " + std::string(where));
      }
      return std::nullopt;
    }
    if constexpr (std::is_same_v<T, std::string>) {
      if (it->is_string()) return it->template get<std::string>();
      Error("'" + std::string(key) + "' must be a string");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (it->is_boolean()) return it->template get<bool>();
      Error("'" + std::string(key) + "' must be a boolean");
    } else {
      if (it->is_number_integer()) return it->template get<std::int64_t>();
      Error("'" + std::string(key) + "' must be an integer");
    }
    return std::nullopt;
  }

  void DecodeMudContainer(const json& mud, MudFile& file) {
    static const std::set<std::string, std::less<>> kKnown = {
        "mud-version",   "mud-url",       "last-update",
        "cache-validity", "is-supported", "systeminfo",
        "mfg-name",      "model-name",    "documentation",
        "from-device-policy", "to-device-policy"};
    const std::string where(kMudContainer);

    if (auto url = Leaf<std::string>(mud, "mud-url", true, where)) {
      file.mud_url = *url;
      mud_url_ = *url;
      if (!UriAuthority(*url)) {
        Error("mud-url '" + *url + "' has no authority component", {Ref()});
      }
    }
    if (auto version = Leaf<std::int64_t>(mud, "mud-version", true, where)) {
      if (*version != kMudVersion) {
        Error("unsupported mud-version " + std::to_string(*version), {Ref()});
      }
      file.mud_version = static_cast<int>(*version);
    }
    if (auto updated = Leaf<std::string>(mud, "last-update", true, where)) {
      static const std::regex kIso8601(
          R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2}))");
      if (!std::regex_match(*updated, kIso8601)) {
        Error("last-update '" + *updated + "' is not an ISO-8601 timestamp",
              {Ref()});
      }
      file.last_update = *updated;
    }
    if (auto validity =
            Leaf<std::int64_t>(mud, "cache-validity", false, where)) {
      if (*validity < kMinCacheValidity || *validity > kMaxCacheValidity) {
        Error("cache-validity " + std::to_string(*validity) +
                  " outside [1, 168] hours",
              {Ref()});
      } else {
        file.cache_validity = static_cast<int>(*validity);
      }
    }
    if (auto supported = Leaf<bool>(mud, "is-supported", true, where)) {
      file.is_supported = *supported;
    }
    file.systeminfo = Leaf<std::string>(mud, "systeminfo", false, where);
    file.mfg_name = Leaf<std::string>(mud, "mfg-name", false, where);
    file.model_name = Leaf<std::string>(mud, "model-name", false, where);
    file.documentation = Leaf<std::string>(mud, "documentation", false, where);
    if (file.documentation && !IsAbsoluteUri(*file.documentation)) {
      Error("documentation '" + *file.documentation + "' is not a URI",
            {Ref()});
    }

    file.from_device_policy = DecodePolicy(mud, "from-device-policy");
    file.to_device_policy = DecodePolicy(mud, "to-device-policy");

    for (const auto& [key, value] : mud.items()) {
      if (kKnown.count(key)) continue;
      file.extra_mud_nodes[key] = value.dump();
      if (!kPassthroughMudNodes.count(key)) {
        Warning("unknown node '" + key + "' in " + where + " preserved");
      }
    }
  }

  std::vector<std::string> DecodePolicy(const json& mud,
                                        std::string_view key) {
    std::vector<std::string> names;
    auto policy = mud.find(key);
    if (policy == mud.end()) return names;
    const std::string where(key);
    const json* list = nullptr;
    if (policy->is_object()) {
      auto lists = policy->find("access-lists");
      if (lists != policy->end() && lists->is_object()) {
        auto entries = lists->find("access-list");
        if (entries != lists->end() && entries->is_array()) list = &*entries;
      }
    }
    if (list == nullptr) {
      Error(where + " must contain access-lists/access-list[]");
      return names;
    }
    for (const auto& entry : *list) {
      if (entry.is_object() && entry.contains("name") &&
          entry["name"].is_string()) {
        names.push_back(entry["name"].get<std::string>());
      } else {
        Error(where + " entry must be an object with a string name");
      }
    }
    return names;
  }

  void DecodeAcls(const json& container, MudFile& file) {
    auto list = container.is_object() ? container.find("acl") : container.end();
    if (!container.is_object() || list == container.end() ||
        !list->is_array()) {
      Error(std::string(kAclsContainer) + " must contain an acl[] list");
      return;
    }
    std::set<std::string> seen;
    for (const auto& entry : *list) {
      if (!entry.is_object()) {
        Error("acl entry must be an object");
        continue;
      }
      auto name = Leaf<std::string>(entry, "name", true, "acl entry");
      if (!name) continue;
      if (!seen.insert(*name).second) {
        Error("duplicate ACL name '" + *name + "'", {Ref(*name)});
        continue;
      }
      file.acls.push_back(DecodeAcl(entry, *name));
    }
  }

  Acl DecodeAcl(const json& entry, const std::string& name) {
    Acl acl;
    acl.name = name;
    if (auto type = entry.find("type"); type != entry.end()) {
      std::string_view value =
          type->is_string() ? StripAclPrefix(type->get_ref<const std::string&>())
                            : std::string_view();
      if (value == "ipv4-acl-type") {
        acl.ip_version = IpVersion::v4;
      } else if (value == "ipv6-acl-type") {
        acl.ip_version = IpVersion::v6;
      } else {
        Error("ACL '" + name + "' has unsupported type", {Ref(name)});
      }
    } else {
      Error("ACL '" + name + "' is missing its type", {Ref(name)});
    }

    const json* aces = nullptr;
    if (auto container = entry.find("aces");
        container != entry.end() && container->is_object()) {
      if (auto list = container->find("ace");
          list != container->end() && list->is_array()) {
        aces = &*list;
      }
    }
    if (aces == nullptr || aces->empty()) {
      Error("ACL '" + name + "' has no entries", {Ref(name)});
      return acl;
    }
    std::set<std::string> seen;
    for (const auto& ace_json : *aces) {
      if (!ace_json.is_object()) {
        Error("ACE in ACL '" + name + "' must be an object", {Ref(name)});
        continue;
      }
      auto ace_name = Leaf<std::string>(ace_json, "name", true, "ACE");
      if (!ace_name) continue;
      if (!seen.insert(*ace_name).second) {
        Error("duplicate ACE name '" + *ace_name + "' in ACL '" + name + "'",
              {Ref(name, *ace_name)});
        continue;
      }
      acl.aces.push_back(DecodeAce(ace_json, acl, *ace_name));
    }
    return acl;
  }

  Ace DecodeAce(const json& entry, const Acl& acl, const std::string& name) {
    Ace ace;
    ace.name = name;
    const RuleRef ref = Ref(acl.name, name);

    auto actions = entry.find("actions");
    const json* forwarding = nullptr;
    if (actions != entry.end() && actions->is_object()) {
      if (auto it = actions->find("forwarding"); it != actions->end()) {
        forwarding = &*it;
      }
    }
    if (forwarding == nullptr || !forwarding->is_string()) {
      Error("ACE '" + name + "' has no forwarding action", {ref});
    } else {
      std::string_view value =
          StripAclPrefix(forwarding->get_ref<const std::string&>());
      if (value == "accept") {
        ace.action = Action::kAccept;
      } else if (value == "drop" || value == "reject") {
        ace.action = Action::kDrop;
      } else {
        Error("ACE '" + name + "' has unsupported forwarding action '" +
                  std::string(value) + "'",
              {ref});
      }
    }

    auto matches = entry.find("matches");
    if (matches == entry.end()) return ace;
    if (!matches->is_object()) {
      Error("matches of ACE '" + name + "' must be an object", {ref});
      return ace;
    }
    ace.match = Canonicalize(DecodeMatches(*matches, acl, ref));
    return ace;
  }

  MatchSet DecodeMatches(const json& matches, const Acl& acl,
                         const RuleRef& ref) {
    MatchSet match;
    std::vector<EndpointSpec> endpoints;
    std::optional<std::uint8_t> implied_protocol;
    const char* l3_key = acl.ip_version == IpVersion::v4 ? "ipv4" : "ipv6";

    for (const auto& [key, value] : matches.items()) {
      if (key == "ipv4" || key == "ipv6") {
        if (key != l3_key) {
          Error("'" + key + "' match inside " +
                    (acl.ip_version == IpVersion::v4 ? "an ipv4" : "an ipv6") +
                    " ACL",
                {ref});
          continue;
        }
        DecodeL3(value, acl.ip_version, ref, match, endpoints);
      } else if (key == "tcp" || key == "udp") {
        std::uint8_t proto = key == "tcp" ? kProtocolTcp : kProtocolUdp;
        if (implied_protocol && *implied_protocol != proto) {
          Error("ACE combines tcp and udp matches", {ref});
          continue;
        }
        implied_protocol = proto;
        DecodeL4(value, key, ref, match);
      } else if (key == kMudContainer) {
        DecodeAbstractions(value, ref, endpoints);
      } else {
        Error("unsupported match type '" + key + "'", {ref});
      }
    }

    if (implied_protocol) {
      if (match.protocol && *match.protocol != *implied_protocol) {
        Error("port match container does not agree with protocol " +
                  std::to_string(*match.protocol),
              {ref});
      } else {
        match.protocol = implied_protocol;
      }
    }
    if (endpoints.size() > 1) {
      std::string kinds;
      for (const auto& e : endpoints) {
        if (!kinds.empty()) kinds += ", ";
        kinds += ToString(KindOf(e));
      }
      Error("ACE combines multiple endpoint abstractions (" + kinds +
                "); one per ACE is supported",
            {ref});
    }
    if (!endpoints.empty()) match.endpoint = endpoints.front();
    return match;
  }

  void DecodeL3(const json& l3, IpVersion version, const RuleRef& ref,
                MatchSet& match, std::vector<EndpointSpec>& endpoints) {
    if (!l3.is_object()) {
      Error("ip match must be an object", {ref});
      return;
    }
    const std::string dst_net = version == IpVersion::v4
                                    ? "destination-ipv4-network"
                                    : "destination-ipv6-network";
    const std::string src_net = version == IpVersion::v4
                                    ? "source-ipv4-network"
                                    : "source-ipv6-network";
    for (const auto& [key, value] : l3.items()) {
      if (key == "protocol") {
        if (value.is_number_integer() && value.get<std::int64_t>() >= 0 &&
            value.get<std::int64_t>() <= 255) {
          match.protocol = static_cast<std::uint8_t>(value.get<int>());
        } else {
          Error("protocol must be an integer in [0, 255]", {ref});
        }
      } else if (key == kDstDnsName || key == kSrcDnsName) {
        if (value.is_string()) {
          endpoints.push_back(endpoint::DnsName{value.get<std::string>()});
        } else {
          Error("'" + key + "' must be a string", {ref});
        }
      } else if (key == dst_net || key == src_net) {
        std::optional<IpPrefix> prefix;
        if (value.is_string()) {
          prefix = IpPrefix::Parse(value.get<std::string>());
        }
        if (!prefix || prefix->family() != version) {
          Error("'" + key + "' is not a valid prefix for this address family",
                {ref});
        } else {
          endpoints.push_back(endpoint::ExplicitNetwork{*prefix});
        }
      } else {
        Error("unsupported match field '" + key + "'", {ref});
      }
    }
  }

  void DecodeL4(const json& l4, const std::string& container,
                const RuleRef& ref, MatchSet& match) {
    if (!l4.is_object()) {
      Error("'" + container + "' match must be an object", {ref});
      return;
    }
    for (const auto& [key, value] : l4.items()) {
      if (key == "source-port") {
        match.src_port = DecodePort(value, ref);
      } else if (key == "destination-port") {
        match.dst_port = DecodePort(value, ref);
      } else if (key == kDirectionInitiated) {
        std::optional<Direction> direction;
        if (value.is_string()) direction = ParseDirection(value.get<std::string>());
        if (!direction) {
          Error("direction-initiated must be 'from-device' or 'to-device'",
                {ref});
        }
        match.direction_initiated = direction;
      } else {
        Error("unsupported match field '" + key + "' in " + container, {ref});
      }
    }
  }

  std::optional<std::uint16_t> PortNumber(const json& port_json,
                                          std::string_view key,
                                          const RuleRef& ref) {
    auto it = port_json.find(key);
    if (it == port_json.end() || !it->is_number_integer() ||
        it->get<std::int64_t>() < 0 || it->get<std::int64_t>() > 65535) {
      Error("'" + std::string(key) + "' must be an integer in [0, 65535]",
            {ref});
      return std::nullopt;
    }
    return static_cast<std::uint16_t>(it->get<int>());
  }

  std::optional<PortRange> DecodePort(const json& port_json,
                                      const RuleRef& ref) {
    if (!port_json.is_object()) {
      Error("port match must be an object", {ref});
      return std::nullopt;
    }
    if (port_json.contains("lower-port") || port_json.contains("upper-port")) {
      auto lo = PortNumber(port_json, "lower-port", ref);
      auto hi = PortNumber(port_json, "upper-port", ref);
      if (!lo || !hi) return std::nullopt;
      return PortRange{*lo, *hi};
    }
    auto op = port_json.find("operator");
    std::string op_name = (op != port_json.end() && op->is_string())
                              ? op->get<std::string>()
                              : std::string("eq");
    if (op != port_json.end() && !op->is_string()) {
      Error("port operator must be a string", {ref});
      return std::nullopt;
    }
    if (op_name != "eq") {
      Error("unsupported port operator '" + op_name +
                "'; only eq and lower/upper ranges are supported",
            {ref});
      return std::nullopt;
    }
    auto port = PortNumber(port_json, "port", ref);
    if (!port) return std::nullopt;
    return PortRange::Single(*port);
  }

  void DecodeAbstractions(const json& mud, const RuleRef& ref,
                          std::vector<EndpointSpec>& endpoints) {
    if (!mud.is_object()) {
      Error("MUD match must be an object", {ref});
      return;
    }
    for (const auto& [key, value] : mud.items()) {
      auto kind = ParseAbstractionKind(key);
      if (!kind || *kind == AbstractionKind::kDomainName ||
          *kind == AbstractionKind::kExplicitNetwork) {
        Error("unsupported MUD match '" + key + "'", {ref});
        continue;
      }
      switch (*kind) {
        case AbstractionKind::kLocalNetworks:
        case AbstractionKind::kMyController:
        case AbstractionKind::kSameManufacturer:
          if (!IsEmptyLeaf(value)) {
            Error("'" + key + "' takes no value (encode as [null])", {ref});
            continue;
          }
          break;
        default:
          if (!value.is_string()) {
            Error("'" + key + "' must be a string", {ref});
            continue;
          }
      }
      switch (*kind) {
        case AbstractionKind::kLocalNetworks:
          endpoints.push_back(endpoint::LocalNetworks{});
          break;
        case AbstractionKind::kMyController:
          endpoints.push_back(endpoint::MyController{});
          break;
        case AbstractionKind::kSameManufacturer:
          endpoints.push_back(endpoint::SameManufacturer{});
          break;
        case AbstractionKind::kController:
          endpoints.push_back(endpoint::Controller{value.get<std::string>()});
          break;
        case AbstractionKind::kManufacturer:
          endpoints.push_back(endpoint::Manufacturer{value.get<std::string>()});
          break;
        case AbstractionKind::kModel:
          endpoints.push_back(endpoint::Model{value.get<std::string>()});
          break;
        default:
          break;
      }
    }
  }

  void CheckReferences(const MudFile& file) {
    auto check = [&](const std::vector<std::string>& policy,
                     std::string_view policy_name) {
      for (const auto& name : policy) {
        if (file.FindAcl(name) == nullptr) {
          Error("dangling ACL reference '" + name + "' in " +
                    std::string(policy_name),
                {Ref(name)});
        }
      }
    };
    check(file.from_device_policy, "from-device-policy");
    check(file.to_device_policy, "to-device-policy");
  }

  std::string mud_url_;
  std::vector<Finding> findings_;
};

bool Referenced(const std::vector<std::string>& policy, std::string_view name) {
  return std::find(policy.begin(), policy.end(), name) != policy.end();
}

ordered_json PortJson(PortRange range) {
  if (range.lo == range.hi) {
    return ordered_json{{"operator", "eq"}, {"port", range.lo}};
  }
  return ordered_json{{"lower-port", range.lo}, {"upper-port", range.hi}};
}

ordered_json AceJson(const Ace& ace, const Acl& acl, bool remote_is_source) {
  const MatchSet& m = ace.match;
  const bool v4 = acl.ip_version == IpVersion::v4;
  ordered_json l3 = ordered_json::object();
  ordered_json mud = ordered_json::object();
  if (m.protocol) l3["protocol"] = *m.protocol;
  if (m.endpoint) {
    std::visit(
        Overloaded{
            [&](const endpoint::DnsName& e) {
              l3[std::string(remote_is_source ? kSrcDnsName : kDstDnsName)] =
                  e.domain;
            },
            [&](const endpoint::ExplicitNetwork& e) {
              std::string key = remote_is_source ? "source-" : "destination-";
              key += v4 ? "ipv4-network" : "ipv6-network";
              l3[key] = e.prefix.ToString();
            },
            [&](const endpoint::LocalNetworks&) {
              mud["local-networks"] = ordered_json::array({nullptr});
            },
            [&](const endpoint::MyController&) {
              mud["my-controller"] = ordered_json::array({nullptr});
            },
            [&](const endpoint::SameManufacturer&) {
              mud["same-manufacturer"] = ordered_json::array({nullptr});
            },
            [&](const endpoint::Controller& e) { mud["controller"] = e.class_uri; },
            [&](const endpoint::Manufacturer& e) {
              mud["manufacturer"] = e.authority;
            },
            [&](const endpoint::Model& e) { mud["model"] = e.model_uri; },
        },
        *m.endpoint);
  }

  ordered_json l4 = ordered_json::object();
  if (m.src_port) l4["source-port"] = PortJson(*m.src_port);
  if (m.dst_port) l4["destination-port"] = PortJson(*m.dst_port);
  if (m.direction_initiated) {
    l4[std::string(kDirectionInitiated)] = ToString(*m.direction_initiated);
  }

  ordered_json matches = ordered_json::object();
  if (!l3.empty()) matches[v4 ? "ipv4" : "ipv6"] = std::move(l3);
  if (!l4.empty()) {
    matches[m.protocol == kProtocolUdp ? "udp" : "tcp"] = std::move(l4);
  }
  if (!mud.empty()) matches[std::string(kMudContainer)] = std::move(mud);

  return ordered_json{
      {"name", ace.name},
      {"matches", std::move(matches)},
      {"actions", {{"forwarding", ToString(ace.action)}}},
  };
}

ordered_json PolicyJson(const std::vector<std::string>& names) {
  ordered_json list = ordered_json::array();
  for (const auto& name : names) list.push_back({{"name", name}});
  return ordered_json{{"access-lists", {{"access-list", std::move(list)}}}};
}

}  // namespace

ParseResult ParseMudFile(std::string_view bytes) {
  json doc = json::parse(bytes.begin(), bytes.end(), nullptr,
                         /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    ParseResult result;
    result.findings.push_back(ProtocolError("malformed JSON document"));
    return result;
  }
  return Decoder().Run(doc);
}

std::vector<Finding> ValidateSemantics(const MudFile& file) {
  std::vector<Finding> findings;
  for (const Acl& acl : file.acls) {
    for (const Ace& ace : acl.aces) {
      const MatchSet& m = ace.match;
      std::vector<RuleRef> refs = {
          RuleRef{file.mud_url, acl.name, ace.name, std::nullopt}};
      auto error = [&](std::string message) {
        findings.push_back(ProtocolError(
            "ACE '" + ace.name + "': " + std::move(message), refs));
      };

      if (m.empty()) {
        error("empty match");
      } else if (!m.endpoint) {
        error("match has no endpoint");
      }
      if (m.direction_initiated && m.protocol != kProtocolTcp) {
        error("direction-initiated requires TCP");
      }
      if (m.src_port && !m.src_port->valid()) {
        error("source port range lower bound exceeds upper bound");
      }
      if (m.dst_port && !m.dst_port->valid()) {
        error("destination port range lower bound exceeds upper bound");
      }
      if ((m.src_port || m.dst_port) && m.protocol != kProtocolTcp &&
          m.protocol != kProtocolUdp) {
        error("port match requires TCP or UDP");
      }
      if (m.endpoint) {
        std::visit(
            Overloaded{
                [&](const endpoint::DnsName& e) {
                  if (!IsValidHostname(e.domain)) {
                    error("invalid domain name '" + e.domain + "'");
                  }
                },
                [&](const endpoint::Manufacturer& e) {
                  if (!IsValidAuthority(e.authority)) {
                    error("invalid manufacturer authority '" + e.authority +
                          "'");
                  }
                },
                [&](const endpoint::Controller& e) {
                  if (!IsAbsoluteUri(e.class_uri)) {
                    error("controller '" + e.class_uri + "' is not a URI");
                  }
                },
                [&](const endpoint::Model& e) {
                  if (!IsAbsoluteUri(e.model_uri)) {
                    error("model '" + e.model_uri + "' is not a URI");
                  }
                },
                [&](const endpoint::ExplicitNetwork& e) {
                  if (e.prefix.family() != acl.ip_version) {
                    error("network " + e.prefix.ToString() +
                          " does not match the ACL address family");
                  }
                },
                [](const auto&) {},
            },
            *m.endpoint);
      }
      if (ace.action == Action::kDrop) {
        findings.push_back(MakeFinding(
            FindingKind::kSemanticWarning, Severity::kWarning,
            "ACE '" + ace.name +
                "': explicit drop in an allow-list policy (default deny "
                "already applies)",
            refs));
      }
    }
    if (!Referenced(file.from_device_policy, acl.name) &&
        !Referenced(file.to_device_policy, acl.name)) {
      findings.push_back(MakeFinding(
          FindingKind::kSemanticWarning, Severity::kWarning,
          "unused ACL '" + acl.name + "' is referenced by neither policy",
          {RuleRef{file.mud_url, acl.name, "", std::nullopt}}));
    }
  }
  return findings;
}

std::string SerializeMudFile(const MudFile& file) {
  ordered_json mud;
  mud["mud-version"] = file.mud_version;
  mud["mud-url"] = file.mud_url;
  mud["last-update"] = file.last_update;
  mud["cache-validity"] = file.cache_validity;
  mud["is-supported"] = file.is_supported;
  if (file.systeminfo) mud["systeminfo"] = *file.systeminfo;
  if (file.mfg_name) mud["mfg-name"] = *file.mfg_name;
  if (file.model_name) mud["model-name"] = *file.model_name;
  if (file.documentation) mud["documentation"] = *file.documentation;
  for (const auto& [key, text] : file.extra_mud_nodes) {
    mud[key] = ordered_json::parse(text);
  }
  if (!file.from_device_policy.empty()) {
    mud["from-device-policy"] = PolicyJson(file.from_device_policy);
  }
  if (!file.to_device_policy.empty()) {
    mud["to-device-policy"] = PolicyJson(file.to_device_policy);
  }

  ordered_json doc;
  doc[std::string(kMudContainer)] = std::move(mud);
  if (!file.acls.empty()) {
    ordered_json acl_list = ordered_json::array();
    for (const Acl& acl : file.acls) {
      // Remote hosts of to-device ACLs are packet sources.
      bool remote_is_source =
          Referenced(file.to_device_policy, acl.name) &&
          !Referenced(file.from_device_policy, acl.name);
      ordered_json aces = ordered_json::array();
      for (const Ace& ace : acl.aces) {
        aces.push_back(AceJson(ace, acl, remote_is_source));
      }
      acl_list.push_back({
          {"name", acl.name},
          {"type", acl.ip_version == IpVersion::v4 ? "ipv4-acl-type"
                                                   : "ipv6-acl-type"},
          {"aces", {{"ace", std::move(aces)}}},
      });
    }
    doc[std::string(kAclsContainer)] = {{"acl", std::move(acl_list)}};
  }
  for (const auto& [key, text] : file.extra_top_level_nodes) {
    doc[key] = ordered_json::parse(text);
  }
  return doc.dump(2) + "\n";
}

}  // namespace mudkit
