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

#include "mudkit/ace_tree.hpp"

#include <algorithm>
#include <utility>

#include "mudkit/resolver.hpp"

namespace mudkit {
namespace {

bool InLocalPrefixes(const IpPrefix& prefix,
                     std::span<const IpPrefix> local_prefixes) {
  return std::any_of(local_prefixes.begin(), local_prefixes.end(),
                     [&](const IpPrefix& l) { return l.Contains(prefix); });
}

bool TouchesLocalPrefixes(const IpPrefix& prefix,
                          std::span<const IpPrefix> local_prefixes) {
  return std::any_of(local_prefixes.begin(), local_prefixes.end(),
                     [&](const IpPrefix& l) { return l.Overlaps(prefix); });
}

bool ProtocolCovers(std::optional<std::uint8_t> outer,
                    std::optional<std::uint8_t> inner) {
  return !outer || outer == inner;
}

bool InitiatedCovers(std::optional<Direction> outer,
                     std::optional<Direction> inner) {
  return !outer || outer == inner;
}

std::vector<RuleRef> RefsOf(const ConcreteFlow& flow) {
  return {flow.provenance.begin(), flow.provenance.end()};
}

std::vector<RuleRef> Concat(std::vector<RuleRef> a,
                            const std::vector<RuleRef>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

bool EndpointCovers(const ResolvedEndpoint& outer,
                    const ResolvedEndpoint& inner,
                    std::span<const IpPrefix> local_prefixes) {
  if (IsUnresolved(outer) || IsUnresolved(inner)) return false;
  if (outer == inner) return true;
  if (std::holds_alternative<resolved::LocalAny>(outer)) {
    if (std::holds_alternative<resolved::LocalDevice>(inner)) return true;
    if (const auto* net = std::get_if<resolved::InternetNetwork>(&inner)) {
      return InLocalPrefixes(net->prefix, local_prefixes);
    }
    return false;
  }
  const auto* outer_net = std::get_if<resolved::InternetNetwork>(&outer);
  const auto* inner_net = std::get_if<resolved::InternetNetwork>(&inner);
  return outer_net && inner_net && outer_net->prefix.Contains(inner_net->prefix);
}

bool EndpointsIntersect(const ResolvedEndpoint& a, const ResolvedEndpoint& b,
                        std::span<const IpPrefix> local_prefixes) {
  if (IsUnresolved(a) || IsUnresolved(b)) return false;
  if (a == b) return true;
  auto local_any_meets = [&](const ResolvedEndpoint& other) {
    if (std::holds_alternative<resolved::LocalDevice>(other)) return true;
    if (const auto* net = std::get_if<resolved::InternetNetwork>(&other)) {
      return TouchesLocalPrefixes(net->prefix, local_prefixes);
    }
    return false;
  };
  if (std::holds_alternative<resolved::LocalAny>(a)) return local_any_meets(b);
  if (std::holds_alternative<resolved::LocalAny>(b)) return local_any_meets(a);
  const auto* net_a = std::get_if<resolved::InternetNetwork>(&a);
  const auto* net_b = std::get_if<resolved::InternetNetwork>(&b);
  return net_a && net_b && net_a->prefix.Overlaps(net_b->prefix);
}

bool Covers(const ConcreteFlow& outer, const ConcreteFlow& inner,
            std::span<const IpPrefix> local_prefixes) {
  return outer.device_id == inner.device_id &&
         outer.direction == inner.direction &&
         EndpointCovers(outer.remote, inner.remote, local_prefixes) &&
         ProtocolCovers(outer.protocol, inner.protocol) &&
         outer.dst_port.Contains(inner.dst_port) &&
         outer.src_port.Contains(inner.src_port) &&
         InitiatedCovers(outer.direction_initiated, inner.direction_initiated);
}

bool Intersects(const ConcreteFlow& a, const ConcreteFlow& b,
                std::span<const IpPrefix> local_prefixes) {
  return a.device_id == b.device_id && a.direction == b.direction &&
         EndpointsIntersect(a.remote, b.remote, local_prefixes) &&
         (!a.protocol || !b.protocol || a.protocol == b.protocol) &&
         a.dst_port.Intersects(b.dst_port) &&
         a.src_port.Intersects(b.src_port) &&
         (!a.direction_initiated || !b.direction_initiated ||
          a.direction_initiated == b.direction_initiated);
}

bool Matches(const ConcreteFlow& flow, const PacketQuery& packet,
             std::span<const IpPrefix> local_prefixes) {
  return flow.device_id == packet.device_id &&
         flow.direction == packet.direction &&
         EndpointCovers(flow.remote, packet.remote, local_prefixes) &&
         ProtocolCovers(flow.protocol, packet.protocol) &&
         flow.dst_port.Contains(packet.dst_port) &&
         flow.src_port.Contains(packet.src_port) &&
         InitiatedCovers(flow.direction_initiated,
                         packet.effective_initiated());
}

void AceTree::Insert(const ConcreteFlow& flow) {
  Leaf& leaf = root_[flow.device_id][flow.direction][flow.remote][flow.protocol]
                    [flow.dst_port][flow.src_port][flow.direction_initiated]
                    [flow.action];
  if (leaf.multiplicity == 0) {
    ++leaf_count_;
    leaf.action = flow.action;
  }
  ++leaf.multiplicity;
  leaf.provenance.insert(flow.provenance.begin(), flow.provenance.end());
  leaf.contributions.insert(leaf.contributions.end(), flow.provenance.begin(),
                            flow.provenance.end());
}

const AceTree::Leaf* AceTree::Find(const ConcreteFlow& flow) const {
  auto device = root_.find(flow.device_id);
  if (device == root_.end()) return nullptr;
  auto direction = device->second.find(flow.direction);
  if (direction == device->second.end()) return nullptr;
  auto remote = direction->second.find(flow.remote);
  if (remote == direction->second.end()) return nullptr;
  auto protocol = remote->second.find(flow.protocol);
  if (protocol == remote->second.end()) return nullptr;
  auto dst = protocol->second.find(flow.dst_port);
  if (dst == protocol->second.end()) return nullptr;
  auto src = dst->second.find(flow.src_port);
  if (src == dst->second.end()) return nullptr;
  auto initiated = src->second.find(flow.direction_initiated);
  if (initiated == src->second.end()) return nullptr;
  auto action = initiated->second.find(flow.action);
  if (action == initiated->second.end()) return nullptr;
  return &action->second;
}

bool AceTree::Erase(const ConcreteFlow& flow) {
  if (Find(flow) == nullptr) return false;
  auto device = root_.find(flow.device_id);
  auto& directions = device->second;
  auto& remotes = directions[flow.direction];
  auto& protocols = remotes[flow.remote];
  auto& dsts = protocols[flow.protocol];
  auto& srcs = dsts[flow.dst_port];
  auto& initiated = srcs[flow.src_port];
  auto& actions = initiated[flow.direction_initiated];

  actions.erase(flow.action);
  if (actions.empty()) initiated.erase(flow.direction_initiated);
  if (initiated.empty()) srcs.erase(flow.src_port);
  if (srcs.empty()) dsts.erase(flow.dst_port);
  if (dsts.empty()) protocols.erase(flow.protocol);
  if (protocols.empty()) remotes.erase(flow.remote);
  if (remotes.empty()) directions.erase(flow.direction);
  if (directions.empty()) root_.erase(device);
  --leaf_count_;
  return true;
}

void AceTree::VisitDevice(
    const std::string& device_id, const DirectionLevel& directions,
    const std::function<void(const ConcreteFlow&, const Leaf&)>& fn) {
  ConcreteFlow flow;
  flow.device_id = device_id;
  for (const auto& [direction, remotes] : directions) {
    flow.direction = direction;
    for (const auto& [remote, protocols] : remotes) {
      flow.remote = remote;
      for (const auto& [protocol, dsts] : protocols) {
        flow.protocol = protocol;
        for (const auto& [dst, srcs] : dsts) {
          flow.dst_port = dst;
          for (const auto& [src, initiated_level] : srcs) {
            flow.src_port = src;
            for (const auto& [initiated, actions] : initiated_level) {
              flow.direction_initiated = initiated;
              for (const auto& [action, leaf] : actions) {
                flow.action = action;
                flow.provenance = leaf.provenance;
                fn(flow, leaf);
              }
            }
          }
        }
      }
    }
  }
}

void AceTree::ForEachLeaf(
    const std::function<void(const ConcreteFlow&, const Leaf&)>& fn) const {
  for (const auto& [device_id, directions] : root_) {
    VisitDevice(device_id, directions, fn);
  }
}

std::vector<ConcreteFlow> AceTree::Flows() const {
  std::vector<ConcreteFlow> out;
  out.reserve(leaf_count_);
  ForEachLeaf([&](const ConcreteFlow& flow, const Leaf&) { out.push_back(flow); });
  return out;
}

std::vector<ConcreteFlow> AceTree::FlowsOf(std::string_view device_id) const {
  std::vector<ConcreteFlow> out;
  auto device = root_.find(device_id);
  if (device == root_.end()) return out;
  VisitDevice(device->first, device->second,
              [&](const ConcreteFlow& flow, const Leaf&) { out.push_back(flow); });
  return out;
}

std::vector<std::string> AceTree::Devices() const {
  std::vector<std::string> out;
  for (const auto& [id, unused] : root_) out.push_back(id);
  return out;
}

std::vector<ConcreteFlow> AceTree::Match(const PacketQuery& packet) const {
  std::vector<ConcreteFlow> out;
  auto device = root_.find(packet.device_id);
  if (device == root_.end()) return out;
  auto direction = device->second.find(packet.direction);
  if (direction == device->second.end()) return out;

  const Direction initiated = packet.effective_initiated();
  ConcreteFlow flow;
  flow.device_id = packet.device_id;
  flow.direction = packet.direction;
  for (const auto& [remote, protocols] : direction->second) {
    if (!EndpointCovers(remote, packet.remote, local_prefixes_)) continue;
    flow.remote = remote;
    for (const auto& [protocol, dsts] : protocols) {
      if (protocol && *protocol != packet.protocol) continue;
      flow.protocol = protocol;
      // Keys are ordered by lower bound; nothing past the port can match.
      for (const auto& [dst, srcs] : dsts) {
        if (dst.lo > packet.dst_port) break;
        if (!dst.Contains(packet.dst_port)) continue;
        flow.dst_port = dst;
        for (const auto& [src, initiated_level] : srcs) {
          if (src.lo > packet.src_port) break;
          if (!src.Contains(packet.src_port)) continue;
          flow.src_port = src;
          for (const auto& [key, actions] : initiated_level) {
            if (key && *key != initiated) continue;
            flow.direction_initiated = key;
            for (const auto& [action, leaf] : actions) {
              flow.action = action;
              flow.provenance = leaf.provenance;
              out.push_back(flow);
            }
          }
        }
      }
    }
  }
  return out;
}

AceTree BuildTree(std::span<const ConcreteFlow> flows,
                  std::vector<IpPrefix> local_prefixes) {
  AceTree tree(std::move(local_prefixes));
  for (const auto& flow : flows) tree.Insert(flow);
  return tree;
}

PruneResult PruneTree(AceTree tree) {
  PruneResult result{std::move(tree), {}};
  AceTree& t = result.tree;
  std::span<const IpPrefix> local = t.local_prefixes();

  // Group leaves by (device, direction): nothing relates across groups.
  std::vector<std::vector<ConcreteFlow>> groups;
  const ConcreteFlow* previous = nullptr;
  std::vector<ConcreteFlow> all = t.Flows();
  for (const auto& flow : all) {
    if (previous == nullptr || previous->device_id != flow.device_id ||
        previous->direction != flow.direction) {
      groups.emplace_back();
    }
    groups.back().push_back(flow);
    previous = &flow;
  }

  t.ForEachLeaf([&](const ConcreteFlow& flow, const AceTree::Leaf& leaf) {
    if (leaf.multiplicity < 2) return;
    result.findings.push_back(Finding{
        FindingKind::kDuplicate, Severity::kWarning,
        std::to_string(leaf.multiplicity) + " identical flows merged: " +
            Describe(flow),
        leaf.contributions,
        {flow}});
  });

  for (const auto& group : groups) {
    const std::size_t n = group.size();
    std::vector<bool> subsumed(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n && !subsumed[i]; ++j) {
        subsumed[i] = i != j && group[i].action == group[j].action &&
                      Covers(group[j], group[i], local);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!subsumed[i]) continue;
      // Subsumption is a strict partial order, so some maximal leaf covers i.
      std::size_t by = n;
      for (std::size_t j = 0; j < n && by == n; ++j) {
        if (!subsumed[j] && group[i].action == group[j].action &&
            Covers(group[j], group[i], local)) {
          by = j;
        }
      }
      result.findings.push_back(Finding{
          FindingKind::kSubsumed, Severity::kInfo,
          "flow [" + Describe(group[i]) + "] is subsumed by [" +
              Describe(group[by]) + "]",
          Concat(RefsOf(group[i]), RefsOf(group[by])),
          {group[i], group[by]}});
      t.Erase(group[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (subsumed[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (subsumed[j] || !Intersects(group[i], group[j], local)) continue;
        const bool conflict = group[i].action != group[j].action;
        result.findings.push_back(Finding{
            conflict ? FindingKind::kConflict : FindingKind::kOverlap,
            conflict ? Severity::kError : Severity::kWarning,
            std::string(conflict ? "conflicting" : "overlapping") +
                " flows [" + Describe(group[i]) + "] and [" +
                Describe(group[j]) + "]",
            Concat(RefsOf(group[i]), RefsOf(group[j])),
            {group[i], group[j]}});
      }
    }
  }
  return result;
}

bool MergedRuleset::HasDevice(std::string_view id) const {
  return std::binary_search(devices.begin(), devices.end(), id);
}

MergedRuleset Merge(std::span<const MergeEntry> entries,
                    const DeploymentContext& context) {
  MergedRuleset ruleset;
  std::vector<ConcreteFlow> flows;
  for (const auto& entry : entries) {
    FileResolution resolution =
        ResolveFile(entry.device_id, *entry.file, context);
    ruleset.resolved_flow_counts[entry.device_id] += resolution.flows.size();
    flows.insert(flows.end(), std::make_move_iterator(resolution.flows.begin()),
                 std::make_move_iterator(resolution.flows.end()));
    ruleset.findings.insert(ruleset.findings.end(),
                            std::make_move_iterator(resolution.findings.begin()),
                            std::make_move_iterator(resolution.findings.end()));
  }
  PruneResult pruned = PruneTree(BuildTree(flows, context.local_prefixes));
  ruleset.findings.insert(ruleset.findings.end(),
                          std::make_move_iterator(pruned.findings.begin()),
                          std::make_move_iterator(pruned.findings.end()));
  std::sort(ruleset.findings.begin(), ruleset.findings.end());
  ruleset.tree = std::move(pruned.tree);
  ruleset.flows = ruleset.tree.Flows();
  for (const auto& device : context.devices) {
    ruleset.devices.push_back(device.id);
    ruleset.resolved_flow_counts.try_emplace(device.id, 0);
  }
  std::sort(ruleset.devices.begin(), ruleset.devices.end());
  ruleset.devices.erase(std::unique(ruleset.devices.begin(), ruleset.devices.end()),
                        ruleset.devices.end());
  return ruleset;
}

MergedRuleset Merge(const DeploymentContext& context) {
  std::vector<MergeEntry> entries;
  for (const auto& device : context.devices) {
    if (device.file) entries.push_back({device.id, device.file});
  }
  return Merge(entries, context);
}

std::string_view ToString(Decision decision) {
  switch (decision) {
    case Decision::kAccept:
      return "accept";
    case Decision::kDrop:
      return "drop";
    case Decision::kNoMatch:
      return "no_match";
  }
  return "unknown";
}

QueryResult IsAllowed(const MergedRuleset& ruleset, const PacketQuery& packet) {
  if (!ruleset.HasDevice(packet.device_id)) {
    throw UnknownDeviceError(packet.device_id);
  }
  QueryResult result;
  std::set<RuleRef> refs;
  for (const auto& leaf : ruleset.tree.Match(packet)) {
    if (leaf.action == Action::kDrop) {
      result.decision = Decision::kDrop;
    } else if (result.decision == Decision::kNoMatch) {
      result.decision = Decision::kAccept;
    }
    refs.insert(leaf.provenance.begin(), leaf.provenance.end());
  }
  result.refs.assign(refs.begin(), refs.end());
  return result;
}

ResolvedEndpoint InterpretRemote(const MergedRuleset& ruleset,
                                 std::string_view text) {
  if (ruleset.HasDevice(text)) return resolved::LocalDevice{std::string(text)};
  if (auto ref = ParseEndpointRef(text)) return *ref;
  if (auto prefix = IpPrefix::Parse(text)) {
    return resolved::InternetNetwork{*prefix};
  }
  return resolved::InternetDomain{ToLower(text)};
}

std::vector<ConcreteFlow> FlowsBetween(const MergedRuleset& ruleset,
                                       std::string_view a, std::string_view b) {
  if (!ruleset.HasDevice(a)) throw UnknownDeviceError(std::string(a));
  const ResolvedEndpoint target = InterpretRemote(ruleset, b);
  std::vector<ConcreteFlow> out;
  for (const auto& flow : ruleset.tree.FlowsOf(a)) {
    if (EndpointCovers(flow.remote, target, ruleset.tree.local_prefixes())) {
      out.push_back(flow);
    }
  }
  return out;
}

}  // namespace mudkit
