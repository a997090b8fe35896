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

// The ACE tree: concrete flows from any number of MUD files, keyed level by
// level on
//
//   device -> direction -> remote endpoint -> protocol -> dst port range
//          -> src port range -> direction-initiated -> action
//
// Inserting a flow whose full path already exists merges its provenance into
// the existing leaf. Pruning then removes leaves whose match set is contained
// in another leaf with the same action, and reports overlapping and
// conflicting pairs without resolving them.

#ifndef MUDKIT_ACE_TREE_HPP_
#define MUDKIT_ACE_TREE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mudkit/model.hpp"

namespace mudkit {

// A single packet as seen at the device's network access point.
struct PacketQuery {
  std::string device_id;
  Direction direction = Direction::kFromDevice;
  ResolvedEndpoint remote;  // LocalDevice, LocalAny, domain or network
  std::uint8_t protocol = kProtocolTcp;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  // Which side opened the TCP connection. Defaults to `direction`, i.e. a
  // new connection travelling the way the packet does.
  std::optional<Direction> initiated;

  Direction effective_initiated() const { return initiated.value_or(direction); }
};

// Set relations over endpoints. LocalAny contains every LocalDevice and every
// network inside one of `local_prefixes`. Unresolved endpoints relate to
// nothing, not even themselves.
bool EndpointCovers(const ResolvedEndpoint& outer,
                    const ResolvedEndpoint& inner,
                    std::span<const IpPrefix> local_prefixes);
bool EndpointsIntersect(const ResolvedEndpoint& a, const ResolvedEndpoint& b,
                        std::span<const IpPrefix> local_prefixes);

// Match-set relations between flows; actions and provenance are ignored.
bool Covers(const ConcreteFlow& outer, const ConcreteFlow& inner,
            std::span<const IpPrefix> local_prefixes);
bool Intersects(const ConcreteFlow& a, const ConcreteFlow& b,
                std::span<const IpPrefix> local_prefixes);
bool Matches(const ConcreteFlow& flow, const PacketQuery& packet,
             std::span<const IpPrefix> local_prefixes);

class AceTree {
 public:
  struct Leaf {
    Action action = Action::kAccept;
    std::set<RuleRef> provenance;
    // Provenance of every inserted flow, in insertion order, repeats kept.
    std::vector<RuleRef> contributions;
    std::size_t multiplicity = 0;
  };

  explicit AceTree(std::vector<IpPrefix> local_prefixes = {})
      : local_prefixes_(std::move(local_prefixes)) {}

  void Insert(const ConcreteFlow& flow);
  // Removes the leaf on `flow`'s path. Provenance is not compared.
  bool Erase(const ConcreteFlow& flow);
  const Leaf* Find(const ConcreteFlow& flow) const;

  std::size_t leaf_count() const { return leaf_count_; }
  bool empty() const { return leaf_count_ == 0; }

  // Leaves in path order, provenance merged.
  std::vector<ConcreteFlow> Flows() const;
  std::vector<ConcreteFlow> FlowsOf(std::string_view device_id) const;
  std::vector<std::string> Devices() const;

  // Leaves matching the packet. Unresolved leaves never match.
  std::vector<ConcreteFlow> Match(const PacketQuery& packet) const;

  const std::vector<IpPrefix>& local_prefixes() const { return local_prefixes_; }

  void ForEachLeaf(
      const std::function<void(const ConcreteFlow&, const Leaf&)>& fn) const;

 private:
  using ActionLevel = std::map<Action, Leaf>;
  using InitiatedLevel = std::map<std::optional<Direction>, ActionLevel>;
  using SrcPortLevel = std::map<PortRange, InitiatedLevel>;
  using DstPortLevel = std::map<PortRange, SrcPortLevel>;
  using ProtocolLevel = std::map<std::optional<std::uint8_t>, DstPortLevel>;
  using EndpointLevel = std::map<ResolvedEndpoint, ProtocolLevel>;
  using DirectionLevel = std::map<Direction, EndpointLevel>;
  using DeviceLevel = std::map<std::string, DirectionLevel, std::less<>>;

  static void VisitDevice(
      const std::string& device_id, const DirectionLevel& directions,
      const std::function<void(const ConcreteFlow&, const Leaf&)>& fn);

  std::vector<IpPrefix> local_prefixes_;
  DeviceLevel root_;
  std::size_t leaf_count_ = 0;
};

AceTree BuildTree(std::span<const ConcreteFlow> flows,
                  std::vector<IpPrefix> local_prefixes = {});

struct PruneResult {
  AceTree tree;
  std::vector<Finding> findings;
};

// Reports merged duplicates, removes subsumed leaves, and reports overlaps
// (same action) and conflicts (different action) among what remains. The
// set of packets the tree accepts is unchanged.
PruneResult PruneTree(AceTree tree);

struct MergeEntry {
  std::string device_id;
  std::shared_ptr<const MudFile> file;
};

struct MergedRuleset {
  AceTree tree;
  std::vector<ConcreteFlow> flows;  // == tree.Flows()
  std::vector<Finding> findings;    // resolver + pruning, sorted
  std::vector<std::string> devices;  // every context device, sorted
  // Concrete flows each device produced before deduplication and pruning.
  std::map<std::string, std::size_t> resolved_flow_counts;

  bool HasDevice(std::string_view id) const;
};

// Resolves each entry against `context`, builds the tree and prunes it.
// Throws UnknownDeviceError for entries whose device is not in the context.
MergedRuleset Merge(std::span<const MergeEntry> entries,
                    const DeploymentContext& context);
// Every context device that has a file.
MergedRuleset Merge(const DeploymentContext& context);

enum class Decision : std::uint8_t { kAccept, kDrop, kNoMatch };
std::string_view ToString(Decision decision);

struct QueryResult {
  Decision decision = Decision::kNoMatch;
  std::vector<RuleRef> refs;
};

// Accept when only accepting leaves match, drop when any dropping leaf
// matches (conflicts fail closed), no-match otherwise. Throws
// UnknownDeviceError for devices outside the ruleset.
QueryResult IsAllowed(const MergedRuleset& ruleset, const PacketQuery& packet);

// Reads a user-supplied remote: a ruleset device id, an endpoint reference
// ("device:x", "domain:x", "network:p", "local-any"), a bare IP address or
// prefix, or else a domain name.
ResolvedEndpoint InterpretRemote(const MergedRuleset& ruleset,
                                 std::string_view text);

// Flows of device `a`, in either direction, whose remote covers `b` (read
// with InterpretRemote). Throws UnknownDeviceError for an unknown `a`.
std::vector<ConcreteFlow> FlowsBetween(const MergedRuleset& ruleset,
                                       std::string_view a, std::string_view b);

}  // namespace mudkit

#endif  // MUDKIT_ACE_TREE_HPP_
