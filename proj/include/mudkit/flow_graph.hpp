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

#ifndef MUDKIT_FLOW_GRAPH_HPP_
#define MUDKIT_FLOW_GRAPH_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mudkit/ace_tree.hpp"

namespace mudkit {

enum class NodeKind : std::uint8_t {
  kDevice,
  kDomain,
  kNetwork,
  kLocalAny,
  kControllerClass,
  kUnresolved,
};
std::string_view ToString(NodeKind kind);

struct GraphNode {
  std::string id;  // "device:<id>", "domain:<name>", "network:<prefix>", ...
  NodeKind kind = NodeKind::kDevice;
  std::string label;

  bool operator==(const GraphNode&) const = default;
};

// One edge per (src, dst, protocol, direction-initiated, action); the leaves
// it aggregates contribute their destination port ranges and provenance.
struct GraphEdge {
  std::string src;
  std::string dst;
  std::optional<std::uint8_t> protocol;
  std::vector<PortRange> dst_ports;  // sorted, distinct
  std::optional<Direction> direction_initiated;
  Action action = Action::kAccept;
  std::vector<RuleRef> provenance;  // sorted, distinct
  std::size_t leaf_count = 0;

  bool operator==(const GraphEdge&) const = default;
};

struct FlowGraph {
  std::vector<GraphNode> nodes;  // sorted by id
  std::vector<GraphEdge> edges;  // sorted by (src, dst, protocol, ...)

  bool operator==(const FlowGraph&) const = default;
};

// Nodes for every ruleset device and every distinct remote endpoint; edges
// run device -> remote for from-device flows and remote -> device otherwise.
FlowGraph ToGraph(const MergedRuleset& ruleset);

struct ProtocolTally {
  std::string protocol;  // ProtocolName()
  std::size_t rule_count = 0;
  std::vector<PortRange> dst_ports;  // sorted, distinct

  bool operator==(const ProtocolTally&) const = default;
};

struct DeviceSummary {
  std::string device_id;
  std::vector<std::string> allowed_remote_hosts;  // domains and prefixes
  std::vector<std::string> allowed_local_peers;   // device ids
  bool allows_any_local = false;
  std::vector<ProtocolTally> protocols;
  std::size_t rule_count_before = 0;  // resolved flows, before merging
  std::size_t rule_count_after = 0;   // leaves left after pruning

  bool operator==(const DeviceSummary&) const = default;
};

// Accepting flows only. Throws UnknownDeviceError.
DeviceSummary Summarize(const MergedRuleset& ruleset, std::string_view device_id);

enum class GraphFormat { kJson, kDot };

// JSON: {"nodes": [...], "edges": [...]} as documented in docs/format.md.
// DOT: a digraph with one statement per node and edge, edges labelled
// "protocol/ports/action".
std::string ExportGraph(const FlowGraph& graph, GraphFormat format);

nlohmann::json GraphToJson(const FlowGraph& graph);
nlohmann::json SummaryToJson(const DeviceSummary& summary);

}  // namespace mudkit

#endif  // MUDKIT_FLOW_GRAPH_HPP_
