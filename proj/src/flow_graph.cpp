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

#include "mudkit/flow_graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "mudkit/codec.hpp"
#include "overloaded.hpp"

namespace mudkit {
namespace {

using json = nlohmann::json;
using internal::Overloaded;

std::string DeviceNodeId(std::string_view device_id) {
  return "device:" + std::string(device_id);
}

GraphNode NodeFor(const ResolvedEndpoint& remote, const std::string& device_id) {
  return std::visit(
      Overloaded{
          [](const resolved::LocalDevice& e) {
            return GraphNode{DeviceNodeId(e.device_id), NodeKind::kDevice,
                             e.device_id};
          },
          [](const resolved::InternetDomain& e) {
            return GraphNode{"domain:" + e.domain, NodeKind::kDomain, e.domain};
          },
          [](const resolved::InternetNetwork& e) {
            return GraphNode{"network:" + e.prefix.ToString(),
                             NodeKind::kNetwork, e.prefix.ToString()};
          },
          [](const resolved::LocalAny&) {
            return GraphNode{"local-any", NodeKind::kLocalAny,
                             "local networks"};
          },
          // Device-relative intent, so one node per declaring device.
          [&](const resolved::Unresolved& e) {
            bool controller =
                std::holds_alternative<endpoint::Controller>(e.spec);
            return GraphNode{"unresolved:" + device_id + ":" + Describe(e.spec),
                             controller ? NodeKind::kControllerClass
                                        : NodeKind::kUnresolved,
                             Describe(e.spec) + " (unbound)"};
          },
      },
      remote);
}

template <class T>
void SortUnique(std::vector<T>& items) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
}

std::string Quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string PortsLabel(const std::vector<PortRange>& ports) {
  std::string out;
  for (const auto& range : ports) {
    if (!out.empty()) out += ",";
    out += ToString(range);
  }
  return out.empty() ? "any" : out;
}

json PortsJson(const std::vector<PortRange>& ports) {
  json out = json::array();
  for (const auto& range : ports) out.push_back(ToJson(range));
  return out;
}

}  // namespace

std::string_view ToString(NodeKind kind) {
  switch (kind) {
    case NodeKind::kDevice:
      return "device";
    case NodeKind::kDomain:
      return "domain";
    case NodeKind::kNetwork:
      return "network";
    case NodeKind::kLocalAny:
      return "local_any";
    case NodeKind::kControllerClass:
      return "controller_class";
    case NodeKind::kUnresolved:
      return "unresolved";
  }
  return "unknown";
}

FlowGraph ToGraph(const MergedRuleset& ruleset) {
  std::map<std::string, GraphNode> nodes;
  for (const auto& id : ruleset.devices) {
    nodes.emplace(DeviceNodeId(id), GraphNode{DeviceNodeId(id), NodeKind::kDevice, id});
  }

  using EdgeKey = std::tuple<std::string, std::string, std::optional<std::uint8_t>,
                             std::optional<Direction>, Action>;
  std::map<EdgeKey, GraphEdge> edges;
  for (const auto& flow : ruleset.flows) {
    GraphNode remote = NodeFor(flow.remote, flow.device_id);
    std::string device = DeviceNodeId(flow.device_id);
    nodes.emplace(device, GraphNode{device, NodeKind::kDevice, flow.device_id});
    nodes.emplace(remote.id, remote);

    const bool outbound = flow.direction == Direction::kFromDevice;
    EdgeKey key{outbound ? device : remote.id, outbound ? remote.id : device,
                flow.protocol, flow.direction_initiated, flow.action};
    GraphEdge& edge = edges[key];
    edge.src = std::get<0>(key);
    edge.dst = std::get<1>(key);
    edge.protocol = flow.protocol;
    edge.direction_initiated = flow.direction_initiated;
    edge.action = flow.action;
    edge.dst_ports.push_back(flow.dst_port);
    edge.provenance.insert(edge.provenance.end(), flow.provenance.begin(),
                           flow.provenance.end());
    ++edge.leaf_count;
  }

  FlowGraph graph;
  for (auto& [id, node] : nodes) graph.nodes.push_back(std::move(node));
  for (auto& [key, edge] : edges) {
    SortUnique(edge.dst_ports);
    SortUnique(edge.provenance);
    graph.edges.push_back(std::move(edge));
  }
  return graph;
}

DeviceSummary Summarize(const MergedRuleset& ruleset,
                        std::string_view device_id) {
  if (!ruleset.HasDevice(device_id)) {
    throw UnknownDeviceError(std::string(device_id));
  }
  DeviceSummary summary;
  summary.device_id = std::string(device_id);
  std::map<std::string, ProtocolTally> tallies;
  auto flows = ruleset.tree.FlowsOf(device_id);
  summary.rule_count_after = flows.size();
  if (auto it = ruleset.resolved_flow_counts.find(summary.device_id);
      it != ruleset.resolved_flow_counts.end()) {
    summary.rule_count_before = it->second;
  }

  for (const auto& flow : flows) {
    if (flow.action != Action::kAccept || IsUnresolved(flow.remote)) continue;
    std::visit(Overloaded{
                   [&](const resolved::InternetDomain& e) {
                     summary.allowed_remote_hosts.push_back(e.domain);
                   },
                   [&](const resolved::InternetNetwork& e) {
                     summary.allowed_remote_hosts.push_back(e.prefix.ToString());
                   },
                   [&](const resolved::LocalDevice& e) {
                     summary.allowed_local_peers.push_back(e.device_id);
                   },
                   [&](const resolved::LocalAny&) {
                     summary.allows_any_local = true;
                   },
                   [](const resolved::Unresolved&) {},
               },
               flow.remote);
    std::string name = ProtocolName(flow.protocol);
    ProtocolTally& tally = tallies[name];
    tally.protocol = name;
    ++tally.rule_count;
    tally.dst_ports.push_back(flow.dst_port);
  }
  SortUnique(summary.allowed_remote_hosts);
  SortUnique(summary.allowed_local_peers);
  for (auto& [name, tally] : tallies) {
    SortUnique(tally.dst_ports);
    summary.protocols.push_back(std::move(tally));
  }
  return summary;
}

json GraphToJson(const FlowGraph& graph) {
  json nodes = json::array();
  for (const auto& node : graph.nodes) {
    nodes.push_back({{"id", node.id},
                     {"kind", std::string(ToString(node.kind))},
                     {"label", node.label}});
  }
  json edges = json::array();
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    const GraphEdge& edge = graph.edges[i];
    json provenance = json::array();
    for (const auto& ref : edge.provenance) provenance.push_back(ToJson(ref));
    edges.push_back({
        {"id", "e" + std::to_string(i)},
        {"src", edge.src},
        {"dst", edge.dst},
        {"protocol", edge.protocol ? json(*edge.protocol) : json(nullptr)},
        {"dst_ports", PortsJson(edge.dst_ports)},
        {"direction_initiated",
         edge.direction_initiated
             ? json(std::string(ToString(*edge.direction_initiated)))
             : json(nullptr)},
        {"action", std::string(ToString(edge.action))},
        {"provenance", std::move(provenance)},
        {"leaf_count", edge.leaf_count},
    });
  }
  return json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

json SummaryToJson(const DeviceSummary& summary) {
  json protocols = json::array();
  for (const auto& tally : summary.protocols) {
    protocols.push_back({{"protocol", tally.protocol},
                         {"rule_count", tally.rule_count},
                         {"dst_ports", PortsJson(tally.dst_ports)}});
  }
  return json{
      {"device", summary.device_id},
      {"allowed_remote_hosts", summary.allowed_remote_hosts},
      {"allowed_local_peers", summary.allowed_local_peers},
      {"allows_any_local", summary.allows_any_local},
      {"protocols", std::move(protocols)},
      {"rule_count", {{"before", summary.rule_count_before},
                      {"after", summary.rule_count_after}}},
  };
}

std::string ExportGraph(const FlowGraph& graph, GraphFormat format) {
  if (format == GraphFormat::kJson) return GraphToJson(graph).dump(2) + "\n";

  std::ostringstream out;
  out << "digraph mudkit {\n  rankdir=LR;\n";
  for (const auto& node : graph.nodes) {
    const char* shape = node.kind == NodeKind::kDevice     ? "box"
                        : node.kind == NodeKind::kDomain   ? "ellipse"
                        : node.kind == NodeKind::kLocalAny ? "hexagon"
                                                           : "octagon";
    out << "  " << Quote(node.id) << " [label=" << Quote(node.label)
        << ", shape=" << shape << "];\n";
  }
  for (const auto& edge : graph.edges) {
    std::string label = ProtocolName(edge.protocol) + "/" +
                        PortsLabel(edge.dst_ports) + "/" +
                        std::string(ToString(edge.action));
    out << "  " << Quote(edge.src) << " -> " << Quote(edge.dst)
        << " [label=" << Quote(label)
        << (edge.action == Action::kDrop ? ", color=red" : "") << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace mudkit
