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

#include <gtest/gtest.h>

#include <random>

#include "testing/oracle.hpp"

namespace mudkit {
namespace {

using testing::DecideGrid;
using testing::ForEachCombo;

RuleRef Ref(const std::string& ace) {
  return RuleRef{"https://mfg.example.com/t", "acl", ace, std::nullopt};
}

ConcreteFlow Flow(PortRange dst, Action action = Action::kAccept,
                  const std::string& ace = "a") {
  ConcreteFlow f;
  f.device_id = "A";
  f.remote = resolved::InternetDomain{"cloud.example.com"};
  f.protocol = kProtocolTcp;
  f.dst_port = dst;
  f.action = action;
  f.provenance = {Ref(ace)};
  return f;
}

std::size_t CountKind(const std::vector<Finding>& findings, FindingKind kind) {
  std::size_t n = 0;
  for (const auto& f : findings) n += f.kind == kind;
  return n;
}

// Universe holding just device A and the flows' domain, for port checks.
testing::Universe SmallUniverse(std::vector<ConcreteFlow> flows) {
  testing::Universe u;
  u.devices = {"A", "B"};
  u.points = {{testing::Point::Kind::kDomain, "cloud.example.com", 0},
              {testing::Point::Kind::kDevice, "B", 0}};
  u.flows = std::move(flows);
  return u;
}

bool SamePermitted(const testing::Universe& u, const std::vector<ConcreteFlow>& kept) {
  bool same = true;
  ForEachCombo(u, [&](const testing::Packet& p) {
    same = same && DecideGrid(u.flows, p, u.local_nets).permitted() ==
                       DecideGrid(kept, p, u.local_nets).permitted();
  });
  return same;
}

TEST(BuildTreeTest, IdenticalFlowsShareOneLeaf) {
  std::vector<ConcreteFlow> flows = {Flow(PortRange::Single(443), Action::kAccept, "x"),
                                     Flow(PortRange::Single(443), Action::kAccept, "y")};
  AceTree tree = BuildTree(flows);
  EXPECT_EQ(tree.leaf_count(), 1u);
  const AceTree::Leaf* leaf = tree.Find(flows[0]);
  ASSERT_NE(leaf, nullptr);
  EXPECT_EQ(leaf->provenance.size(), 2u);
  EXPECT_EQ(leaf->multiplicity, 2u);
}

TEST(BuildTreeTest, DifferentPortsTwoLeaves) {
  AceTree tree = BuildTree(std::vector<ConcreteFlow>{Flow(PortRange::Single(80)),
                                                     Flow(PortRange::Single(443))});
  EXPECT_EQ(tree.leaf_count(), 2u);
  EXPECT_EQ(tree.Devices(), std::vector<std::string>{"A"});
  EXPECT_EQ(tree.FlowsOf("A").size(), 2u);
  EXPECT_TRUE(tree.FlowsOf("B").empty());
}

TEST(BuildTreeTest, EmptyInput) {
  AceTree tree = BuildTree(std::vector<ConcreteFlow>{});
  EXPECT_TRUE(tree.empty());
  EXPECT_TRUE(tree.Flows().empty());
}

TEST(AceTreeTest, EraseRemovesLeafAndEmptyParents) {
  AceTree tree;
  tree.Insert(Flow(PortRange::Single(80)));
  tree.Insert(Flow(PortRange::Single(443)));
  EXPECT_TRUE(tree.Erase(Flow(PortRange::Single(80))));
  EXPECT_FALSE(tree.Erase(Flow(PortRange::Single(80))));
  EXPECT_EQ(tree.leaf_count(), 1u);
  EXPECT_TRUE(tree.Erase(Flow(PortRange::Single(443))));
  EXPECT_TRUE(tree.empty());
  EXPECT_TRUE(tree.Devices().empty());
}

TEST(AceTreeTest, SameMatchDifferentActionsAreSeparateLeaves) {
  AceTree tree;
  tree.Insert(Flow(PortRange::Single(80), Action::kAccept));
  tree.Insert(Flow(PortRange::Single(80), Action::kDrop));
  EXPECT_EQ(tree.leaf_count(), 2u);
}

TEST(PruneTreeTest, SubsumedLeafRemoved) {
  std::vector<ConcreteFlow> flows = {Flow({10, 20}, Action::kAccept, "f1"),
                                     Flow({12, 15}, Action::kAccept, "f2")};
  PruneResult r = PruneTree(BuildTree(flows));
  auto kept = r.tree.Flows();
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].dst_port, (PortRange{10, 20}));
  ASSERT_EQ(CountKind(r.findings, FindingKind::kSubsumed), 1u);
  const Finding& f = r.findings[0];
  ASSERT_EQ(f.flows.size(), 2u);
  // The subsumed flow comes first, then the one covering it.
  EXPECT_EQ(f.flows[0].dst_port, (PortRange{12, 15}));
  EXPECT_EQ(f.flows[1].dst_port, (PortRange{10, 20}));
  EXPECT_TRUE(SamePermitted(SmallUniverse(flows), kept));
}

TEST(PruneTreeTest, OverlapRetained) {
  std::vector<ConcreteFlow> flows = {Flow({10, 20}), Flow({15, 25}, Action::kAccept, "b")};
  // The oracle confirms a nonempty intersection and mutual non-containment.
  auto u = SmallUniverse(flows);
  testing::Packet p{"A", Direction::kFromDevice, u.points[0], kProtocolTcp, 0, 0,
                    Direction::kFromDevice};
  auto one = DecideGrid({flows[0]}, p, {}).accept;
  auto two = DecideGrid({flows[1]}, p, {}).accept;
  EXPECT_TRUE((one & two).any());
  EXPECT_TRUE((one & ~two).any());
  EXPECT_TRUE((two & ~one).any());

  PruneResult r = PruneTree(BuildTree(flows));
  EXPECT_EQ(r.tree.leaf_count(), 2u);
  EXPECT_EQ(CountKind(r.findings, FindingKind::kOverlap), 1u);
  EXPECT_EQ(CountKind(r.findings, FindingKind::kSubsumed), 0u);
  EXPECT_TRUE(SamePermitted(u, r.tree.Flows()));
}

TEST(PruneTreeTest, ConflictRetained) {
  std::vector<ConcreteFlow> flows = {Flow({10, 20}), Flow({10, 20}, Action::kDrop, "b")};
  PruneResult r = PruneTree(BuildTree(flows));
  EXPECT_EQ(r.tree.leaf_count(), 2u);
  ASSERT_EQ(CountKind(r.findings, FindingKind::kConflict), 1u);
  EXPECT_EQ(r.findings[0].severity, Severity::kError);
}

TEST(PruneTreeTest, DuplicateReported) {
  std::vector<ConcreteFlow> flows = {Flow({443, 443}, Action::kAccept, "x"),
                                     Flow({443, 443}, Action::kAccept, "y")};
  PruneResult r = PruneTree(BuildTree(flows));
  EXPECT_EQ(r.tree.leaf_count(), 1u);
  ASSERT_EQ(CountKind(r.findings, FindingKind::kDuplicate), 1u);
  EXPECT_EQ(r.findings[0].refs.size(), 2u);
}

TEST(PruneTreeTest, LocalAnySubsumesDevicePeer) {
  ConcreteFlow any = Flow(PortRange::Full());
  any.remote = resolved::LocalAny{};
  any.protocol.reset();
  ConcreteFlow peer = Flow(PortRange::Single(8883), Action::kAccept, "p");
  peer.remote = resolved::LocalDevice{"B"};
  PruneResult r = PruneTree(BuildTree(std::vector<ConcreteFlow>{any, peer}));
  EXPECT_EQ(r.tree.leaf_count(), 1u);
  EXPECT_EQ(CountKind(r.findings, FindingKind::kSubsumed), 1u);
}

TEST(PruneTreeTest, UnresolvedNeverRelates) {
  ConcreteFlow a = Flow(PortRange::Full());
  a.remote = resolved::Unresolved{endpoint::MyController{}};
  ConcreteFlow b = Flow(PortRange::Single(1), Action::kDrop, "b");
  b.remote = resolved::Unresolved{endpoint::MyController{}};
  PruneResult r = PruneTree(BuildTree(std::vector<ConcreteFlow>{a, b}));
  EXPECT_EQ(r.tree.leaf_count(), 2u);
  EXPECT_TRUE(r.findings.empty());
  EXPECT_FALSE(Covers(a, a, {}));
}

TEST(PruneTreeTest, RandomUniversesKeepPermittedSet) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 150; ++i) {
    testing::Universe u = testing::RandomUniverse(rng);
    PruneResult r = PruneTree(BuildTree(u.flows, u.local_prefixes));
    ASSERT_TRUE(SamePermitted(u, r.tree.Flows())) << "universe " << i;
  }
}

// The oracle notices when a leaf that carries unique packets goes missing.
TEST(PruneTreeTest, OracleDetectsWrongRemoval) {
  std::vector<ConcreteFlow> flows = {Flow({10, 20}), Flow({25, 30}, Action::kAccept, "b")};
  auto u = SmallUniverse(flows);
  EXPECT_FALSE(SamePermitted(u, {flows[0]}));
  EXPECT_TRUE(SamePermitted(u, flows));
}

MergedRuleset OneRule() {
  DeploymentContext ctx;
  ctx.devices = {Device{"A", "https://mfg.example.com/t", nullptr}};
  auto file = std::make_shared<MudFile>();
  file->mud_url = "https://mfg.example.com/t";
  Ace ace;
  ace.name = "cloud";
  ace.match.endpoint = endpoint::DnsName{"cloud.example.com"};
  ace.match.protocol = kProtocolTcp;
  ace.match.dst_port = PortRange::Single(443);
  file->acls = {Acl{"out", IpVersion::v4, {ace}}};
  file->from_device_policy = {"out"};
  ctx.devices[0].file = file;
  return Merge(ctx);
}

PacketQuery CloudQuery(std::uint16_t port) {
  PacketQuery q;
  q.device_id = "A";
  q.remote = resolved::InternetDomain{"cloud.example.com"};
  q.protocol = kProtocolTcp;
  q.src_port = 50000;
  q.dst_port = port;
  return q;
}

TEST(IsAllowedTest, AcceptWithOneRef) {
  QueryResult r = IsAllowed(OneRule(), CloudQuery(443));
  EXPECT_EQ(r.decision, Decision::kAccept);
  ASSERT_EQ(r.refs.size(), 1u);
  EXPECT_EQ(r.refs[0].ace_name, "cloud");
}

TEST(IsAllowedTest, OtherPortIsNoMatch) {
  QueryResult r = IsAllowed(OneRule(), CloudQuery(444));
  EXPECT_EQ(r.decision, Decision::kNoMatch);
  EXPECT_TRUE(r.refs.empty());
}

TEST(IsAllowedTest, ConflictFailsClosed) {
  std::vector<ConcreteFlow> flows = {Flow({400, 500}, Action::kAccept, "allow"),
                                     Flow({443, 443}, Action::kDrop, "deny")};
  MergedRuleset ruleset;
  ruleset.tree = PruneTree(BuildTree(flows)).tree;
  ruleset.flows = ruleset.tree.Flows();
  ruleset.devices = {"A"};
  QueryResult r = IsAllowed(ruleset, CloudQuery(443));
  EXPECT_EQ(r.decision, Decision::kDrop);
  EXPECT_EQ(r.refs.size(), 2u);
  EXPECT_EQ(IsAllowed(ruleset, CloudQuery(450)).decision, Decision::kAccept);
}

TEST(IsAllowedTest, UnknownDeviceThrows) {
  PacketQuery q = CloudQuery(443);
  q.device_id = "nobody";
  EXPECT_THROW(IsAllowed(OneRule(), q), UnknownDeviceError);
}

TEST(IsAllowedTest, InitiatedDefaultsToPacketDirection) {
  ConcreteFlow f = Flow({443, 443});
  f.direction_initiated = Direction::kFromDevice;
  MergedRuleset ruleset;
  ruleset.tree = BuildTree(std::vector<ConcreteFlow>{f});
  ruleset.devices = {"A"};
  PacketQuery q = CloudQuery(443);
  EXPECT_EQ(IsAllowed(ruleset, q).decision, Decision::kAccept);
  q.initiated = Direction::kToDevice;
  EXPECT_EQ(IsAllowed(ruleset, q).decision, Decision::kNoMatch);
}

std::shared_ptr<MudFile> PeerFile(const std::string& url, bool both_directions) {
  auto f = std::make_shared<MudFile>();
  f->mud_url = url;
  Ace ace;
  ace.name = "peers";
  ace.match.endpoint = endpoint::SameManufacturer{};
  f->acls = {Acl{"fr", IpVersion::v4, {ace}}};
  f->from_device_policy = {"fr"};
  if (both_directions) {
    f->acls.push_back(Acl{"to", IpVersion::v4, {ace}});
    f->to_device_policy = {"to"};
  }
  return f;
}

TEST(MergeTest, SelfMergeAcrossTwoDevices) {
  auto file = PeerFile("https://mfg.example.com/bulb", false);
  DeploymentContext single;
  single.devices = {Device{"x1", file->mud_url, file}};
  MergedRuleset alone = Merge(single);
  ASSERT_EQ(alone.flows.size(), 1u);
  EXPECT_TRUE(IsUnresolved(alone.flows[0].remote));

  DeploymentContext pair;
  pair.devices = {Device{"x1", file->mud_url, file}, Device{"x2", file->mud_url, file}};
  MergedRuleset both = Merge(pair);
  // Each device gets its own flows, now resolved to the other instance.
  ASSERT_EQ(both.flows.size(), 2u);
  EXPECT_EQ(both.flows[0].remote, ResolvedEndpoint(resolved::LocalDevice{"x2"}));
  EXPECT_EQ(both.flows[1].remote, ResolvedEndpoint(resolved::LocalDevice{"x1"}));
  EXPECT_EQ(CountKind(both.findings, FindingKind::kUnresolvedAbstraction), 0u);
}

TEST(MergeTest, DisjointFilesUnion) {
  MergedRuleset a = OneRule();
  DeploymentContext ctx;
  auto f1 = std::make_shared<MudFile>();
  f1->mud_url = "https://one.example.com/x";
  Ace ace;
  ace.name = "n";
  ace.match.endpoint = endpoint::DnsName{"one.example.com"};
  f1->acls = {Acl{"out", IpVersion::v4, {ace}}};
  f1->from_device_policy = {"out"};
  auto f2 = std::make_shared<MudFile>(*f1);
  f2->mud_url = "https://two.example.com/x";
  f2->acls[0].aces[0].match.endpoint = endpoint::DnsName{"two.example.com"};
  ctx.devices = {Device{"one", f1->mud_url, f1}, Device{"two", f2->mud_url, f2}};
  MergedRuleset merged = Merge(ctx);
  EXPECT_EQ(merged.flows.size(), 2u);
  EXPECT_EQ(CountKind(merged.findings, FindingKind::kDuplicate), 0u);
  EXPECT_EQ(merged.resolved_flow_counts.at("one"), 1u);
}

TEST(MergeTest, EmptyInput) {
  MergedRuleset r = Merge(DeploymentContext{});
  EXPECT_TRUE(r.flows.empty());
  EXPECT_TRUE(r.findings.empty());
  EXPECT_TRUE(r.devices.empty());
}

TEST(MergeTest, UnknownEntryDeviceThrows) {
  auto file = PeerFile("https://mfg.example.com/bulb", false);
  std::vector<MergeEntry> entries = {{"ghost", file}};
  EXPECT_THROW(Merge(entries, DeploymentContext{}), UnknownDeviceError);
}

TEST(FlowsBetweenTest, LocalAnyCoversPeer) {
  auto f = std::make_shared<MudFile>();
  f->mud_url = "https://mfg.example.com/a";
  Ace ace;
  ace.name = "lan";
  ace.match.endpoint = endpoint::LocalNetworks{};
  f->acls = {Acl{"fr", IpVersion::v4, {ace}}};
  f->from_device_policy = {"fr"};
  DeploymentContext ctx;
  ctx.devices = {Device{"A", f->mud_url, f}, Device{"B", "https://x.example/b", nullptr}};
  MergedRuleset r = Merge(ctx);
  EXPECT_EQ(FlowsBetween(r, "A", "B").size(), 1u);
  EXPECT_TRUE(FlowsBetween(r, "A", "cloud.example.com").empty());
  EXPECT_TRUE(FlowsBetween(r, "B", "A").empty());
  EXPECT_THROW(FlowsBetween(r, "Z", "A"), UnknownDeviceError);
}

TEST(FlowsBetweenTest, SameManufacturerBothDirections) {
  auto a = PeerFile("https://mfg.example.com/a", true);
  auto b = PeerFile("https://mfg.example.com/b", true);
  DeploymentContext ctx;
  ctx.devices = {Device{"A", a->mud_url, a}, Device{"B", b->mud_url, b}};
  MergedRuleset r = Merge(ctx);
  auto flows = FlowsBetween(r, "A", "B");
  ASSERT_EQ(flows.size(), 2u);
  EXPECT_NE(flows[0].direction, flows[1].direction);
}

TEST(InterpretRemoteTest, Forms) {
  MergedRuleset r = OneRule();
  EXPECT_EQ(InterpretRemote(r, "A"), ResolvedEndpoint(resolved::LocalDevice{"A"}));
  EXPECT_EQ(InterpretRemote(r, "local-any"), ResolvedEndpoint(resolved::LocalAny{}));
  EXPECT_EQ(InterpretRemote(r, "192.0.2.1"),
            ResolvedEndpoint(resolved::InternetNetwork{*IpPrefix::Parse("192.0.2.1/32")}));
  EXPECT_EQ(InterpretRemote(r, "Cloud.Example.com"),
            ResolvedEndpoint(resolved::InternetDomain{"cloud.example.com"}));
  EXPECT_EQ(InterpretRemote(r, "domain:x.example"),
            ResolvedEndpoint(resolved::InternetDomain{"x.example"}));
}

}  // namespace
}  // namespace mudkit
