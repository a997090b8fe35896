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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any fails. All sizes, seeds and time limits are fixed
// here.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "mudkit/ace_tree.hpp"
#include "mudkit/context.hpp"
#include "mudkit/flow_graph.hpp"
#include "mudkit/parser.hpp"
#include "mudkit/service.hpp"
#include "testing/oracle.hpp"
#include "testing/random_mud.hpp"

namespace mudkit {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

// Pinned parameters.
constexpr std::size_t kCorpusSize = 12;
constexpr double kRoundTripBudgetSeconds = 1.0;
constexpr std::size_t kFaultCount = 10;
constexpr int kPruneUniverses = 1000;
constexpr double kPruneBudgetSeconds = 30.0;
constexpr int kIsAllowedSamplesPerUniverse = 64;
constexpr int kMergeCases = 200;
constexpr int kPermutationsPerCase = 4;
constexpr std::size_t kScenarioNodes = 4;
constexpr std::size_t kScenarioEdges = 3;
constexpr int kDenyQueries = 100;
constexpr int kReaderThreads = 4;
constexpr std::uint64_t kSeed = 0x5eed2026;

const fs::path kData = MUDKIT_TEST_DATA_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// Parser round trip over the hand-built corpus.
Outcome RoundTrip() {
  std::vector<std::pair<std::string, std::string>> docs;
  for (const auto& entry : fs::directory_iterator(kData / "corpus")) {
    docs.emplace_back(entry.path().filename().string(), Slurp(entry.path()));
  }
  std::sort(docs.begin(), docs.end());
  if (docs.size() != kCorpusSize) {
    return {false, "corpus has " + std::to_string(docs.size()) + " files"};
  }

  std::set<AbstractionKind> kinds;
  auto start = Clock::now();
  for (const auto& [name, text] : docs) {
    ParseResult first = ParseMudFile(text);
    if (!first.ok()) return {false, name + " does not parse"};
    ParseResult second = ParseMudFile(SerializeMudFile(*first.file));
    if (!second.ok()) return {false, name + " does not reparse"};
    if (!(*first.file == *second.file)) return {false, name + " changed in round trip"};
    for (const auto& acl : first.file->acls) {
      for (const auto& ace : acl.aces) {
        if (ace.match.endpoint) kinds.insert(KindOf(*ace.match.endpoint));
      }
    }
  }
  double elapsed = Seconds(start);

  for (AbstractionKind k :
       {AbstractionKind::kDomainName, AbstractionKind::kLocalNetworks,
        AbstractionKind::kController, AbstractionKind::kMyController,
        AbstractionKind::kManufacturer, AbstractionKind::kSameManufacturer,
        AbstractionKind::kModel}) {
    if (!kinds.contains(k)) {
      return {false, "corpus lacks " + std::string(ToString(k))};
    }
  }
  std::ostringstream detail;
  detail << kCorpusSize << " files, 7/7 abstractions, " << elapsed << " s (limit "
         << kRoundTripBudgetSeconds << " s)";
  return {elapsed < kRoundTripBudgetSeconds, detail.str()};
}

// Each seeded fault yields exactly one finding of the targeted kind.
Outcome SeededFaults() {
  json manifest = json::parse(Slurp(kData / "faults" / "manifest.json"));
  if (manifest.size() != kFaultCount) {
    return {false, "manifest lists " + std::to_string(manifest.size()) + " faults"};
  }
  for (const auto& fault : manifest) {
    std::string file = fault["file"];
    ParseResult result = ParseMudFile(Slurp(kData / "faults" / file));
    if (result.findings.size() != 1) {
      return {false, file + ": " + std::to_string(result.findings.size()) + " findings"};
    }
    const Finding& f = result.findings[0];
    if (ToString(f.kind) != fault["kind"].get<std::string>() ||
        f.message.find(fault["contains"].get<std::string>()) == std::string::npos) {
      return {false, file + ": got [" + std::string(ToString(f.kind)) + "] " + f.message};
    }
  }
  return {true, std::to_string(kFaultCount) + "/" + std::to_string(kFaultCount) +
                    " faults flagged with exactly the targeted finding"};
}

// The pruned tree permits exactly the packets the raw flows permit.
Outcome PruningEquivalence() {
  std::mt19937_64 rng(kSeed);
  std::size_t combos = 0;
  std::size_t removed = 0;
  std::size_t sampled = 0;
  auto start = Clock::now();
  for (int i = 0; i < kPruneUniverses; ++i) {
    testing::Universe u = testing::RandomUniverse(rng);
    PruneResult pruned = PruneTree(BuildTree(u.flows, u.local_prefixes));
    std::vector<ConcreteFlow> kept = pruned.tree.Flows();
    removed += BuildTree(u.flows).leaf_count() - kept.size();

    bool same = true;
    testing::ForEachCombo(u, [&](const testing::Packet& p) {
      ++combos;
      auto before = testing::DecideGrid(u.flows, p, u.local_nets);
      auto after = testing::DecideGrid(kept, p, u.local_nets);
      same = same && before.permitted() == after.permitted() &&
             before.drop == after.drop;
    });
    if (!same) return {false, "universe " + std::to_string(i) + " differs after pruning"};

    MergedRuleset ruleset = testing::RulesetOf(u, std::move(pruned.tree));
    std::uniform_int_distribution<std::size_t> point(0, u.points.size() - 1);
    std::uniform_int_distribution<int> port(0, testing::kMaxUniversePort);
    std::uniform_int_distribution<std::size_t> device(0, u.devices.size() - 1);
    for (int k = 0; k < kIsAllowedSamplesPerUniverse; ++k) {
      testing::Packet p;
      p.device = u.devices[device(rng)];
      p.direction = rng() & 1 ? Direction::kFromDevice : Direction::kToDevice;
      p.remote = u.points[point(rng)];
      p.protocol = rng() & 1 ? kProtocolTcp : kProtocolUdp;
      p.src_port = static_cast<std::uint16_t>(port(rng));
      p.dst_port = static_cast<std::uint16_t>(port(rng));
      p.initiated = rng() & 1 ? Direction::kFromDevice : Direction::kToDevice;
      ++sampled;
      if (IsAllowed(ruleset, testing::ToQuery(p)).decision !=
          testing::Decide(u.flows, p, u.local_nets)) {
        return {false, "IsAllowed disagrees with enumeration in universe " +
                           std::to_string(i)};
      }
    }
  }
  double elapsed = Seconds(start);
  std::ostringstream detail;
  detail << kPruneUniverses << " universes, " << combos * testing::kGridSide *
                                                    testing::kGridSide
         << " packets compared, " << removed << " leaves pruned, " << sampled
         << " IsAllowed samples, " << elapsed << " s (limit " << kPruneBudgetSeconds
         << " s)";
  return {elapsed < kPruneBudgetSeconds, detail.str()};
}

std::set<FindingKind> KindsOf(const std::vector<Finding>& findings) {
  std::set<FindingKind> kinds;
  for (const auto& f : findings) kinds.insert(f.kind);
  return kinds;
}

// merge(xs ++ xs) == merge(xs) and merge is insensitive to input order.
Outcome MergeProperties() {
  std::mt19937_64 rng(kSeed + 1);
  for (int i = 0; i < kMergeCases; ++i) {
    testing::RandomDeployment d = testing::MakeRandomDeployment(rng);
    MergedRuleset once = Merge(d.entries, d.context);

    std::vector<MergeEntry> twice = d.entries;
    twice.insert(twice.end(), d.entries.begin(), d.entries.end());
    MergedRuleset doubled = Merge(twice, d.context);
    if (doubled.flows != once.flows) {
      return {false, "case " + std::to_string(i) + ": merge(xs++xs) != merge(xs)"};
    }

    std::set<FindingKind> kinds = KindsOf(once.findings);
    for (int k = 0; k < kPermutationsPerCase; ++k) {
      std::vector<MergeEntry> shuffled = d.entries;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      MergedRuleset permuted = Merge(shuffled, d.context);
      if (permuted.flows != once.flows || KindsOf(permuted.findings) != kinds) {
        return {false, "case " + std::to_string(i) + ": order changes the merge"};
      }
    }
  }
  return {true, std::to_string(kMergeCases) + " cases, " +
                    std::to_string(kPermutationsPerCase) + " permutations each"};
}

// Independent reading of the scenario: JSON walked by hand, abstractions
// expanded directly, subsumption decided by probing sample packets.
struct ScenarioOracle {
  std::set<std::string> nodes;
  std::multiset<std::pair<std::string, std::string>> edges;
};

ScenarioOracle EnumerateScenario() {
  json ctx = json::parse(Slurp(kData / "scenario" / "context.json"));
  std::map<std::string, std::string> url_of;
  for (const auto& d : ctx["devices"]) url_of[d["id"]] = d["mud_url"];
  auto authority = [](const std::string& url) {
    auto start = url.find("://") + 3;
    return url.substr(start, url.find('/', start) - start);
  };

  struct Rule {
    std::string src, dst;
    int proto;  // -1: any
    int lo, hi;
  };
  std::vector<Rule> rules;
  ScenarioOracle out;
  for (const auto& [id, url] : url_of) out.nodes.insert("device:" + id);

  for (const char* name : {"thermostat.json", "hub.json", "camera.json"}) {
    json doc = json::parse(Slurp(kData / "scenario" / name));
    std::string url = doc["ietf-mud:mud"]["mud-url"];
    std::string self;
    for (const auto& [id, u] : url_of) {
      if (u == url) self = id;
    }
    for (const auto& acl : doc["ietf-access-control-list:acls"]["acl"]) {
      for (const auto& ace : acl["aces"]["ace"]) {
        const json& m = ace["matches"];
        int proto = m.contains("ipv4") && m["ipv4"].contains("protocol")
                        ? m["ipv4"]["protocol"].get<int>()
                        : -1;
        int lo = 0, hi = 65535;
        for (const char* l4 : {"tcp", "udp"}) {
          if (m.contains(l4) && m[l4].contains("destination-port")) {
            lo = hi = m[l4]["destination-port"]["port"].get<int>();
          }
        }
        std::vector<std::string> remotes;
        if (m.contains("ipv4") && m["ipv4"].contains("ietf-acldns:dst-dnsname")) {
          remotes.push_back("domain:" + m["ipv4"]["ietf-acldns:dst-dnsname"].get<std::string>());
        }
        if (m.contains("ietf-mud:mud")) {
          const json& mud = m["ietf-mud:mud"];
          if (mud.contains("same-manufacturer")) {
            for (const auto& [id, u] : url_of) {
              if (id != self && authority(u) == authority(url)) remotes.push_back("device:" + id);
            }
          }
          if (mud.contains("my-controller") && ctx["my_controller_bindings"].contains(self)) {
            for (const auto& id : ctx["my_controller_bindings"][self]) {
              remotes.push_back("device:" + id.get<std::string>());
            }
          }
        }
        for (const auto& r : remotes) rules.push_back({"device:" + self, r, proto, lo, hi});
      }
    }
  }

  std::set<int> probe_ports = {0, 65535};
  for (const auto& r : rules) {
    for (int p : {r.lo - 1, r.lo, r.hi, r.hi + 1}) {
      if (p >= 0 && p <= 65535) probe_ports.insert(p);
    }
  }
  auto holds = [](const Rule& r, int proto, int port) {
    return (r.proto < 0 || r.proto == proto) && r.lo <= port && port <= r.hi;
  };
  auto contained = [&](const Rule& inner, const Rule& outer) {
    if (inner.src != outer.src || inner.dst != outer.dst) return false;
    for (int proto : {1, 6, 17}) {
      for (int port : probe_ports) {
        if (holds(inner, proto, port) && !holds(outer, proto, port)) return false;
      }
    }
    return true;
  };

  std::set<std::tuple<std::string, std::string, int>> edges;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < rules.size() && !dominated; ++j) {
      if (i == j || !contained(rules[i], rules[j])) continue;
      // Equal rules: keep the first.
      dominated = !contained(rules[j], rules[i]) || j < i;
    }
    if (!dominated) edges.insert({rules[i].src, rules[i].dst, rules[i].proto});
  }
  for (const auto& [src, dst, proto] : edges) {
    out.nodes.insert(dst);
    out.edges.insert({src, dst});
  }
  return out;
}

Outcome ScenarioGraph() {
  DeploymentContext ctx =
      ParseDeploymentContext(Slurp(kData / "scenario" / "context.json"));
  std::vector<std::shared_ptr<const MudFile>> files;
  for (const char* name : {"thermostat.json", "hub.json", "camera.json"}) {
    ParseResult r = ParseMudFile(Slurp(kData / "scenario" / name));
    if (!r.ok()) return {false, std::string(name) + " does not parse"};
    files.push_back(std::make_shared<const MudFile>(*r.file));
  }
  AttachFiles(ctx, files);
  FlowGraph graph = ToGraph(Merge(ctx));

  ScenarioOracle oracle = EnumerateScenario();
  std::set<std::string> nodes;
  for (const auto& n : graph.nodes) nodes.insert(n.id);
  std::multiset<std::pair<std::string, std::string>> edges;
  for (const auto& e : graph.edges) edges.insert({e.src, e.dst});

  std::ostringstream detail;
  detail << graph.nodes.size() << " nodes, " << graph.edges.size()
         << " edges; oracle " << oracle.nodes.size() << " nodes, "
         << oracle.edges.size() << " edges";
  bool pass = graph.nodes.size() == kScenarioNodes &&
              graph.edges.size() == kScenarioEdges && nodes == oracle.nodes &&
              edges == oracle.edges;
  return {pass, detail.str()};
}

// Packets no allow rule covers get no_match.
Outcome DefaultDeny() {
  std::mt19937_64 rng(kSeed + 2);
  int checked = 0;
  while (checked < kDenyQueries) {
    testing::Universe u = testing::RandomUniverse(rng, 4, 12, /*drop_rate=*/0.0);
    MergedRuleset ruleset = testing::RulesetOf(
        u, PruneTree(BuildTree(u.flows, u.local_prefixes)).tree);
    std::uniform_int_distribution<std::size_t> point(0, u.points.size() - 1);
    std::uniform_int_distribution<int> port(0, testing::kMaxUniversePort);
    for (int tries = 0; tries < 20 && checked < kDenyQueries; ++tries) {
      testing::Packet p;
      p.device = u.devices[rng() % u.devices.size()];
      p.direction = rng() & 1 ? Direction::kFromDevice : Direction::kToDevice;
      p.remote = u.points[point(rng)];
      p.protocol = rng() & 1 ? kProtocolTcp : kProtocolUdp;
      p.src_port = static_cast<std::uint16_t>(port(rng));
      p.dst_port = static_cast<std::uint16_t>(port(rng));
      p.initiated = rng() & 1 ? Direction::kFromDevice : Direction::kToDevice;
      if (testing::Decide(u.flows, p, u.local_nets) != Decision::kNoMatch) continue;
      ++checked;
      QueryResult r = IsAllowed(ruleset, testing::ToQuery(p));
      if (r.decision != Decision::kNoMatch) {
        return {false, "query outside the permitted set returned " +
                           std::string(ToString(r.decision))};
      }
    }
  }
  return {true, std::to_string(kDenyQueries) + "/" + std::to_string(kDenyQueries) +
                    " queries outside the permitted set returned no_match"};
}

// One mutation of the workspace, replayable against a fresh instance.
struct Mutation {
  enum class Kind { kAdd, kRemove, kContext } kind;
  std::string payload;  // body, or file id for kRemove
};

std::vector<Mutation> MutationScript() {
  std::vector<Mutation> script;
  auto add = [&](const fs::path& p) { script.push_back({Mutation::Kind::kAdd, Slurp(p)}); };
  fs::path s = kData / "scenario";
  add(s / "thermostat.json");
  add(s / "hub.json");
  add(s / "camera.json");
  script.push_back({Mutation::Kind::kContext, Slurp(s / "context.json")});
  script.push_back({Mutation::Kind::kRemove, "f2"});
  add(s / "hub.json");
  script.push_back({Mutation::Kind::kContext, R"({"devices": []})"});
  std::vector<fs::path> corpus;
  for (const auto& e : fs::directory_iterator(kData / "corpus")) corpus.push_back(e.path());
  std::sort(corpus.begin(), corpus.end());
  for (const auto& p : corpus) add(p);
  script.push_back({Mutation::Kind::kRemove, "f1"});
  script.push_back({Mutation::Kind::kRemove, "f5"});
  script.push_back({Mutation::Kind::kContext, Slurp(s / "context.json")});
  return script;
}

// Concurrent readers never see a graph that mixes two revisions.
Outcome ServiceConsistency() {
  std::vector<Mutation> script = MutationScript();

  // Expected body for every revision, from a sequential replay.
  std::map<std::uint64_t, std::string> expected;
  {
    Workspace replay;
    expected[replay.revision()] = replay.Graph().body.dump();
    for (const auto& m : script) {
      if (m.kind == Mutation::Kind::kAdd) replay.AddFile(m.payload);
      if (m.kind == Mutation::Kind::kRemove) replay.RemoveFile(m.payload);
      if (m.kind == Mutation::Kind::kContext) replay.SetContext(m.payload);
      expected[replay.revision()] = replay.Graph().body.dump();
    }
  }

  Service service;
  int port = service.BindToAnyPort("127.0.0.1");
  if (port <= 0) return {false, "cannot bind a port"};
  std::thread server([&] { service.ListenAfterBind(); });
  service.WaitUntilReady();

  std::atomic<bool> done{false};
  std::mutex mu;
  std::vector<std::string> bodies;
  std::atomic<int> failures{0};
  std::vector<std::thread> readers;
  for (int t = 0; t < kReaderThreads; ++t) {
    readers.emplace_back([&] {
      httplib::Client client("127.0.0.1", port);
      std::vector<std::string> seen;
      while (!done.load()) {
        auto res = client.Get("/api/graph");
        if (!res || res->status != 200) {
          ++failures;
          continue;
        }
        seen.push_back(res->body);
      }
      std::lock_guard lock(mu);
      bodies.insert(bodies.end(), seen.begin(), seen.end());
    });
  }

  httplib::Client writer("127.0.0.1", port);
  bool writes_ok = true;
  for (const auto& m : script) {
    httplib::Result res;
    if (m.kind == Mutation::Kind::kAdd) {
      res = writer.Post("/api/mudfiles", m.payload, "application/json");
    } else if (m.kind == Mutation::Kind::kRemove) {
      res = writer.Delete("/api/mudfiles/" + m.payload);
    } else {
      res = writer.Put("/api/context", m.payload, "application/json");
    }
    writes_ok = writes_ok && res && res->status / 100 == 2;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  done = true;
  for (auto& r : readers) r.join();
  service.Stop();
  server.join();

  if (!writes_ok) return {false, "a mutation was rejected"};
  if (failures > 0) return {false, std::to_string(failures.load()) + " failed reads"};
  std::set<std::uint64_t> revisions;
  for (const auto& body : bodies) {
    json graph = json::parse(body, nullptr, false);
    if (graph.is_discarded() || !graph.contains("revision")) {
      return {false, "response without a revision stamp"};
    }
    auto rev = graph["revision"].get<std::uint64_t>();
    auto it = expected.find(rev);
    if (it == expected.end() || it->second != body) {
      return {false, "graph at revision " + std::to_string(rev) +
                         " does not match that revision"};
    }
    revisions.insert(rev);
  }
  std::ostringstream detail;
  detail << bodies.size() << " concurrent reads across " << revisions.size()
         << " revisions (" << script.size() << " mutations), all consistent";
  return {!bodies.empty(), detail.str()};
}

}  // namespace
}  // namespace mudkit

int main() {
  using mudkit::Outcome;
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"parser round-trip", mudkit::RoundTrip},
      {"seeded-fault validation", mudkit::SeededFaults},
      {"pruning oracle equivalence", mudkit::PruningEquivalence},
      {"merge idempotence and order independence", mudkit::MergeProperties},
      {"three-device abstraction graph", mudkit::ScenarioGraph},
      {"default deny", mudkit::DefaultDeny},
      {"service snapshot consistency", mudkit::ServiceConsistency},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << ++index << ". " << c.name
              << ": " << o.detail << std::endl;
  }
  std::cout << (std::size(criteria) - failed) << "/" << std::size(criteria)
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
