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

#include "mudkit/codec.hpp"

#include <string>

namespace mudkit {

using json = nlohmann::json;

json ToJson(PortRange range) { return json::array({range.lo, range.hi}); }

json ToJson(const RuleRef& ref) {
  return json{
      {"mud_url", ref.mud_url},
      {"acl", ref.acl_name},
      {"ace", ref.ace_name},
      {"abstraction", ref.abstraction
                          ? json(std::string(ToString(*ref.abstraction)))
                          : json(nullptr)},
  };
}

json ToJson(const ConcreteFlow& flow) {
  json provenance = json::array();
  for (const auto& ref : flow.provenance) provenance.push_back(ToJson(ref));
  return json{
      {"device", flow.device_id},
      {"direction", std::string(ToString(flow.direction))},
      {"remote", EndpointRef(flow.remote)},
      {"protocol", flow.protocol ? json(*flow.protocol) : json(nullptr)},
      {"src_port", ToJson(flow.src_port)},
      {"dst_port", ToJson(flow.dst_port)},
      {"direction_initiated",
       flow.direction_initiated
           ? json(std::string(ToString(*flow.direction_initiated)))
           : json(nullptr)},
      {"action", std::string(ToString(flow.action))},
      {"provenance", std::move(provenance)},
  };
}

json ToJson(const Finding& finding) {
  json refs = json::array();
  for (const auto& ref : finding.refs) refs.push_back(ToJson(ref));
  return json{
      {"kind", std::string(ToString(finding.kind))},
      {"severity", std::string(ToString(finding.severity))},
      {"message", finding.message},
      {"refs", std::move(refs)},
      {"flows", ToJson(finding.flows)},
  };
}

json ToJson(const std::vector<Finding>& findings) {
  json out = json::array();
  for (const auto& f : findings) out.push_back(ToJson(f));
  return out;
}

json ToJson(const std::vector<ConcreteFlow>& flows) {
  json out = json::array();
  for (const auto& f : flows) out.push_back(ToJson(f));
  return out;
}

}  // namespace mudkit
