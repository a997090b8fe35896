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

// JSON views of model values, shared by the CLI, the HTTP service and the
// Python bindings.

#ifndef MUDKIT_CODEC_HPP_
#define MUDKIT_CODEC_HPP_

#include <vector>

#include "json.hpp"
#include "mudkit/model.hpp"

namespace mudkit {

nlohmann::json ToJson(const RuleRef& ref);
nlohmann::json ToJson(const ConcreteFlow& flow);
nlohmann::json ToJson(const Finding& finding);
nlohmann::json ToJson(const std::vector<Finding>& findings);
nlohmann::json ToJson(const std::vector<ConcreteFlow>& flows);

// [lo, hi]
nlohmann::json ToJson(PortRange range);

}  // namespace mudkit

#endif  // MUDKIT_CODEC_HPP_
