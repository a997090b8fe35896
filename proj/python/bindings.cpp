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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mudkit/ace_tree.hpp"
#include "mudkit/codec.hpp"
#include "mudkit/context.hpp"
#include "mudkit/flow_graph.hpp"
#include "mudkit/parser.hpp"

namespace py = pybind11;

namespace mudkit {
namespace {

// Plain dicts and lists on the Python side.
py::object ToPython(const nlohmann::json& value) {
  return py::module_::import("json").attr("loads")(value.dump());
}

py::dict Parse(const std::string& text) {
  ParseResult result = ParseMudFile(text);
  py::dict out;
  out["ok"] = result.ok();
  out["findings"] = ToPython(ToJson(result.findings));
  out["canonical"] = result.file ? py::object(py::str(SerializeMudFile(*result.file)))
                                 : py::object(py::none());
  return out;
}

class PyRuleset {
 public:
  // `files` maps device ids to MUD JSON text. With a context, files attach to
  // devices by mud-url and the keys only name the inputs in errors.
  PyRuleset(const std::vector<std::pair<std::string, std::string>>& files,
            const std::optional<std::string>& context_json) {
    std::vector<std::pair<std::string, std::shared_ptr<const MudFile>>> parsed;
    for (const auto& [id, text] : files) {
      ParseResult result = ParseMudFile(text);
      if (!result.ok()) {
        throw py::value_error("MUD file '" + id + "' does not parse: " +
                              ToJson(result.findings).dump());
      }
      parsed.emplace_back(id, std::make_shared<const MudFile>(std::move(*result.file)));
    }
    DeploymentContext context;
    if (context_json) {
      context = ParseDeploymentContext(*context_json);
      std::vector<std::shared_ptr<const MudFile>> bare;
      for (const auto& [id, file] : parsed) bare.push_back(file);
      AttachFiles(context, bare);
    } else {
      context = SyntheticContext(parsed);
    }
    ruleset_ = Merge(context);
  }

  std::vector<std::string> devices() const { return ruleset_.devices; }
  py::object findings() const { return ToPython(ToJson(ruleset_.findings)); }
  py::object flows() const { return ToPython(ToJson(ruleset_.flows)); }
  py::object graph() const { return ToPython(GraphToJson(ToGraph(ruleset_))); }

  std::string Export(const std::string& format) const {
    if (format != "json" && format != "dot") {
      throw py::value_error("format must be 'json' or 'dot'");
    }
    return ExportGraph(ToGraph(ruleset_),
                       format == "dot" ? GraphFormat::kDot : GraphFormat::kJson);
  }

  py::object Summary(const std::string& device) const {
    return ToPython(SummaryToJson(Summarize(ruleset_, device)));
  }

  py::object Between(const std::string& a, const std::string& b) const {
    return ToPython(ToJson(FlowsBetween(ruleset_, a, b)));
  }

  py::tuple Query(const std::string& device, const std::string& remote,
                  int protocol, int dst_port, int src_port,
                  const std::string& direction,
                  const std::optional<std::string>& initiated) const {
    if (protocol < 0 || protocol > 255) throw py::value_error("protocol out of range");
    if (dst_port < 0 || dst_port > 65535 || src_port < 0 || src_port > 65535) {
      throw py::value_error("port out of range");
    }
    PacketQuery packet;
    packet.device_id = device;
    packet.remote = InterpretRemote(ruleset_, remote);
    packet.protocol = static_cast<std::uint8_t>(protocol);
    packet.dst_port = static_cast<std::uint16_t>(dst_port);
    packet.src_port = static_cast<std::uint16_t>(src_port);
    auto dir = ParseDirection(direction);
    if (!dir) throw py::value_error("direction must be from-device or to-device");
    packet.direction = *dir;
    if (initiated) {
      auto init = ParseDirection(*initiated);
      if (!init) throw py::value_error("initiated must be from-device or to-device");
      packet.initiated = init;
    }
    QueryResult result = IsAllowed(ruleset_, packet);
    py::list refs;
    for (const auto& ref : result.refs) refs.append(ToPython(ToJson(ref)));
    return py::make_tuple(std::string(ToString(result.decision)), refs);
  }

 private:
  MergedRuleset ruleset_;
};

}  // namespace
}  // namespace mudkit

PYBIND11_MODULE(_mudkit, m) {
  using mudkit::PyRuleset;
  m.doc() = "MUD file validation, merging and flow-graph export";

  py::register_exception<mudkit::ContextError>(m, "ContextError", PyExc_ValueError);
  // UnknownDeviceError derives from std::out_of_range, which surfaces as
  // IndexError by default.
  py::register_exception<mudkit::UnknownDeviceError>(m, "UnknownDeviceError",
                                                      PyExc_KeyError);

  m.def("parse", &mudkit::Parse, py::arg("text"),
        "Parses MUD JSON. Returns {ok, findings, canonical}.");

  py::class_<PyRuleset>(m, "Ruleset")
      .def(py::init<const std::vector<std::pair<std::string, std::string>>&,
                    const std::optional<std::string>&>(),
           py::arg("files"), py::arg("context") = py::none())
      .def_property_readonly("devices", &PyRuleset::devices)
      .def("findings", &PyRuleset::findings)
      .def("flows", &PyRuleset::flows)
      .def("graph", &PyRuleset::graph)
      .def("export", &PyRuleset::Export, py::arg("format") = "json")
      .def("summary", &PyRuleset::Summary, py::arg("device"))
      .def("flows_between", &PyRuleset::Between, py::arg("a"), py::arg("b"))
      .def("query", &PyRuleset::Query, py::arg("device"), py::arg("remote"),
           py::arg("protocol") = 6, py::arg("dst_port") = 0, py::arg("src_port") = 0,
           py::arg("direction") = "from-device", py::arg("initiated") = py::none());
}
