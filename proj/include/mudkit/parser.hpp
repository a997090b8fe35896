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

// Decoding, checking and encoding of MUD documents (JSON encoding of the
// ietf-mud and ietf-access-control-list YANG modules). See docs/format.md for
// the accepted subset.

#ifndef MUDKIT_PARSER_HPP_
#define MUDKIT_PARSER_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mudkit/model.hpp"

namespace mudkit {

// `file` is present exactly when no finding has error severity. Warnings and
// informational findings accompany a successfully parsed file.
struct ParseResult {
  std::optional<MudFile> file;
  std::vector<Finding> findings;

  bool ok() const { return file.has_value(); }
};

// Never throws. Every problem in the document is reported, not just the first.
ParseResult ParseMudFile(std::string_view bytes);

// Checks that need the whole decoded file: protocol/port consistency, empty
// matches, explicit drops, and ACLs no policy references. Total.
std::vector<Finding> ValidateSemantics(const MudFile& file);

// Pretty-printed JSON. ParseMudFile(SerializeMudFile(f)).file == f for every
// file ParseMudFile accepted.
std::string SerializeMudFile(const MudFile& file);

}  // namespace mudkit

#endif  // MUDKIT_PARSER_HPP_
