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

#ifndef MUDKIT_NET_HPP_
#define MUDKIT_NET_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mudkit {

enum class IpVersion : std::uint8_t { v4, v6 };

// An address prefix in canonical form: host bits below the prefix length are
// always zero, so two prefixes covering the same address block compare equal.
class IpPrefix {
 public:
  IpPrefix() = default;

  // Accepts "a.b.c.d/len", "x:y::z/len", or a bare address (host prefix).
  static std::optional<IpPrefix> Parse(std::string_view text);

  IpVersion family() const { return family_; }
  int length() const { return length_; }
  int max_length() const { return family_ == IpVersion::v4 ? 32 : 128; }

  bool Contains(const IpPrefix& other) const;
  bool Overlaps(const IpPrefix& other) const {
    return Contains(other) || other.Contains(*this);
  }

  std::string ToString() const;

  auto operator<=>(const IpPrefix&) const = default;

 private:
  IpVersion family_ = IpVersion::v4;
  std::uint8_t length_ = 0;
  std::array<std::uint8_t, 16> bytes_{};
};

// RFC 1123 host name: dot-separated labels of letters, digits and hyphens.
bool IsValidHostname(std::string_view name);

// host[:port], where host is a hostname or a bracketed IPv6 literal.
bool IsValidAuthority(std::string_view authority);

// Returns the lowercased authority of "scheme://authority/...", without any
// userinfo. nullopt when the URI has no scheme or an empty authority.
std::optional<std::string> UriAuthority(std::string_view uri);

// Absolute URI: scheme ":" followed by at least one character.
bool IsAbsoluteUri(std::string_view uri);

std::string ToLower(std::string_view text);

}  // namespace mudkit

#endif  // MUDKIT_NET_HPP_
