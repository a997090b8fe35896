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

#include "mudkit/net.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cctype>
#include <charconv>

namespace mudkit {

std::optional<IpPrefix> IpPrefix::Parse(std::string_view text) {
  std::string_view address = text;
  std::optional<int> length;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    address = text.substr(0, slash);
    std::string_view len_text = text.substr(slash + 1);
    int value = 0;
    auto [end, ec] = std::from_chars(len_text.data(),
                                     len_text.data() + len_text.size(), value);
    if (ec != std::errc() || end != len_text.data() + len_text.size() ||
        len_text.empty()) {
      return std::nullopt;
    }
    length = value;
  }
  if (address.empty() || address.size() > 45) return std::nullopt;

  IpPrefix prefix;
  std::string buffer(address);
  if (buffer.find(':') != std::string::npos) {
    prefix.family_ = IpVersion::v6;
    if (inet_pton(AF_INET6, buffer.c_str(), prefix.bytes_.data()) != 1) {
      return std::nullopt;
    }
  } else {
    prefix.family_ = IpVersion::v4;
    if (inet_pton(AF_INET, buffer.c_str(), prefix.bytes_.data()) != 1) {
      return std::nullopt;
    }
  }
  int max = prefix.max_length();
  int len = length.value_or(max);
  if (len < 0 || len > max) return std::nullopt;
  prefix.length_ = static_cast<std::uint8_t>(len);

  for (int bit = len; bit < 128; ++bit) {
    prefix.bytes_[bit / 8] &= static_cast<std::uint8_t>(~(0x80u >> (bit % 8)));
  }
  return prefix;
}

bool IpPrefix::Contains(const IpPrefix& other) const {
  if (family_ != other.family_ || other.length_ < length_) return false;
  int full_bytes = length_ / 8;
  if (!std::equal(bytes_.begin(), bytes_.begin() + full_bytes,
                  other.bytes_.begin())) {
    return false;
  }
  int rest = length_ % 8;
  if (rest == 0) return true;
  auto mask = static_cast<std::uint8_t>(0xFFu << (8 - rest));
  return (bytes_[full_bytes] & mask) == (other.bytes_[full_bytes] & mask);
}

std::string IpPrefix::ToString() const {
  char buffer[INET6_ADDRSTRLEN] = {};
  inet_ntop(family_ == IpVersion::v4 ? AF_INET : AF_INET6, bytes_.data(),
            buffer, sizeof(buffer));
  return std::string(buffer) + "/" + std::to_string(length_);
}

std::string ToLower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool IsValidHostname(std::string_view name) {
  if (!name.empty() && name.back() == '.') name.remove_suffix(1);
  if (name.empty() || name.size() > 253) return false;
  std::size_t start = 0;
  while (start <= name.size()) {
    std::size_t end = name.find('.', start);
    if (end == std::string_view::npos) end = name.size();
    std::string_view label = name.substr(start, end - start);
    if (label.empty() || label.size() > 63) return false;
    if (label.front() == '-' || label.back() == '-') return false;
    for (unsigned char c : label) {
      if (!std::isalnum(c) && c != '-') return false;
    }
    start = end + 1;
  }
  return true;
}

bool IsValidAuthority(std::string_view authority) {
  if (authority.empty()) return false;
  std::string_view host = authority;
  std::string_view port;
  if (authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) return false;
    std::string literal(authority.substr(1, close - 1));
    unsigned char scratch[16];
    if (inet_pton(AF_INET6, literal.c_str(), scratch) != 1) return false;
    std::string_view rest = authority.substr(close + 1);
    if (rest.empty()) return true;
    if (rest.front() != ':') return false;
    port = rest.substr(1);
    host = {};
  } else if (auto colon = authority.rfind(':');
             colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    port = authority.substr(colon + 1);
    if (port.empty()) return false;
  }
  for (unsigned char c : port) {
    if (!std::isdigit(c)) return false;
  }
  if (port.size() > 5) return false;
  if (!port.empty() && std::stoul(std::string(port)) > 65535) return false;
  return host.empty() ? authority.front() == '[' : IsValidHostname(host);
}

std::optional<std::string> UriAuthority(std::string_view uri) {
  auto scheme_end = uri.find("://");
  if (scheme_end == std::string_view::npos || scheme_end == 0) {
    return std::nullopt;
  }
  std::string_view rest = uri.substr(scheme_end + 3);
  auto end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, end);
  if (auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority = authority.substr(at + 1);
  }
  if (authority.empty()) return std::nullopt;
  return ToLower(authority);
}

bool IsAbsoluteUri(std::string_view uri) {
  auto colon = uri.find(':');
  if (colon == std::string_view::npos || colon == 0 ||
      colon + 1 == uri.size()) {
    return false;
  }
  if (!std::isalpha(static_cast<unsigned char>(uri.front()))) return false;
  for (unsigned char c : uri.substr(0, colon)) {
    if (!std::isalnum(c) && c != '+' && c != '-' && c != '.') return false;
  }
  for (unsigned char c : uri) {
    if (c <= 0x20 || c == 0x7f) return false;
  }
  return true;
}

}  // namespace mudkit
