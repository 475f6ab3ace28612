#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace pairjudge {

using Sha256Bytes = std::array<std::uint8_t, 32>;

Sha256Bytes sha256(std::string_view data);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Each field is prefixed with its byte length as a big-endian u64, so
/// ("ab","c") and ("a","bc") never collide.
std::string length_prefixed(std::initializer_list<std::string_view> fields);

/// SHA-256 of the length-prefixed concatenation of `fields`.
std::string digest_fields(std::initializer_list<std::string_view> fields);

}  // namespace pairjudge
