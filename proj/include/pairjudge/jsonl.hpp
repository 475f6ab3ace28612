#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pairjudge/core.hpp"

namespace pairjudge::jsonl {

struct BadLine {
  std::size_t line_number = 0;  // 1-based
  std::string message;
};

struct ReadResult {
  std::vector<Json> values;
  std::vector<std::size_t> line_numbers;  // parallel to values
  std::vector<BadLine> bad_lines;
};

/// Parses one JSON value per non-blank line. Bad lines are reported, not thrown.
/// Throws FileMissing when the file does not exist.
ReadResult read(const std::filesystem::path& path);

/// Like read() but any bad line is an error.
std::vector<Json> read_strict(const std::filesystem::path& path);

/// Canonical single-line encoding (sorted keys, raw UTF-8).
std::string dump(const Json& value);

void write(const std::filesystem::path& path, const std::vector<Json>& values);

template <typename T>
std::vector<Json> to_values(const std::vector<T>& items) {
  std::vector<Json> out;
  out.reserve(items.size());
  for (const auto& item : items) out.emplace_back(item);
  return out;
}

template <typename T>
std::vector<T> read_as(const std::filesystem::path& path) {
  std::vector<T> out;
  for (const auto& v : read_strict(path)) out.push_back(v.template get<T>());
  return out;
}

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

/// SHA-256 hex of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

}  // namespace pairjudge::jsonl
