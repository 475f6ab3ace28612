#include "pairjudge/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "pairjudge/digest.hpp"
#include "pairjudge/error.hpp"
#include "pairjudge/text.hpp"

namespace pairjudge::jsonl {

ReadResult read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileMissing, path.string());
  ReadResult result;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    try {
      result.values.push_back(Json::parse(line));
      result.line_numbers.push_back(n);
    } catch (const Json::parse_error& e) {
      result.bad_lines.push_back({n, e.what()});
    }
  }
  return result;
}

std::vector<Json> read_strict(const std::filesystem::path& path) {
  auto r = read(path);
  if (!r.bad_lines.empty()) {
    throw Error(ErrorKind::MalformedLine, path.string() + ": " + std::to_string(r.bad_lines.size()) +
                                              " bad line(s), first at line " +
                                              std::to_string(r.bad_lines.front().line_number));
  }
  return std::move(r.values);
}

std::string dump(const Json& value) {
  return value.dump(-1, ' ', false, Json::error_handler_t::strict);
}

void write(const std::filesystem::path& path, const std::vector<Json>& values) {
  std::string out;
  for (const auto& v : values) {
    out += dump(v);
    out.push_back('\n');
  }
  write_file(path, out);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileMissing, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::string file_digest(const std::filesystem::path& path) {
  return sha256_hex(read_file(path));
}

}  // namespace pairjudge::jsonl
