#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wfr/error.hpp"

namespace wfr {

inline std::vector<nlohmann::ordered_json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), Errc::io_error, "cannot open " + path.string());
  std::vector<nlohmann::ordered_json> lines;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      lines.push_back(nlohmann::ordered_json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::parse_error, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return lines;
}

template <typename Range>
void write_jsonl(const std::filesystem::path& path, const Range& records) {
  std::ofstream out(path);
  require(out.good(), Errc::io_error, "cannot write " + path.string());
  for (const auto& r : records) out << r.dump() << "\n";
}

}  // namespace wfr
