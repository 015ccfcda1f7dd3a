#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "wfr/error.hpp"
#include "wfr/gateway.hpp"  // fnv1a64 / hex64
#include "wfr/time.hpp"

#ifndef WFR_VERSION
#define WFR_VERSION "0.0.0"
#endif

namespace wfr {

inline std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::io_error, "cannot read " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return detail::hex64(detail::fnv1a64(bytes));
}

/// Reproducibility record written beside every command's outputs.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::map<std::string, std::string> inputs;   // path -> digest
  std::map<std::string, std::string> outputs;  // path -> digest
  double wall_ms = 0;

  void add_input(const std::filesystem::path& p) { inputs[p.string()] = file_digest(p); }
  void add_output(const std::filesystem::path& p) { outputs[p.string()] = file_digest(p); }

  nlohmann::ordered_json to_json() const {
    return nlohmann::ordered_json{{"command", command}, {"config", config},
                                  {"inputs", inputs},   {"outputs", outputs},
                                  {"version", WFR_VERSION}, {"wall_ms", wall_ms}};
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    require(out.good(), Errc::io_error, "cannot write " + path.string());
    out << to_json().dump(2) << "\n";
  }
};

}  // namespace wfr
