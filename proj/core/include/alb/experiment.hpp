#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

// Batch experiment runner: parses a declarative experiment file, dispatches
// to module operations and writes CSV/JSON reports. Fixed spec + seed fully
// determine every numeric output byte.
namespace alb::cli {

using nlohmann::json;

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& w) : std::runtime_error(w) {}
};

struct ExperimentSpec {
  std::string command;
  json params = json::object();
  std::uint64_t seed = 1;
  std::string output_dir;
  int threads = 1;

  json resolved() const;
  std::string content_hash() const;
};

// Rejects unknown top-level keys; the per-command parameter whitelist is
// enforced in validate/run.
ExperimentSpec parse_spec(const json& j);
ExperimentSpec load_spec(const std::string& path);

// Named diagnostics; empty means the spec is runnable.
std::vector<std::string> validate(const ExperimentSpec& spec);

// Executes and writes artifacts under output_dir. Returns the process exit
// code: 0 success, 2 validation error, 3 numerical failure.
int run(const ExperimentSpec& spec, std::ostream& log);

int run_file(const std::string& path, std::ostream& log);
int validate_file(const std::string& path, std::ostream& log);

const std::vector<std::string>& known_commands();

}  // namespace alb::cli
