#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wysiwim/pipeline.hpp"
#include "wysiwim/tasks.hpp"

namespace wysiwim::cli {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
// Throws IoError when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

nlohmann::json to_json(const tasks::Metrics& metrics);
nlohmann::json to_json(const tasks::ClassificationReport& report);

// Machine-readable record of one command run. Serialized with sorted keys;
// everything except wall_time_seconds is a function of the inputs.
struct RunReport {
  std::string command;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json parameters = nlohmann::json::object();
  nlohmann::json outputs = nlohmann::json::object();
  nlohmann::json metrics;  // null when the command computes none
  std::vector<embed::ItemFailure> failures;
  double wall_time_seconds = 0.0;

  // Records {path, sha256} for an input file under `name`.
  void add_input(const std::string& name, const std::filesystem::path& path);

  nlohmann::json to_json() const;
  std::string serialize() const;
};

}  // namespace wysiwim::cli
