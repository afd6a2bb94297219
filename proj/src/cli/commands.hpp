#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wysiwim/render.hpp"
#include "wysiwim/report.hpp"

namespace wysiwim::cli {

using std::filesystem::path;

struct ViewOptions {
  std::string variant = "syntax";
  int width = 224;
  int height = 224;
  int cell_width = 8;
  int cell_height = 16;
  int tab_width = 4;

  render::RenderConfig config() const;
  nlohmann::json to_json() const;
};

struct RenderOptions {
  path manifest;
  std::vector<path> profiles;
  ViewOptions view;
  int workers = 1;
  path out;
};

struct EmbedOptions {
  path manifest;
  std::vector<path> profiles;
  std::optional<path> model_descriptor;
  ViewOptions view;
  int workers = 1;
  int batch_size = 16;
  path out;
};

struct CalibrateOptions {
  path cache;
  path pairs;
  std::optional<path> manifest;
  std::vector<path> profiles;
  path out;
};

struct DetectOptions {
  path cache;
  path pairs;
  std::optional<path> manifest;
  std::vector<path> profiles;
  // A number, or the path of a threshold file written by calibrate.
  std::string threshold;
  path out;
};

struct ClassifyOptions {
  path cache;
  std::optional<path> test_cache;
  path manifest;
  std::vector<path> profiles;
  int k = 1;
  std::string metric = "cosine";
  std::uint64_t seed = 42;
  double test_fraction = 0.2;
  path out;
};

struct EvaluateOptions {
  std::optional<path> decisions;
  std::optional<path> predictions;
  std::optional<path> pairs;
  std::optional<path> manifest;
  std::vector<path> profiles;
};

struct CommandResult {
  RunReport report;
  int exit_code = 0;
};

// Each command throws wysiwim::Error subclasses for configuration problems;
// per-item problems are listed in the report and yield kItemFailures.
CommandResult cmd_render(const RenderOptions& options);
CommandResult cmd_embed(const EmbedOptions& options);
CommandResult cmd_calibrate(const CalibrateOptions& options);
CommandResult cmd_detect(const DetectOptions& options);
CommandResult cmd_classify(const ClassifyOptions& options);
CommandResult cmd_evaluate(const EvaluateOptions& options);

// Seeded Fisher-Yates shuffle that yields the same order on every platform.
void seeded_shuffle(std::vector<std::string>& items, std::uint64_t seed);

}  // namespace wysiwim::cli
