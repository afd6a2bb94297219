#include "wysiwim/cli.hpp"

#include <fstream>
#include <functional>

#include <CLI11.hpp>

#include "commands.hpp"
#include "wysiwim/error.hpp"

namespace wysiwim::cli {
namespace {

void add_view_flags(CLI::App& app, ViewOptions& view) {
  app.add_option("--variant", view.variant, "plain, keyword or syntax")->capture_default_str();
  app.add_option("--width", view.width, "canvas width in pixels")->capture_default_str();
  app.add_option("--height", view.height, "canvas height in pixels")->capture_default_str();
  app.add_option("--cell-width", view.cell_width, "glyph cell width")->capture_default_str();
  app.add_option("--cell-height", view.cell_height, "glyph cell height")->capture_default_str();
  app.add_option("--tab-width", view.tab_width, "tab stop interval in columns")
      ->capture_default_str();
}

void add_profile_flag(CLI::App& app, std::vector<path>& profiles) {
  app.add_option("--profile", profiles, "extra language profile JSON (repeatable)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Render code to images, embed them and run clone detection or classification",
               "wysiwim"};
  app.require_subcommand(1);
  std::optional<path> report_path;
  app.add_option("--report", report_path, "write the run report here instead of stdout");

  RenderOptions render_opts;
  auto* render = app.add_subcommand("render", "render every manifest snippet to <id>.png");
  render->add_option("--manifest", render_opts.manifest)->required();
  add_profile_flag(*render, render_opts.profiles);
  add_view_flags(*render, render_opts.view);
  render->add_option("--workers", render_opts.workers)->capture_default_str();
  render->add_option("--out", render_opts.out, "output directory")->required();

  EmbedOptions embed_opts;
  auto* embed = app.add_subcommand("embed", "embed every manifest snippet into a cache");
  embed->add_option("--manifest", embed_opts.manifest)->required();
  add_profile_flag(*embed, embed_opts.profiles);
  embed->add_option("--model-descriptor", embed_opts.model_descriptor,
                    "descriptor JSON; the builtin patch-mean backend when omitted");
  add_view_flags(*embed, embed_opts.view);
  embed->add_option("--workers", embed_opts.workers)->capture_default_str();
  embed->add_option("--batch-size", embed_opts.batch_size)->capture_default_str();
  embed->add_option("--out", embed_opts.out, "cache file")->required();

  CalibrateOptions calibrate_opts;
  auto* calibrate = app.add_subcommand("calibrate", "pick the F1-optimal clone threshold");
  calibrate->add_option("--cache", calibrate_opts.cache)->required();
  calibrate->add_option("--pairs", calibrate_opts.pairs)->required();
  calibrate->add_option("--manifest", calibrate_opts.manifest);
  add_profile_flag(*calibrate, calibrate_opts.profiles);
  calibrate->add_option("--out", calibrate_opts.out, "threshold JSON")->required();

  DetectOptions detect_opts;
  auto* detect = app.add_subcommand("detect", "decide clone / not clone for each pair");
  detect->add_option("--cache", detect_opts.cache)->required();
  detect->add_option("--pairs", detect_opts.pairs)->required();
  detect->add_option("--manifest", detect_opts.manifest);
  add_profile_flag(*detect, detect_opts.profiles);
  detect->add_option("--threshold", detect_opts.threshold, "number or threshold JSON")
      ->required();
  detect->add_option("--out", detect_opts.out, "decisions CSV")->required();

  ClassifyOptions classify_opts;
  auto* classify = app.add_subcommand("classify", "k-nearest-neighbour classification");
  classify->add_option("--cache", classify_opts.cache, "training cache")->required();
  classify->add_option("--test-cache", classify_opts.test_cache,
                       "query cache; without it a seeded split of --cache is used");
  classify->add_option("--manifest", classify_opts.manifest, "labelled manifest")->required();
  add_profile_flag(*classify, classify_opts.profiles);
  classify->add_option("--k", classify_opts.k)->capture_default_str();
  classify->add_option("--metric", classify_opts.metric, "cosine or euclidean")
      ->capture_default_str();
  classify->add_option("--seed", classify_opts.seed)->capture_default_str();
  classify->add_option("--test-fraction", classify_opts.test_fraction)->capture_default_str();
  classify->add_option("--out", classify_opts.out, "predictions CSV")->required();

  EvaluateOptions evaluate_opts;
  auto* evaluate = app.add_subcommand("evaluate", "score decisions or predictions against truth");
  evaluate->add_option("--decisions", evaluate_opts.decisions, "decisions CSV from detect");
  evaluate->add_option("--predictions", evaluate_opts.predictions, "predictions CSV");
  evaluate->add_option("--pairs", evaluate_opts.pairs, "ground-truth pairs CSV");
  evaluate->add_option("--manifest", evaluate_opts.manifest, "labelled manifest");
  add_profile_flag(*evaluate, evaluate_opts.profiles);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  CommandResult result;
  try {
    if (render->parsed()) {
      result = cmd_render(render_opts);
    } else if (embed->parsed()) {
      result = cmd_embed(embed_opts);
    } else if (calibrate->parsed()) {
      result = cmd_calibrate(calibrate_opts);
    } else if (detect->parsed()) {
      result = cmd_detect(detect_opts);
    } else if (classify->parsed()) {
      result = cmd_classify(classify_opts);
    } else {
      result = cmd_evaluate(evaluate_opts);
    }

    const auto text = result.report.serialize();
    if (report_path) {
      std::ofstream file(*report_path, std::ios::binary | std::ios::trunc);
      file << text;
      if (!file) {
        throw IoError("cannot write report " + report_path->string());
      }
    } else {
      out << text;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  for (const auto& f : result.report.failures) {
    err << "failed: " << f.id << ": " << f.message << "\n";
  }
  return result.exit_code;
}

}  // namespace wysiwim::cli
