#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "wysiwim/cache.hpp"
#include "wysiwim/cli.hpp"
#include "wysiwim/corpus.hpp"
#include "wysiwim/error.hpp"
#include "wysiwim/model.hpp"
#include "wysiwim/pipeline.hpp"
#include "wysiwim/png_io.hpp"
#include "wysiwim/tasks.hpp"

namespace wysiwim::cli {
namespace {

using Clock = std::chrono::steady_clock;
using VectorMap = std::map<std::string, std::vector<float>, std::less<>>;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

render::ProfileRegistry make_registry(const std::vector<path>& profile_files) {
  render::ProfileRegistry registry;
  for (const auto& file : profile_files) {
    registry.add(render::load_profile(file));
  }
  return registry;
}

nlohmann::json profile_paths(const std::vector<path>& files) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& f : files) out.push_back(f.string());
  return out;
}

void add_profile_inputs(RunReport& report, const std::vector<path>& files) {
  for (std::size_t i = 0; i < files.size(); ++i) {
    report.add_input("profile_" + std::to_string(i), files[i]);
  }
}

VectorMap load_vectors(const path& cache_path) {
  VectorMap out;
  for (auto& v : embed::read_cache(cache_path)) {
    out.emplace(std::move(v.id), std::move(v.values));
  }
  return out;
}

std::set<std::string, std::less<>> key_set(const VectorMap& vectors) {
  std::set<std::string, std::less<>> ids;
  for (const auto& [id, _] : vectors) ids.insert(id);
  return ids;
}

void ensure_parent(const path& file) {
  const auto parent = file.parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent)) {
    throw IoError("output directory " + parent.string() + " does not exist");
  }
}

std::ofstream open_output(const path& file) {
  ensure_parent(file);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + file.string() + " for writing");
  }
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

std::string format_score(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool safe_file_stem(std::string_view id) {
  return !id.empty() && id != "." && id != ".." &&
         id.find_first_of(std::string_view("/\\\0", 3)) == std::string_view::npos;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
}

struct ScoredPairs {
  std::vector<data::ClonePair> pairs;
  std::vector<double> scores;
  std::vector<embed::ItemFailure> failures;
};

std::string pair_name(const data::ClonePair& p) { return p.id_a + "|" + p.id_b; }

ScoredPairs score_pairs(const VectorMap& vectors, const data::ClonePairList& pairs) {
  ScoredPairs out;
  for (const auto& pair : pairs) {
    const auto a = vectors.find(pair.id_a);
    const auto b = vectors.find(pair.id_b);
    if (a == vectors.end() || b == vectors.end()) {
      const auto& missing = a == vectors.end() ? pair.id_a : pair.id_b;
      out.failures.push_back({pair_name(pair), "no embedding for id '" + missing + "'"});
      continue;
    }
    try {
      out.scores.push_back(tasks::cosine_similarity(std::span<const float>(a->second),
                                                    std::span<const float>(b->second)));
      out.pairs.push_back(pair);
    } catch (const Error& e) {
      out.failures.push_back({pair_name(pair), e.what()});
    }
  }
  return out;
}

data::ClonePairList load_pair_file(const path& pairs_path, const std::optional<path>& manifest_path,
                                   const std::vector<path>& profiles, const VectorMap& vectors) {
  if (manifest_path) {
    const auto registry = make_registry(profiles);
    return data::load_pairs(pairs_path, data::load_manifest(*manifest_path, registry));
  }
  return data::load_pairs(pairs_path, key_set(vectors));
}

double resolve_threshold(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc() && ptr == last && std::isfinite(value)) {
    return value;
  }
  std::ifstream in(text);
  if (!in) {
    throw ConfigError("--threshold '" + text + "' is neither a number nor a readable file");
  }
  try {
    const auto doc = nlohmann::json::parse(in);
    return doc.at("threshold").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("threshold file " + text + ": " + e.what());
  }
}

std::map<std::string, std::string> manifest_labels(const data::CorpusManifest& manifest) {
  std::map<std::string, std::string> labels;
  for (const auto& e : manifest.entries) {
    if (e.label) labels.emplace(e.id, *e.label);
  }
  return labels;
}

std::vector<std::vector<std::string>> read_csv(const path& file,
                                               const std::vector<std::string>& required) {
  std::ifstream in(file);
  if (!in) {
    throw IoError("cannot open " + file.string());
  }
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::vector<std::size_t> columns;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = data::split_csv_line(line);
    if (columns.empty()) {
      for (const auto& name : required) {
        const auto it = std::find(fields.begin(), fields.end(), name);
        if (it == fields.end()) {
          throw IngestionError(file.string() + ":" + std::to_string(line_no) +
                               ": header lacks column '" + name + "'");
        }
        columns.push_back(static_cast<std::size_t>(it - fields.begin()));
      }
      continue;
    }
    std::vector<std::string> row;
    for (std::size_t c : columns) {
      if (c >= fields.size()) {
        throw IngestionError(file.string() + ":" + std::to_string(line_no) + ": missing fields");
      }
      row.push_back(fields[c]);
    }
    rows.push_back(std::move(row));
  }
  if (columns.empty()) {
    throw IngestionError(file.string() + ":1: missing header");
  }
  return rows;
}

}  // namespace

render::RenderConfig ViewOptions::config() const {
  render::RenderConfig cfg;
  const auto v = render::variant_from_string(variant);
  if (!v) {
    throw ConfigError("unknown variant '" + variant + "' (expected plain, keyword or syntax)");
  }
  cfg.variant = *v;
  cfg.canvas_width = width;
  cfg.canvas_height = height;
  cfg.cell_width = cell_width;
  cfg.cell_height = cell_height;
  cfg.tab_width = tab_width;
  cfg.validate();
  return cfg;
}

nlohmann::json ViewOptions::to_json() const {
  return {{"variant", std::string(render::to_string(config().variant))},
          {"width", width},
          {"height", height},
          {"cell_width", cell_width},
          {"cell_height", cell_height},
          {"tab_width", tab_width}};
}

void seeded_shuffle(std::vector<std::string>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

CommandResult cmd_render(const RenderOptions& options) {
  const auto start = Clock::now();
  CommandResult result;
  RunReport& report = result.report;
  report.command = "render";

  const auto config = options.view.config();
  const auto registry = make_registry(options.profiles);
  const auto manifest = data::load_manifest(options.manifest, registry);
  report.add_input("manifest", options.manifest);
  add_profile_inputs(report, options.profiles);
  report.parameters = options.view.to_json();
  report.parameters["profiles"] = profile_paths(options.profiles);

  std::filesystem::create_directories(options.out);

  const std::size_t n = manifest.size();
  std::vector<std::optional<std::string>> digests(n);
  std::vector<std::optional<std::string>> errors(n);
  parallel_for(n, options.workers, [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    try {
      if (!safe_file_stem(entry.id)) {
        throw ConfigError("id '" + entry.id + "' cannot be used as a file name");
      }
      const auto source = embed::read_text_file(entry.path);
      const auto image = render::render(source, registry.get(entry.language), config);
      const auto png = render::encode_png(image);
      const path file = options.out / (entry.id + ".png");
      std::ofstream out(file, std::ios::binary | std::ios::trunc);
      out.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
      if (!out) {
        throw IoError("failed writing " + file.string());
      }
      digests[i] = sha256_hex(png);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  nlohmann::json images = nlohmann::json::object();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = manifest.entries[i].id;
    if (digests[i]) {
      images[id] = *digests[i];
    } else {
      report.failures.push_back({id, *errors[i]});
    }
  }
  std::sort(report.failures.begin(), report.failures.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  report.outputs = {{"directory", options.out.string()}, {"count", images.size()}, {"images", images}};
  result.exit_code = report.failures.empty() ? kSuccess : kItemFailures;
  report.wall_time_seconds = seconds_since(start);
  return result;
}

CommandResult cmd_embed(const EmbedOptions& options) {
  const auto start = Clock::now();
  CommandResult result;
  RunReport& report = result.report;
  report.command = "embed";

  const auto config = options.view.config();
  const auto model = options.model_descriptor
                         ? embed::load_model(*options.model_descriptor, options.batch_size)
                         : embed::make_model(embed::ModelDescriptor{}, options.batch_size);
  const auto registry = make_registry(options.profiles);
  const auto manifest = data::load_manifest(options.manifest, registry);
  report.add_input("manifest", options.manifest);
  if (options.model_descriptor) {
    report.add_input("model_descriptor", *options.model_descriptor);
    if (const auto& graph = model.descriptor().graph_path) {
      report.add_input("graph", *graph);
    }
  }
  add_profile_inputs(report, options.profiles);
  report.parameters = options.view.to_json();
  report.parameters["profiles"] = profile_paths(options.profiles);
  report.parameters["backend"] = std::string(embed::to_string(model.descriptor().backend));
  report.parameters["batch_size"] = model.batch_size();
  report.parameters["embedding_dim"] = model.descriptor().embedding_dim;

  ensure_parent(options.out);
  auto corpus = embed::embed_corpus(model, manifest, registry, config, options.workers);
  embed::write_cache(corpus.vectors, options.out);

  report.failures = std::move(corpus.failures);
  report.outputs = {{"cache", options.out.string()},
                    {"count", corpus.vectors.size()},
                    {"dim", corpus.vectors.empty() ? 0 : model.descriptor().embedding_dim},
                    {"sha256", sha256_file(options.out)}};
  result.exit_code = report.failures.empty() ? kSuccess : kItemFailures;
  report.wall_time_seconds = seconds_since(start);
  return result;
}

CommandResult cmd_calibrate(const CalibrateOptions& options) {
  const auto start = Clock::now();
  CommandResult result;
  RunReport& report = result.report;
  report.command = "calibrate";

  const auto vectors = load_vectors(options.cache);
  const auto pairs = load_pair_file(options.pairs, options.manifest, options.profiles, vectors);
  report.add_input("cache", options.cache);
  report.add_input("pairs", options.pairs);
  if (options.manifest) report.add_input("manifest", *options.manifest);
  report.parameters = {{"score", "cosine"}, {"rule", "score >= threshold"}};

  auto scored = score_pairs(vectors, pairs);
  std::vector<tasks::ScoredLabel> labelled;
  for (std::size_t i = 0; i < scored.pairs.size(); ++i) {
    labelled.push_back({scored.scores[i], scored.pairs[i].label});
  }
  const auto calibration = tasks::calibrate_threshold(labelled);

  tasks::PairScores scores;
  for (std::size_t i = 0; i < scored.pairs.size(); ++i) {
    scores[{scored.pairs[i].id_a, scored.pairs[i].id_b}] = scored.scores[i];
  }
  const auto metrics = tasks::evaluate_pairs(scored.pairs, scores, calibration.threshold);

  const nlohmann::json threshold_doc = {{"threshold", calibration.threshold},
                                        {"f1", calibration.f1},
                                        {"pairs", scored.pairs.size()},
                                        {"score", "cosine"}};
  open_output(options.out) << threshold_doc.dump(2) << "\n";

  report.failures = std::move(scored.failures);
  report.metrics = to_json(metrics);
  report.outputs = {{"threshold_file", options.out.string()},
                    {"threshold", calibration.threshold},
                    {"f1", calibration.f1},
                    {"pairs_scored", scored.pairs.size()}};
  result.exit_code = report.failures.empty() ? kSuccess : kItemFailures;
  report.wall_time_seconds = seconds_since(start);
  return result;
}

CommandResult cmd_detect(const DetectOptions& options) {
  const auto start = Clock::now();
  CommandResult result;
  RunReport& report = result.report;
  report.command = "detect";

  const double threshold = resolve_threshold(options.threshold);
  const auto vectors = load_vectors(options.cache);
  const auto pairs = load_pair_file(options.pairs, options.manifest, options.profiles, vectors);
  report.add_input("cache", options.cache);
  report.add_input("pairs", options.pairs);
  if (options.manifest) report.add_input("manifest", *options.manifest);
  if (std::filesystem::is_regular_file(options.threshold)) {
    report.add_input("threshold_file", options.threshold);
  }
  report.parameters = {{"threshold", threshold}, {"score", "cosine"}};

  auto scored = score_pairs(vectors, pairs);
  std::vector<std::pair<bool, bool>> decisions;
  std::ostringstream csv;
  csv << "id_a,id_b,score,is_clone,label\n";
  for (std::size_t i = 0; i < scored.pairs.size(); ++i) {
    const auto& p = scored.pairs[i];
    const bool is_clone = scored.scores[i] >= threshold;
    decisions.emplace_back(is_clone, p.label);
    csv << csv_field(p.id_a) << ',' << csv_field(p.id_b) << ',' << format_score(scored.scores[i])
        << ',' << (is_clone ? 1 : 0) << ',' << (p.label ? 1 : 0) << '\n';
  }
  open_output(options.out) << csv.str();

  report.failures = std::move(scored.failures);
  report.metrics = to_json(tasks::metrics_from_decisions(decisions));
  report.outputs = {{"decisions", options.out.string()}, {"pairs_scored", scored.pairs.size()}};
  result.exit_code = report.failures.empty() ? kSuccess : kItemFailures;
  report.wall_time_seconds = seconds_since(start);
  return result;
}

CommandResult cmd_classify(const ClassifyOptions& options) {
  const auto start = Clock::now();
  CommandResult result;
  RunReport& report = result.report;
  report.command = "classify";

  tasks::DistanceMetric metric;
  if (options.metric == "cosine") {
    metric = tasks::DistanceMetric::cosine;
  } else if (options.metric == "euclidean") {
    metric = tasks::DistanceMetric::euclidean;
  } else {
    throw ConfigError("unknown metric '" + options.metric + "' (expected cosine or euclidean)");
  }
  if (options.k <= 0) {
    throw ConfigError("--k must be positive");
  }
  if (!options.test_cache && !(options.test_fraction > 0.0 && options.test_fraction < 1.0)) {
    throw ConfigError("--test-fraction must lie strictly between 0 and 1");
  }

  const auto registry = make_registry(options.profiles);
  const auto manifest = data::load_manifest(options.manifest, registry);
  const auto labels = manifest_labels(manifest);
  const auto train_vectors = load_vectors(options.cache);
  report.add_input("manifest", options.manifest);
  report.add_input("cache", options.cache);

  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  VectorMap test_vectors;
  if (options.test_cache) {
    report.add_input("test_cache", *options.test_cache);
    test_vectors = load_vectors(*options.test_cache);
    for (const auto& [id, _] : train_vectors) {
      if (labels.contains(id)) train_ids.push_back(id);
    }
    for (const auto& [id, _] : test_vectors) test_ids.push_back(id);
  } else {
    std::vector<std::string> labelled;
    for (const auto& [id, _] : train_vectors) {
      if (labels.contains(id)) labelled.push_back(id);
    }
    if (labelled.size() < 2) {
      throw ConfigError("need at least two labelled embeddings to split train/test");
    }
    seeded_shuffle(labelled, options.seed);
    const auto n = static_cast<double>(labelled.size());
    const auto n_test = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(options.test_fraction * n)), 1, labelled.size() - 1);
    test_ids.assign(labelled.begin(), labelled.begin() + static_cast<std::ptrdiff_t>(n_test));
    train_ids.assign(labelled.begin() + static_cast<std::ptrdiff_t>(n_test), labelled.end());
    std::sort(test_ids.begin(), test_ids.end());
    std::sort(train_ids.begin(), train_ids.end());
    test_vectors = train_vectors;
  }
  if (static_cast<std::size_t>(options.k) > train_ids.size()) {
    throw ConfigError("--k " + std::to_string(options.k) + " exceeds the " +
                      std::to_string(train_ids.size()) + " labelled training embeddings");
  }

  std::vector<tasks::IndexEntry> entries;
  for (const auto& id : train_ids) {
    const auto& v = train_vectors.at(id);
    entries.push_back({id, labels.at(id), std::vector<double>(v.begin(), v.end())});
  }
  const tasks::NeighborIndex index(std::move(entries), metric);

  std::map<std::string, std::string> predictions;
  std::map<std::string, std::string> truth;
  for (const auto& id : test_ids) {
    const auto& v = test_vectors.at(id);
    const std::vector<double> query(v.begin(), v.end());
    try {
      predictions[id] = tasks::knn_classify(index, query, static_cast<std::size_t>(options.k));
      if (auto it = labels.find(id); it != labels.end()) truth[id] = it->second;
    } catch (const Error& e) {
      report.failures.push_back({id, e.what()});
    }
  }

  std::ostringstream csv;
  csv << "id,label\n";
  for (const auto& [id, label] : predictions) {
    csv << csv_field(id) << ',' << csv_field(label) << '\n';
  }
  open_output(options.out) << csv.str();

  std::map<std::string, std::string> scored_predictions;
  for (const auto& [id, _] : truth) scored_predictions[id] = predictions.at(id);
  if (!truth.empty()) {
    report.metrics = to_json(tasks::evaluate_classification(scored_predictions, truth));
  }
  report.parameters = {{"k", options.k},
                       {"metric", std::string(tasks::to_string(metric))},
                       {"seed", options.seed},
                       {"split", options.test_cache ? "test-cache" : "seeded"},
                       {"test_fraction", options.test_fraction}};
  report.outputs = {{"predictions", options.out.string()},
                    {"train_size", train_ids.size()},
                    {"test_size", test_ids.size()},
                    {"predicted", predictions.size()}};
  result.exit_code = report.failures.empty() ? kSuccess : kItemFailures;
  report.wall_time_seconds = seconds_since(start);
  return result;
}

CommandResult cmd_evaluate(const EvaluateOptions& options) {
  const auto start = Clock::now();
  CommandResult result;
  RunReport& report = result.report;
  report.command = "evaluate";

  if (options.decisions.has_value() == options.predictions.has_value()) {
    throw ConfigError("evaluate needs exactly one of --decisions or --predictions");
  }

  if (options.decisions) {
    if (!options.pairs) {
      throw ConfigError("evaluating decisions needs the ground-truth --pairs file");
    }
    const auto rows = read_csv(*options.decisions, {"id_a", "id_b", "is_clone"});
    std::map<std::pair<std::string, std::string>, bool> decided;
    std::set<std::string, std::less<>> ids;
    for (const auto& row : rows) {
      if (row[2] != "0" && row[2] != "1") {
        throw IngestionError(options.decisions->string() + ": is_clone must be 0 or 1");
      }
      decided[std::minmax(row[0], row[1])] = row[2] == "1";
      ids.insert(row[0]);
      ids.insert(row[1]);
    }
    const auto pairs = options.manifest
                           ? data::load_pairs(*options.pairs,
                                              data::load_manifest(*options.manifest,
                                                                  make_registry(options.profiles)))
                           : data::load_pairs(*options.pairs, ids);
    std::vector<std::pair<bool, bool>> decisions;
    for (const auto& pair : pairs) {
      const auto it = decided.find(std::minmax(pair.id_a, pair.id_b));
      if (it == decided.end()) {
        throw IngestionError("no decision for pair (" + pair.id_a + ", " + pair.id_b + ")");
      }
      decisions.emplace_back(it->second, pair.label);
    }
    report.add_input("decisions", *options.decisions);
    report.add_input("pairs", *options.pairs);
    report.metrics = to_json(tasks::metrics_from_decisions(decisions));
    report.outputs = {{"pairs_evaluated", decisions.size()}};
  } else {
    if (!options.manifest) {
      throw ConfigError("evaluating predictions needs the labelled --manifest");
    }
    const auto manifest = data::load_manifest(*options.manifest, make_registry(options.profiles));
    const auto labels = manifest_labels(manifest);
    std::map<std::string, std::string> predictions;
    std::map<std::string, std::string> truth;
    for (const auto& row : read_csv(*options.predictions, {"id", "label"})) {
      const auto it = labels.find(row[0]);
      if (it == labels.end()) {
        throw IngestionError("prediction for '" + row[0] + "' has no labelled manifest entry");
      }
      predictions[row[0]] = row[1];
      truth[row[0]] = it->second;
    }
    report.add_input("predictions", *options.predictions);
    report.add_input("manifest", *options.manifest);
    report.metrics = to_json(tasks::evaluate_classification(predictions, truth));
    report.outputs = {{"predictions_evaluated", predictions.size()}};
  }
  result.exit_code = kSuccess;
  report.wall_time_seconds = seconds_since(start);
  return result;
}

}  // namespace wysiwim::cli
