// Runs every acceptance check and prints one PASS/FAIL line per check.
// `acceptance --update-golden` rewrites the micro-corpus golden report.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wysiwim/cache.hpp"
#include "wysiwim/cli.hpp"
#include "wysiwim/lexer.hpp"
#include "wysiwim/model.hpp"
#include "wysiwim/preprocess.hpp"
#include "wysiwim/profile.hpp"
#include "wysiwim/tasks.hpp"

using namespace wysiwim;
namespace fs = std::filesystem;

namespace {

// Thrown by expect() with the reason a check failed.
struct CheckFailed {
  std::string reason;
};

void expect(bool ok, const std::string& reason) {
  if (!ok) throw CheckFailed{reason};
}

int cli_run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  return cli::run(args, out, err);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string determinism() {
  const auto start = std::chrono::steady_clock::now();
  fixtures::TempDir dir;
  const auto snippets = fixtures::snippet_corpus();
  expect(snippets.size() == 50, "fixture corpus is not 50 snippets");
  const auto files = fixtures::write_corpus(dir.path(), snippets);
  const auto m = files.manifest.string();

  expect(cli_run({"render", "--manifest", m, "--out", (dir / "r1").string()}) == 0, "first render failed");
  expect(cli_run({"render", "--manifest", m, "--out", (dir / "r2").string(), "--workers", "8"}) == 0,
         "second render failed");
  for (const auto& s : snippets) {
    const auto name = s.id + ".png";
    expect(fixtures::read_bytes(dir / "r1" / name) == fixtures::read_bytes(dir / "r2" / name),
           "PNG differs for " + s.id);
  }

  expect(cli_run({"embed", "--manifest", m, "--out", (dir / "e1.wemb").string(), "--workers", "1"}) == 0,
         "embed with 1 worker failed");
  expect(cli_run({"embed", "--manifest", m, "--out", (dir / "e8.wemb").string(), "--workers", "8"}) == 0,
         "embed with 8 workers failed");
  expect(fixtures::read_bytes(dir / "e1.wemb") == fixtures::read_bytes(dir / "e8.wemb"), "caches differ");
  expect(embed::read_cache(dir / "e1.wemb").size() == 50, "cache does not hold 50 vectors");

  const double t = seconds_since(start);
  expect(t < 30.0, "took " + std::to_string(t) + " s");
  return "50 PNGs and caches identical, " + std::to_string(t) + " s";
}

std::string lexer_coverage() {
  const auto start = std::chrono::steady_clock::now();
  const render::ProfileRegistry profiles;
  std::mt19937_64 rng(1000);
  for (int i = 0; i < 1000; ++i) {
    const auto source = fixtures::random_ascii_source(rng, 400);
    const auto& profile = profiles.get(i % 2 == 0 ? "java" : "c");
    const auto spans = render::lex(source, profile);
    std::size_t at = 0;
    std::string rebuilt;
    for (const auto& s : spans) {
      expect(s.start == at, "gap or overlap at offset " + std::to_string(at) + " of source " + std::to_string(i));
      expect(s.end > s.start, "empty span in source " + std::to_string(i));
      rebuilt += source.substr(s.start, s.end - s.start);
      at = s.end;
    }
    expect(at == source.size(), "spans stop short in source " + std::to_string(i));
    expect(rebuilt == source, "reconstruction differs for source " + std::to_string(i));
  }
  const double t = seconds_since(start);
  expect(t < 10.0, "took " + std::to_string(t) + " s");
  return "1000 sources, " + std::to_string(t) + " s";
}

RasterImage random_image(std::mt19937_64& rng, int w, int h) {
  RasterImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.set_pixel(x, y, Rgb{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                              static_cast<std::uint8_t>(rng())});
    }
  }
  return img;
}

std::string math_kernels() {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(-10.0, 10.0);

  for (int i = 0; i < 500; ++i) {
    std::vector<double> a(1 + static_cast<std::size_t>(rng() % 512));
    std::vector<double> b(a.size());
    for (auto& v : a) v = u(rng);
    for (auto& v : b) v = u(rng);
    const double got = tasks::cosine_similarity(a, b);
    const auto want = static_cast<double>(oracle::cosine(a, b));
    expect(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)), "cosine off in case " + std::to_string(i));
  }

  std::uniform_int_distribution<int> side(1, 48);
  for (int i = 0; i < 200; ++i) {
    const auto img = random_image(rng, side(rng), side(rng));
    const int w = side(rng);
    const int h = side(rng);
    expect(preprocess::resize_bilinear(img, w, h) == oracle::resize(img, w, h),
           "resize differs in case " + std::to_string(i));
  }

  for (int i = 0; i < 50; ++i) {
    const auto img = random_image(rng, side(rng), side(rng));
    const preprocess::ChannelTriple mean{u(rng) / 20 + 0.5, u(rng) / 20 + 0.5, u(rng) / 20 + 0.5};
    const preprocess::ChannelTriple sd{0.1 + std::abs(u(rng)) / 20, 0.1 + std::abs(u(rng)) / 20,
                                       0.1 + std::abs(u(rng)) / 20};
    const auto t = preprocess::normalize(img, mean, sd);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
          const Rgb p = img.pixel(x, y);
          const double raw = c == 0 ? p.r : c == 1 ? p.g : p.b;
          expect(t.at(c, y, x) == (raw / 255.0 - mean[c]) / sd[c], "normalize differs in case " + std::to_string(i));
        }
      }
    }
  }

  for (int i = 0; i < 50; ++i) {
    const int h = 8 * (1 + static_cast<int>(rng() % 28));
    const int w = 8 * (1 + static_cast<int>(rng() % 28));
    preprocess::InputTensor t(h, w);
    for (auto& v : t.values) v = u(rng);
    const auto got = embed::PatchMeanExtractor::embed_one(t);
    const auto want = oracle::patch_mean(t);
    expect(got.size() == want.size(), "patch-mean dimension differs");
    for (std::size_t k = 0; k < got.size(); ++k) {
      expect(std::abs(got[k] - want[k]) <= 1e-12 * std::max(1.0, std::abs(want[k])),
             "patch-mean off in case " + std::to_string(i));
    }
  }
  return "cosine 500, resize 200, normalize 50, patch-mean 50";
}

std::string knn_equivalence() {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> coord(-4, 4);
  for (int i = 0; i < 200; ++i) {
    const auto metric = i % 2 == 0 ? tasks::DistanceMetric::euclidean : tasks::DistanceMetric::cosine;
    const std::size_t dim = 1 + rng() % 8;
    const std::size_t n = 1 + rng() % 100;
    const std::size_t k = 1 + rng() % std::min<std::size_t>(9, n);
    auto random_point = [&] {
      std::vector<double> v(dim);
      do {
        for (auto& x : v) x = coord(rng);
      } while (std::all_of(v.begin(), v.end(), [](double x) { return x == 0; }));
      return v;
    };
    std::vector<tasks::IndexEntry> entries;
    for (std::size_t j = 0; j < n; ++j) {
      entries.push_back({"e" + std::to_string(rng() % 100000) + "_" + std::to_string(j),
                         std::string(1, static_cast<char>('a' + rng() % 5)), random_point()});
    }
    const auto q = random_point();
    const tasks::NeighborIndex index(entries, metric);
    expect(tasks::knn_classify(index, q, k) == oracle::knn(entries, metric, q, k),
           "disagreement in instance " + std::to_string(i));
  }
  return "200/200 instances agree";
}

std::string calibration_optimality() {
  std::mt19937_64 rng(777);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + rng() % 60;
    std::vector<tasks::ScoredLabel> scored;
    std::uniform_int_distribution<int> level(0, i % 3 == 0 ? 5 : 10000);
    for (std::size_t j = 0; j < n; ++j) {
      scored.push_back({level(rng) / 5000.0 - 1.0, (rng() & 1U) != 0});
    }
    scored[0].label = true;
    scored[1].label = false;
    const auto c = tasks::calibrate_threshold(scored);
    for (double cand : oracle::candidate_thresholds(scored)) {
      expect(c.f1 >= oracle::f1_at(scored, cand), "better candidate exists in set " + std::to_string(i));
    }
    // Re-deciding at the returned threshold reproduces the returned F1.
    std::vector<std::pair<bool, bool>> decisions;
    for (const auto& s : scored) decisions.emplace_back(s.score >= c.threshold, s.label);
    expect(tasks::metrics_from_decisions(decisions).f1 == c.f1, "detect disagrees in set " + std::to_string(i));
  }
  return "100 sets optimal and self-consistent";
}

std::string micro_corpus_e2e(bool update_golden) {
  fixtures::TempDir dir;
  const auto corpus = fixtures::micro_corpus();
  const auto files = fixtures::write_corpus(dir.path(), corpus.snippets, corpus.pairs);
  const auto m = files.manifest.string();
  const auto cache = (dir / "c.wemb").string();

  expect(cli_run({"embed", "--manifest", m, "--out", cache}) == 0, "embed failed");
  expect(cli_run({"calibrate", "--cache", cache, "--pairs", files.pairs.string(), "--out",
                  (dir / "t.json").string()}) == 0,
         "calibrate failed");
  const auto report_path = (dir / "detect.json").string();
  expect(cli_run({"--report", report_path, "detect", "--cache", cache, "--pairs", files.pairs.string(),
                  "--threshold", (dir / "t.json").string(), "--out", (dir / "d.csv").string()}) == 0,
         "detect failed");
  const auto report = nlohmann::json::parse(fixtures::read_text(report_path));
  const auto& metrics = report["metrics"];
  expect(metrics.is_object() && metrics["true_positives"].get<int>() + metrics["false_positives"].get<int>() +
                                        metrics["true_negatives"].get<int>() +
                                        metrics["false_negatives"].get<int>() ==
                                    40,
         "metrics do not cover 40 pairs");

  std::map<std::string, std::string> text;
  for (const auto& s : corpus.snippets) text[s.id] = s.text;
  std::istringstream csv(fixtures::read_text(dir / "d.csv"));
  std::string line;
  std::getline(csv, line);
  int identical = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    if (text.at(f[0]) == text.at(f[1])) {
      ++identical;
      expect(f[2] == "1", "identical pair " + f[0] + "," + f[1] + " scored " + f[2]);
    }
  }
  expect(identical > 0, "no byte-identical pairs in the corpus");

  const auto threshold = nlohmann::json::parse(fixtures::read_text(dir / "t.json"));
  const nlohmann::json summary = {{"pairs", 40},
                                  {"identical_text_pairs", identical},
                                  {"threshold", threshold["threshold"]},
                                  {"f1", metrics["f1"]},
                                  {"metrics", metrics}};
  const fs::path golden = fs::path(WYSIWIM_GOLDEN_DIR) / "micro_corpus_report.json";
  if (update_golden) {
    fs::create_directories(golden.parent_path());
    std::ofstream(golden) << summary.dump(2) << "\n";
  }
  expect(fs::exists(golden), "golden report missing; rerun with --update-golden");
  const auto expected = nlohmann::json::parse(fixtures::read_text(golden));
  expect(expected == summary, "differs from golden report");
  std::ostringstream msg;
  msg << "F1 " << metrics["f1"].get<double>() << ", " << identical << " identical pairs at 1.0";
  return msg.str();
}

}  // namespace

int main(int argc, char** argv) {
  const bool update_golden = argc > 1 && std::string(argv[1]) == "--update-golden";
  const std::vector<std::pair<std::string, std::function<std::string()>>> checks = {
      {"determinism", determinism},
      {"lexer-coverage", lexer_coverage},
      {"math-kernel-oracles", math_kernels},
      {"knn-equivalence", knn_equivalence},
      {"calibration-optimality", calibration_optimality},
      {"micro-corpus-end-to-end", [&] { return micro_corpus_e2e(update_golden); }},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    try {
      std::cout << "PASS " << name << ": " << check() << std::endl;
    } catch (const CheckFailed& e) {
      ++failed;
      std::cout << "FAIL " << name << ": " << e.reason << std::endl;
    } catch (const std::exception& e) {
      ++failed;
      std::cout << "FAIL " << name << ": " << e.what() << std::endl;
    }
  }
  return failed == 0 ? 0 : 1;
}
