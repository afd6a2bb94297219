#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wysiwim/corpus.hpp"
#include "wysiwim/error.hpp"

namespace wysiwim::tasks {

// Cosine similarity is undefined when either vector is all zeros.
class UndefinedSimilarityError : public Error {
 public:
  using Error::Error;
};

// dot(a, b) / (|a| |b|) accumulated in double and clamped to [-1, 1].
// Throws ShapeMismatchError on unequal lengths.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(std::span<const float> a, std::span<const float> b);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

struct CloneDecision {
  double score = 0.0;
  bool is_clone = false;
};

// score >= threshold is a clone (inclusive).
CloneDecision detect_clone(std::span<const float> a, std::span<const float> b, double threshold);
CloneDecision detect_clone(std::span<const double> a, std::span<const double> b,
                           double threshold);

struct ScoredLabel {
  double score = 0.0;
  bool label = false;
};

struct Calibration {
  double threshold = 0.0;
  double f1 = 0.0;
};

// Picks the F1-maximising threshold for the rule score >= t. Candidates are
// the midpoints between consecutive distinct scores plus one sentinel below
// the minimum and one above the maximum; F1 ties go to the smallest
// threshold. Throws ConfigError unless both labels are present.
Calibration calibrate_threshold(std::span<const ScoredLabel> scored);

// Confusion counts with derived rates. Empty denominators give 0.
struct Metrics {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t true_negatives = 0;
  std::size_t false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;

  std::size_t total() const noexcept {
    return true_positives + false_positives + true_negatives + false_negatives;
  }

  static Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);
};

// Metrics of (predicted, actual) decisions.
Metrics metrics_from_decisions(std::span<const std::pair<bool, bool>> predicted_actual);

// Scores keyed by (id_a, id_b); the reversed key is accepted as well.
using PairScores = std::map<std::pair<std::string, std::string>, double>;

// Throws IngestionError naming the first pair without a score.
Metrics evaluate_pairs(std::span<const data::ClonePair> pairs, const PairScores& scores,
                       double threshold);

struct ClassificationReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  // One-vs-rest metrics for every label seen in truth or predictions.
  std::map<std::string, Metrics> per_label;
};

// Throws IngestionError when the id sets differ.
ClassificationReport evaluate_classification(const std::map<std::string, std::string>& predictions,
                                             const std::map<std::string, std::string>& truth);

enum class DistanceMetric { cosine, euclidean };

std::string_view to_string(DistanceMetric metric) noexcept;

struct IndexEntry {
  std::string id;
  std::string label;
  std::vector<double> values;
};

// Labelled vectors for exact k-nearest-neighbour queries. Immutable after
// construction; queries are safe from any number of threads.
class NeighborIndex {
 public:
  // Throws ConfigError on empty labels or repeated ids and ShapeMismatchError
  // when dimensions differ.
  NeighborIndex(std::vector<IndexEntry> entries, DistanceMetric metric);

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  DistanceMetric metric() const noexcept { return metric_; }
  const std::vector<IndexEntry>& entries() const noexcept { return entries_; }

  // cosine: 1 - cosine_similarity; euclidean: L2 distance.
  double distance(std::span<const double> a, std::span<const double> b) const;

 private:
  std::vector<IndexEntry> entries_;
  DistanceMetric metric_;
  std::size_t dimension_ = 0;
};

// Majority label among the k nearest entries. Entries at equal distance are
// ordered by ascending id; a tied vote goes to the label whose nearest
// member is closest, then to the lexicographically smallest label.
std::string knn_classify(const NeighborIndex& index, std::span<const double> query, std::size_t k);

}  // namespace wysiwim::tasks
