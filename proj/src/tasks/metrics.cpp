#include <set>

#include "wysiwim/tasks.hpp"

namespace wysiwim::tasks {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Metrics Metrics::from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  Metrics m;
  m.true_positives = tp;
  m.false_positives = fp;
  m.true_negatives = tn;
  m.false_negatives = fn;
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  // Equals 2PR / (P + R) but is one correctly rounded division, so equal
  // F1 values compare equal.
  m.f1 = ratio(2 * tp, 2 * tp + fp + fn);
  m.accuracy = ratio(tp + tn, tp + fp + tn + fn);
  return m;
}

Metrics metrics_from_decisions(std::span<const std::pair<bool, bool>> predicted_actual) {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& [predicted, actual] : predicted_actual) {
    if (predicted) {
      (actual ? tp : fp)++;
    } else {
      (actual ? fn : tn)++;
    }
  }
  return Metrics::from_counts(tp, fp, tn, fn);
}

Metrics evaluate_pairs(std::span<const data::ClonePair> pairs, const PairScores& scores,
                       double threshold) {
  std::vector<std::pair<bool, bool>> decisions;
  decisions.reserve(pairs.size());
  for (const auto& pair : pairs) {
    auto it = scores.find({pair.id_a, pair.id_b});
    if (it == scores.end()) {
      it = scores.find({pair.id_b, pair.id_a});
    }
    if (it == scores.end()) {
      throw IngestionError("no score for pair (" + pair.id_a + ", " + pair.id_b + ")");
    }
    decisions.emplace_back(it->second >= threshold, pair.label);
  }
  return metrics_from_decisions(decisions);
}

ClassificationReport evaluate_classification(const std::map<std::string, std::string>& predictions,
                                             const std::map<std::string, std::string>& truth) {
  for (const auto& [id, _] : predictions) {
    if (!truth.contains(id)) {
      throw IngestionError("prediction for id '" + id + "' has no ground truth");
    }
  }
  for (const auto& [id, _] : truth) {
    if (!predictions.contains(id)) {
      throw IngestionError("no prediction for id '" + id + "'");
    }
  }

  std::set<std::string> labels;
  for (const auto& [id, label] : truth) labels.insert(label);
  for (const auto& [id, label] : predictions) labels.insert(label);

  ClassificationReport report;
  report.total = truth.size();
  for (const auto& [id, actual] : truth) {
    report.correct += predictions.at(id) == actual ? 1 : 0;
  }
  report.accuracy = ratio(report.correct, report.total);

  for (const auto& label : labels) {
    std::vector<std::pair<bool, bool>> decisions;
    decisions.reserve(truth.size());
    for (const auto& [id, actual] : truth) {
      decisions.emplace_back(predictions.at(id) == label, actual == label);
    }
    report.per_label.emplace(label, metrics_from_decisions(decisions));
  }
  return report;
}

}  // namespace wysiwim::tasks
