#include <algorithm>
#include <cmath>
#include <string>

#include "wysiwim/tasks.hpp"

namespace wysiwim::tasks {
namespace {

template <typename T>
void check_lengths(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw ShapeMismatchError("vector dimensions differ: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
  }
}

template <typename T>
double cosine(std::span<const T> a, std::span<const T> b) {
  check_lengths(a, b);
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = static_cast<double>(a[i]);
    const auto y = static_cast<double>(b[i]);
    dot += x * y;
    norm_a += x * x;
    norm_b += y * y;
  }
  if (norm_a == 0.0 || norm_b == 0.0) {
    throw UndefinedSimilarityError("cosine similarity is undefined for a zero vector");
  }
  // sqrt(n * n) == n exactly, so a vector scores exactly 1 against itself.
  double denom = std::sqrt(norm_a * norm_b);
  if (!std::isfinite(denom) || denom == 0.0) {
    denom = std::sqrt(norm_a) * std::sqrt(norm_b);
  }
  return std::clamp(dot / denom, -1.0, 1.0);
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  return cosine(a, b);
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  return cosine(a, b);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

CloneDecision detect_clone(std::span<const float> a, std::span<const float> b, double threshold) {
  const double score = cosine_similarity(a, b);
  return {score, score >= threshold};
}

CloneDecision detect_clone(std::span<const double> a, std::span<const double> b,
                           double threshold) {
  const double score = cosine_similarity(a, b);
  return {score, score >= threshold};
}

}  // namespace wysiwim::tasks
