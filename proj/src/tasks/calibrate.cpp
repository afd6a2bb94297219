#include <algorithm>
#include <cmath>
#include <limits>

#include "wysiwim/tasks.hpp"

namespace wysiwim::tasks {

Calibration calibrate_threshold(std::span<const ScoredLabel> scored) {
  std::size_t positives = 0;
  for (const auto& s : scored) {
    if (!std::isfinite(s.score)) {
      throw ConfigError("calibration scores must be finite");
    }
    positives += s.label ? 1 : 0;
  }
  if (positives == 0 || positives == scored.size()) {
    throw ConfigError("calibration needs at least one positive and one negative pair");
  }

  std::vector<ScoredLabel> sorted(scored.begin(), scored.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& x, const ScoredLabel& y) { return x.score < y.score; });

  // Sweep thresholds upwards. Before the sweep every pair is predicted a
  // clone (low sentinel); each group of equal scores then drops out.
  std::size_t tp = positives;
  std::size_t fp = sorted.size() - positives;
  auto f1_now = [&] {
    return Metrics::from_counts(tp, fp, 0, positives - tp).f1;
  };

  const double lowest = sorted.front().score;
  double low_sentinel = lowest - 1.0;
  if (!(low_sentinel < lowest)) {
    low_sentinel = std::nextafter(lowest, -std::numeric_limits<double>::infinity());
  }
  Calibration best{low_sentinel, f1_now()};

  std::size_t i = 0;
  while (i < sorted.size()) {
    const double value = sorted[i].score;
    while (i < sorted.size() && sorted[i].score == value) {
      if (sorted[i].label) {
        --tp;
      } else {
        --fp;
      }
      ++i;
    }
    double candidate;
    if (i < sorted.size()) {
      const double next = sorted[i].score;
      candidate = value / 2.0 + next / 2.0;
      // Adjacent doubles: the midpoint can round onto the lower score.
      if (!(candidate > value)) {
        candidate = next;
      }
    } else {
      candidate = value + 1.0;
      if (!(candidate > value)) {
        candidate = std::nextafter(value, std::numeric_limits<double>::infinity());
      }
    }
    const double f1 = f1_now();
    if (f1 > best.f1) {
      best = {candidate, f1};
    }
  }
  return best;
}

}  // namespace wysiwim::tasks
