#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "wysiwim/tasks.hpp"

namespace wysiwim::tasks {
namespace {

struct Neighbor {
  double distance;
  const IndexEntry* entry;
};

bool nearer(const Neighbor& x, const Neighbor& y) {
  if (x.distance != y.distance) return x.distance < y.distance;
  return x.entry->id < y.entry->id;
}

}  // namespace

std::string_view to_string(DistanceMetric metric) noexcept {
  return metric == DistanceMetric::cosine ? "cosine" : "euclidean";
}

NeighborIndex::NeighborIndex(std::vector<IndexEntry> entries, DistanceMetric metric)
    : entries_(std::move(entries)), metric_(metric) {
  std::set<std::string_view> seen;
  for (const auto& e : entries_) {
    if (e.label.empty()) {
      throw ConfigError("index entry '" + e.id + "' has an empty label");
    }
    if (!seen.insert(e.id).second) {
      throw ConfigError("duplicate index id '" + e.id + "'");
    }
    if (&e == &entries_.front()) {
      dimension_ = e.values.size();
    } else if (e.values.size() != dimension_) {
      throw ShapeMismatchError("index entry '" + e.id + "' has dimension " +
                               std::to_string(e.values.size()) + ", expected " +
                               std::to_string(dimension_));
    }
  }
}

double NeighborIndex::distance(std::span<const double> a, std::span<const double> b) const {
  if (metric_ == DistanceMetric::cosine) {
    return 1.0 - cosine_similarity(a, b);
  }
  return euclidean_distance(a, b);
}

std::string knn_classify(const NeighborIndex& index, std::span<const double> query, std::size_t k) {
  if (index.size() == 0) {
    throw ConfigError("cannot classify against an empty index");
  }
  if (k == 0 || k > index.size()) {
    throw ConfigError("k must be in [1, " + std::to_string(index.size()) + "], got " +
                      std::to_string(k));
  }
  if (query.size() != index.dimension()) {
    throw ShapeMismatchError("query has dimension " + std::to_string(query.size()) +
                             ", index has " + std::to_string(index.dimension()));
  }

  std::vector<Neighbor> neighbors;
  neighbors.reserve(index.size());
  for (const auto& entry : index.entries()) {
    neighbors.push_back({index.distance(query, entry.values), &entry});
  }
  std::partial_sort(neighbors.begin(), neighbors.begin() + static_cast<std::ptrdiff_t>(k),
                    neighbors.end(), nearer);

  struct Vote {
    std::size_t count = 0;
    double nearest = 0.0;
  };
  std::map<std::string_view, Vote> votes;
  for (std::size_t i = 0; i < k; ++i) {
    auto [it, inserted] = votes.try_emplace(neighbors[i].entry->label);
    if (inserted) {
      it->second.nearest = neighbors[i].distance;
    }
    ++it->second.count;
  }

  // Map iteration is label-ordered, so strict comparisons keep the smallest
  // label on a full tie.
  auto best = votes.begin();
  for (auto it = std::next(votes.begin()); it != votes.end(); ++it) {
    const Vote& v = it->second;
    const Vote& b = best->second;
    if (v.count > b.count || (v.count == b.count && v.nearest < b.nearest)) {
      best = it;
    }
  }
  return std::string(best->first);
}

}  // namespace wysiwim::tasks
