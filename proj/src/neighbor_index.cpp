//==============================================================================
// Copyright 2026 The lidarfeat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//==============================================================================

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>

#include "lidarfeat/geometry.hpp"

namespace lidarfeat {

namespace {

constexpr int kCellBits = 21;
constexpr int kMaxCellsPerAxis = (1 << kCellBits) - 1;
constexpr int kCellSizeSamples = 32;
constexpr int kCellSizeNeighbors = 8;

std::uint64_t pack(int x, int y, int z) {
  return static_cast<std::uint64_t>(x) | (static_cast<std::uint64_t>(y) << kCellBits) |
         (static_cast<std::uint64_t>(z) << (2 * kCellBits));
}

double sq_dist(const double* a, const double* b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

/// Bounded best-k list ordered by (squared distance, index).
class TopK {
 public:
  explicit TopK(int k) : k_(static_cast<std::size_t>(k)) { items_.reserve(k_ + 1); }

  void offer(double d2, Index id) {
    if (items_.size() == k_ && !less(d2, id, items_.back())) return;
    auto pos = std::upper_bound(items_.begin(), items_.end(), Item{d2, id},
                                [](const Item& a, const Item& b) { return less(a.d2, a.id, b); });
    items_.insert(pos, Item{d2, id});
    if (items_.size() > k_) items_.pop_back();
  }

  bool full() const { return items_.size() == k_; }
  double worst() const { return items_.back().d2; }

  NeighborList finish(Index anchor) const {
    NeighborList out;
    out.anchor_index = anchor;
    out.neighbor_indices.reserve(items_.size());
    out.squared_distances.reserve(items_.size());
    for (const Item& it : items_) {
      out.neighbor_indices.push_back(it.id);
      out.squared_distances.push_back(it.d2);
    }
    return out;
  }

 private:
  struct Item {
    double d2;
    Index id;
  };
  static bool less(double d2, Index id, const Item& b) { return d2 < b.d2 || (d2 == b.d2 && id < b.id); }

  std::size_t k_;
  std::vector<Item> items_;
};

}  // namespace

NeighborIndex::NeighborIndex(const Points3d& points) {
  std::vector<Index> all(static_cast<std::size_t>(points.rows()));
  std::iota(all.begin(), all.end(), Index{0});
  *this = NeighborIndex(points, all);
}

NeighborIndex::NeighborIndex(const Points3d& points, std::span<const Index> subset) {
  ids_.assign(subset.begin(), subset.end());
  coords_.resize(static_cast<Index>(ids_.size()), 3);
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i] < 0 || ids_[i] >= points.rows()) {
      throw Error(ErrorCode::InvalidArgument, "subset index out of range");
    }
    coords_.row(static_cast<Index>(i)) = points.row(ids_[i]);
  }
  if (size() >= kBruteForceBelow) build_grid();

  lookup_.resize(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) lookup_[i] = {ids_[i], static_cast<Index>(i)};
  std::sort(lookup_.begin(), lookup_.end());
  for (std::size_t i = 1; i < lookup_.size(); ++i) {
    if (lookup_[i].first == lookup_[i - 1].first) {
      throw Error(ErrorCode::InvalidArgument, "subset contains duplicate indices");
    }
  }
}

void NeighborIndex::build_grid() {
  const Index n = size();
  const Eigen::Vector3d lo = coords_.colwise().minCoeff().transpose();
  const Eigen::Vector3d hi = coords_.colwise().maxCoeff().transpose();
  const double span = (hi - lo).maxCoeff();

  // Cell edge ~ median distance to the 8th neighbour over a small sample, so
  // a cell holds a handful of points whatever the intrinsic dimension.
  std::vector<double> sample_radius;
  const Index stride = std::max<Index>(1, n / kCellSizeSamples);
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Index s = 0; s < n && static_cast<int>(sample_radius.size()) < kCellSizeSamples; s += stride) {
    for (Index j = 0; j < n; ++j) d2[static_cast<std::size_t>(j)] = sq_dist(&coords_(s, 0), &coords_(j, 0));
    const auto nth = d2.begin() + std::min<Index>(kCellSizeNeighbors, n - 1);
    std::nth_element(d2.begin(), nth, d2.end());
    sample_radius.push_back(std::sqrt(*nth));
  }
  std::nth_element(sample_radius.begin(), sample_radius.begin() + sample_radius.size() / 2, sample_radius.end());
  cell_ = sample_radius[sample_radius.size() / 2];
  if (!(cell_ > 0.0)) cell_ = span > 0.0 ? span / std::cbrt(static_cast<double>(n)) : 1.0;
  if (span / cell_ >= kMaxCellsPerAxis) cell_ = span / (kMaxCellsPerAxis - 1);

  origin_ = lo;
  for (int d = 0; d < 3; ++d) {
    extent_[d] = static_cast<int>(std::floor((hi[d] - lo[d]) / cell_)) + 1;
  }

  std::vector<std::uint64_t> keys(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    int c[3];
    for (int d = 0; d < 3; ++d) {
      c[d] = std::clamp(static_cast<int>(std::floor((coords_(i, d) - origin_[d]) / cell_)), 0, extent_[d] - 1);
    }
    keys[static_cast<std::size_t>(i)] = pack(c[0], c[1], c[2]);
  }
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  Points3d sorted_coords(n, 3);
  std::vector<Index> sorted_ids(static_cast<std::size_t>(n));
  cell_keys_.clear();
  cell_begin_.clear();
  for (std::size_t r = 0; r < order.size(); ++r) {
    sorted_coords.row(static_cast<Index>(r)) = coords_.row(static_cast<Index>(order[r]));
    sorted_ids[r] = ids_[order[r]];
    const std::uint64_t key = keys[order[r]];
    if (cell_keys_.empty() || cell_keys_.back() != key) {
      cell_keys_.push_back(key);
      cell_begin_.push_back(static_cast<std::uint32_t>(r));
    }
  }
  cell_begin_.push_back(static_cast<std::uint32_t>(n));
  coords_ = std::move(sorted_coords);
  ids_ = std::move(sorted_ids);
}

NeighborList NeighborIndex::query(Index anchor_index, int k) const {
  const auto it = std::lower_bound(lookup_.begin(), lookup_.end(), std::pair<Index, Index>{anchor_index, Index{-1}});
  if (it == lookup_.end() || it->first != anchor_index) {
    throw Error(ErrorCode::InvalidArgument, "anchor " + std::to_string(anchor_index) + " is not in the subset");
  }
  return query_point(coords_.row(it->second).transpose(), k, anchor_index);
}

NeighborList NeighborIndex::query_point(const Eigen::Vector3d& location, int k, Index exclude) const {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "k must be non-negative");
  const bool excluding = exclude >= 0 && std::binary_search(lookup_.begin(), lookup_.end(), std::pair<Index, Index>{exclude, Index{-1}},
                                                            [](const auto& a, const auto& b) { return a.first < b.first; });
  const Index available = size() - (excluding ? 1 : 0);
  if (available < k) {
    throw Error(ErrorCode::InsufficientPoints,
                "subset has " + std::to_string(size()) + " points, cannot return " + std::to_string(k) + " neighbours");
  }
  TopK best(k);
  if (k == 0) return best.finish(exclude);
  const double q[3] = {location.x(), location.y(), location.z()};

  if (cell_keys_.empty()) {
    for (Index r = 0; r < size(); ++r) {
      const Index id = ids_[static_cast<std::size_t>(r)];
      if (id != exclude) best.offer(sq_dist(q, &coords_(r, 0)), id);
    }
    return best.finish(exclude);
  }

  int c[3];
  int max_shell = 0;
  for (int d = 0; d < 3; ++d) {
    const double f = std::floor((q[d] - origin_[d]) / cell_);
    c[d] = static_cast<int>(std::clamp(f, -1.0 * kMaxCellsPerAxis, 2.0 * kMaxCellsPerAxis));
    max_shell = std::max({max_shell, c[d], extent_[d] - 1 - c[d]});
  }

  auto scan_cell = [&](int x, int y, int z) {
    if (x < 0 || y < 0 || z < 0 || x >= extent_[0] || y >= extent_[1] || z >= extent_[2]) return;
    const std::uint64_t key = pack(x, y, z);
    const auto pos = std::lower_bound(cell_keys_.begin(), cell_keys_.end(), key);
    if (pos == cell_keys_.end() || *pos != key) return;
    const auto slot = static_cast<std::size_t>(pos - cell_keys_.begin());
    for (std::uint32_t r = cell_begin_[slot]; r < cell_begin_[slot + 1]; ++r) {
      const Index id = ids_[r];
      if (id != exclude) best.offer(sq_dist(q, &coords_(static_cast<Index>(r), 0)), id);
    }
  };

  for (int s = 0; s <= max_shell; ++s) {
    for (int dx = -s; dx <= s; ++dx) {
      const bool x_face = (dx == -s || dx == s);
      for (int dy = -s; dy <= s; ++dy) {
        const bool y_face = (dy == -s || dy == s);
        if (x_face || y_face) {
          for (int dz = -s; dz <= s; ++dz) scan_cell(c[0] + dx, c[1] + dy, c[2] + dz);
        } else {
          scan_cell(c[0] + dx, c[1] + dy, c[2] - s);
          if (s > 0) scan_cell(c[0] + dx, c[1] + dy, c[2] + s);
        }
      }
    }
    if (best.full()) {
      // Distance from the query to the nearest face of the visited block.
      double bound = std::numeric_limits<double>::infinity();
      for (int d = 0; d < 3; ++d) {
        const double low_face = origin_[d] + (c[d] - s) * cell_;
        const double high_face = origin_[d] + (c[d] + s + 1) * cell_;
        bound = std::min({bound, q[d] - low_face, high_face - q[d]});
      }
      bound -= 1e-9 * cell_;  // cell assignment and face positions round independently
      if (bound > 0.0 && best.worst() < bound * bound) break;
    }
  }
  return best.finish(exclude);
}

NeighborList knn(const Points3d& points, std::span<const Index> subset, Index anchor_index, int k) {
  if (static_cast<Index>(subset.size()) <= k) {
    throw Error(ErrorCode::InsufficientPoints,
                "subset of " + std::to_string(subset.size()) + " points needs more than k=" + std::to_string(k));
  }
  return NeighborIndex(points, subset).query(anchor_index, k);
}

}  // namespace lidarfeat
