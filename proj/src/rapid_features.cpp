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

#include "lidarfeat/rapid_features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>

#include "lidarfeat/error.hpp"
#include "lidarfeat/parallel.hpp"

namespace lidarfeat {

namespace {

double sq_dist_rows(const Eigen::Ref<const Points3d>& xyz, Index a, Index b) {
  const double dx = xyz(a, 0) - xyz(b, 0);
  const double dy = xyz(a, 1) - xyz(b, 1);
  const double dz = xyz(a, 2) - xyz(b, 2);
  return dx * dx + dy * dy + dz * dz;
}

/// Row indices sorted so that the referenced rows are in ascending
/// lexicographic order; equal rows keep their relative order.
std::vector<Index> lexicographic_order(const Eigen::MatrixXd& m) {
  std::vector<Index> order(static_cast<std::size_t>(m.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (m(a, c) != m(b, c)) return m(a, c) < m(b, c);
    }
    return false;
  });
  return order;
}

}  // namespace

RapidCloud prepare_rapid_cloud(const PointCloud& cloud) {
  RapidCloud out;
  out.xyz = cloud.xyz().cast<double>();
  out.range = point_ranges(out.xyz);
  out.reflectivity = compute_reflectivity(cloud.intensity().cast<double>().array(), out.range.array()).matrix();
  return out;
}

ReflectivityScale reflectivity_scale(const Eigen::Ref<const Points3d>& xyz,
                                     const Eigen::Ref<const Eigen::VectorXd>& reflectivity) {
  const Index u = xyz.rows();
  if (u < 2) throw Error(ErrorCode::TooFewPoints, "reflectivity scale needs at least two points");
  if (reflectivity.size() != u) throw Error(ErrorCode::LengthMismatch, "one reflectivity per point required");
  ReflectivityScale scale;
  scale.r_min = reflectivity.minCoeff();
  scale.r_max = reflectivity.maxCoeff();
  double d2_min = std::numeric_limits<double>::infinity();
  double d2_max = 0.0;
  for (Index j = 0; j < u; ++j) {
    for (Index l = j + 1; l < u; ++l) {
      const double d2 = sq_dist_rows(xyz, j, l);
      d2_min = std::min(d2_min, d2);
      d2_max = std::max(d2_max, d2);
    }
  }
  scale.d_min = std::sqrt(d2_min);
  scale.d_max = std::sqrt(d2_max);
  return scale;
}

RapidMatrix sorted_distance_matrix(const Eigen::Ref<const Points3d>& xyz,
                                   const Eigen::Ref<const Eigen::VectorXd>& reflectivity, int k) {
  const Index u = xyz.rows();
  if (u <= 1) throw Error(ErrorCode::TooFewPoints, "a RAPiD region needs at least two points");
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  RapidMatrix out;
  if (k > u - 1) {
    k = static_cast<int>(u - 1);
    out.clamped_k = true;
  }
  const ReflectivityScale scale = reflectivity_scale(xyz, reflectivity);
  Eigen::VectorXd mapped(u);
  for (Index j = 0; j < u; ++j) mapped[j] = reflectivity_map(reflectivity[j], scale);

  Eigen::MatrixXd rows(u, k);
  if (u < NeighborIndex::kBruteForceBelow) {
    std::vector<std::pair<double, Index>> others(static_cast<std::size_t>(u - 1));
    for (Index j = 0; j < u; ++j) {
      std::size_t n = 0;
      for (Index l = 0; l < u; ++l) {
        if (l != j) others[n++] = {sq_dist_rows(xyz, j, l), l};
      }
      std::partial_sort(others.begin(), others.begin() + k, others.end());
      for (int l = 0; l < k; ++l) {
        const double dg = mapped[j] - mapped[others[static_cast<std::size_t>(l)].second];
        rows(j, l) = std::sqrt(others[static_cast<std::size_t>(l)].first + dg * dg);
      }
      std::sort(rows.row(j).begin(), rows.row(j).end());
    }
  } else {
    const Points3d local = xyz;
    const NeighborIndex index(local);
    for (Index j = 0; j < u; ++j) {
      const NeighborList nn = index.query(j, k);
      for (int l = 0; l < k; ++l) {
        const double dg = mapped[j] - mapped[nn.neighbor_indices[static_cast<std::size_t>(l)]];
        rows(j, l) = std::sqrt(nn.squared_distances[static_cast<std::size_t>(l)] + dg * dg);
      }
      std::sort(rows.row(j).begin(), rows.row(j).end());
    }
  }

  const std::vector<Index> order = lexicographic_order(rows);
  out.values.resize(u, k);
  for (Index r = 0; r < u; ++r) out.values.row(r) = rows.row(order[static_cast<std::size_t>(r)]);
  return out;
}

void normalize_rapid(Eigen::MatrixXd& values, double outlier_threshold) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool any_inlier = false;
  for (Index i = 0; i < values.size(); ++i) {
    const double v = values.data()[i];
    if (v <= outlier_threshold) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      any_inlier = true;
    }
  }
  const double span = any_inlier ? hi - lo : 0.0;
  for (Index i = 0; i < values.size(); ++i) {
    double& v = values.data()[i];
    if (v > outlier_threshold || !any_inlier) {
      v = 1.0;
    } else {
      v = span > 0.0 ? (v - lo) / span : 0.0;
    }
  }
}

RapidMatrix rapid_matrix(const Eigen::Ref<const Points3d>& xyz, const Eigen::Ref<const Eigen::VectorXd>& reflectivity,
                         int k, double outlier_threshold) {
  RapidMatrix out = sorted_distance_matrix(xyz, reflectivity, k);
  normalize_rapid(out.values, outlier_threshold);
  return out;
}

double range_boundary(int k, double theta_rad, double delta_max) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be at least 2");
  if (!(theta_rad > 0.0)) throw Error(ErrorCode::InvalidArgument, "theta must be positive");
  if (!(delta_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta_max must be positive");
  return delta_max / (2.0 * (k - 1) * std::sin(theta_rad / 2.0));
}

RangeKPolicy RangeKPolicy::from_resolution(int k_close, int k_mid, int k_far, double theta_deg, double delta_max) {
  RangeKPolicy policy;
  policy.k_close = k_close;
  policy.k_mid = k_mid;
  policy.k_far = k_far;
  policy.theta_deg = theta_deg;
  policy.delta_max = delta_max;
  if (k_close >= 2 && k_mid >= 2 && theta_deg > 0.0 && delta_max > 0.0) {
    policy.boundary_close_mid = range_boundary(k_close, deg_to_rad(theta_deg), delta_max);
    policy.boundary_mid_far = range_boundary(k_mid, deg_to_rad(theta_deg), delta_max);
  }
  policy.validate();
  return policy;
}

void RangeKPolicy::validate() const {
  if (!(k_close >= k_mid && k_mid >= k_far && k_far >= 2)) {
    throw Error(ErrorCode::InvalidArgument, "k policy requires k_close >= k_mid >= k_far >= 2, got " +
                                                std::to_string(k_close) + "/" + std::to_string(k_mid) + "/" +
                                                std::to_string(k_far));
  }
  if (!(theta_deg > 0.0) || !(delta_max > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "theta and delta_max must be positive");
  }
  if (!(boundary_close_mid >= 0.0 && boundary_close_mid <= boundary_mid_far)) {
    throw Error(ErrorCode::InvalidArgument, "range boundaries must satisfy 0 <= close/mid <= mid/far");
  }
}

int select_k(double range, const RangeKPolicy& policy) {
  if (range < policy.boundary_close_mid) return policy.k_close;
  if (range < policy.boundary_mid_far) return policy.k_mid;
  return policy.k_far;
}

StackedFeatures mnps_features(const RapidCloud& cloud, const std::vector<std::vector<Index>>& groups,
                              const RangeKPolicy& policy, const ExtractOptions& options) {
  policy.validate();
  const Index n = cloud.size();
  if (cloud.reflectivity.size() != n || cloud.range.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "reflectivity and range must have one entry per point");
  }

  // Row layout: groups in order, then any point no group claimed.
  std::vector<char> claimed(static_cast<std::size_t>(n), 0);
  std::vector<Index> row_anchor;
  std::vector<Index> row_group;
  row_anchor.reserve(static_cast<std::size_t>(n));
  row_group.reserve(static_cast<std::size_t>(n));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (Index a : groups[g]) {
      if (a < 0 || a >= n) throw Error(ErrorCode::InvalidArgument, "group index out of range");
      if (claimed[static_cast<std::size_t>(a)]) {
        throw Error(ErrorCode::InvalidArgument, "point " + std::to_string(a) + " appears in two groups");
      }
      claimed[static_cast<std::size_t>(a)] = 1;
      row_anchor.push_back(a);
      row_group.push_back(static_cast<Index>(g));
    }
  }
  for (Index a = 0; a < n; ++a) {
    if (!claimed[static_cast<std::size_t>(a)]) {
      row_anchor.push_back(a);
      row_group.push_back(-1);
    }
  }

  std::vector<std::optional<NeighborIndex>> indices(groups.size());
  parallel_for(static_cast<Index>(groups.size()), options.threads, [&](Index begin, Index end) {
    for (Index g = begin; g < end; ++g) {
      if (groups[static_cast<std::size_t>(g)].size() >= 2) {
        indices[static_cast<std::size_t>(g)].emplace(cloud.xyz, groups[static_cast<std::size_t>(g)]);
      }
    }
  });

  const int width = policy.feature_width();
  StackedFeatures out;
  out.values.setZero(n, width);
  out.anchor = row_anchor;
  out.k.assign(static_cast<std::size_t>(n), 0);
  out.flags.assign(static_cast<std::size_t>(n), kRowOk);

  parallel_for(n, options.threads, [&](Index begin, Index end) {
    Points3d window_xyz;
    Eigen::VectorXd window_refl;
    for (Index r = begin; r < end; ++r) {
      const auto rs = static_cast<std::size_t>(r);
      const Index anchor = row_anchor[rs];
      const Index g = row_group[rs];
      if (g < 0 || !indices[static_cast<std::size_t>(g)]) {
        out.flags[rs] = kRowDegenerate;
        continue;
      }
      const NeighborIndex& index = *indices[static_cast<std::size_t>(g)];
      const int k = select_k(cloud.range[anchor], policy);
      const int w = static_cast<int>(std::min<Index>(k, index.size()));
      if (w < k) out.flags[rs] = kRowClampedK;

      const NeighborList nn = index.query(anchor, w - 1);
      window_xyz.resize(w, 3);
      window_refl.resize(w);
      window_xyz.row(0) = cloud.xyz.row(anchor);
      window_refl[0] = cloud.reflectivity[anchor];
      for (int i = 1; i < w; ++i) {
        const Index p = nn.neighbor_indices[static_cast<std::size_t>(i - 1)];
        window_xyz.row(i) = cloud.xyz.row(p);
        window_refl[i] = cloud.reflectivity[p];
      }
      const RapidMatrix m = rapid_matrix(window_xyz, window_refl, w - 1, options.outlier_threshold);
      for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) out.values(r, i * m.cols() + j) = m.values(i, j);
      }
      out.k[rs] = w;
    }
  });
  return out;
}

StackedFeatures r_rapid(const RapidCloud& cloud, const RingPartition& rings, const RangeKPolicy& policy,
                        const ExtractOptions& options) {
  return mnps_features(cloud, rings.rings, policy, options);
}

StackedFeatures c_rapid(const RapidCloud& cloud, std::span<const std::uint16_t> labels, const RangeKPolicy& policy,
                        const ExtractOptions& options) {
  if (static_cast<Index>(labels.size()) != cloud.size()) {
    throw Error(ErrorCode::LengthMismatch, "one label per point required");
  }
  std::map<std::uint16_t, std::vector<Index>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<Index>(i));
  std::vector<std::vector<Index>> groups;
  groups.reserve(by_class.size());
  for (auto& [label, members] : by_class) groups.push_back(std::move(members));
  return mnps_features(cloud, groups, policy, options);
}

StackedFeatures mnps_rapid(const RapidCloud& cloud, const RangeKPolicy& policy, const ExtractOptions& options) {
  std::vector<Index> all(static_cast<std::size_t>(cloud.size()));
  std::iota(all.begin(), all.end(), Index{0});
  return mnps_features(cloud, {all}, policy, options);
}

FeatureMatrix to_point_order(const StackedFeatures& features, Index point_count) {
  if (features.rows() != point_count) {
    throw Error(ErrorCode::LengthMismatch, "feature rows do not match the point count");
  }
  FeatureMatrix out(point_count, features.feature_width());
  for (Index r = 0; r < features.rows(); ++r) {
    out.row(features.anchor[static_cast<std::size_t>(r)]) = features.values.row(r).cast<float>();
  }
  return out;
}

}  // namespace lidarfeat
