// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

// Brute-force 6-D convex-hull containment: enumerate every 6-point subset,
// fit the hyperplane through it, keep the supporting ones (all points on one
// side) as facets, and require the origin strictly on the inner side of each.
// Exponential and only suitable for the small wrench sets in tests; entirely
// independent of the LP path it cross-checks.

namespace hoi::testing {

struct HullCheck {
  bool contains_origin_strictly = false;
  double min_facet_offset = 0.0;  // inscribed-ball radius when positive
};

inline HullCheck hullContainsOriginStrictly(const Eigen::MatrixXd& points) {
  constexpr double kTol = 1e-9;
  const int n = static_cast<int>(points.rows());
  HullCheck out;
  if (n < 7) return out;  // interior of a 6-D hull needs at least 7 points

  // full-dimensionality
  Eigen::MatrixXd diffs(n - 1, 6);
  for (int i = 1; i < n; ++i) diffs.row(i - 1) = points.row(i) - points.row(0);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(diffs);
  lu.setThreshold(1e-9);
  if (lu.rank() < 6) return out;

  double minOffset = std::numeric_limits<double>::infinity();
  bool anyFacet = false;

  std::vector<int> idx = {0, 1, 2, 3, 4, 5};
  auto nextCombination = [&]() {
    int k = 5;
    while (k >= 0 && idx[k] == n - 6 + k) --k;
    if (k < 0) return false;
    ++idx[k];
    for (int j = k + 1; j < 6; ++j) idx[j] = idx[j - 1] + 1;
    return true;
  };

  do {
    // hyperplane through the 6 points: normal spans the kernel of the
    // 5x6 difference matrix (skip affinely dependent subsets)
    Eigen::Matrix<double, 5, 6> diff;
    for (int i = 1; i < 6; ++i)
      diff.row(i - 1) = points.row(idx[i]) - points.row(idx[0]);
    Eigen::FullPivLU<Eigen::Matrix<double, 5, 6>> dlu(diff);
    dlu.setThreshold(1e-9);
    if (dlu.dimensionOfKernel() != 1) continue;
    Eigen::Matrix<double, 6, 1> normal = dlu.kernel().col(0);
    const double nn = normal.norm();
    if (nn < 1e-12) continue;
    normal /= nn;
    double b = points.row(idx[0]).dot(normal);

    const Eigen::VectorXd proj = points * normal;
    const double lo = proj.minCoeff();
    const double hi = proj.maxCoeff();
    bool supporting = false;
    if (hi <= b + kTol) {
      supporting = true;  // all on the <= side
    } else if (lo >= b - kTol) {
      normal = -normal;
      b = -b;
      supporting = true;
    }
    if (!supporting) continue;
    anyFacet = true;
    minOffset = std::min(minOffset, b);
  } while (nextCombination());

  if (!anyFacet) return out;
  out.min_facet_offset = minOffset;
  out.contains_origin_strictly = minOffset > kTol;
  return out;
}

}  // namespace hoi::testing
