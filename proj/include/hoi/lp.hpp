// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "hoi/errors.hpp"

namespace hoi::lp {

// Dense phase-1 simplex, sized for the small systems in this library
// (tens of rows/columns). Bland's rule, so no cycling.

namespace detail {

inline constexpr double kPivotTol = 1e-9;

struct Tableau {
  Eigen::MatrixXd t;        // m+1 rows, cols+1 columns; last row = objective
  std::vector<int> basis;   // basic variable per row

  int rows() const { return static_cast<int>(t.rows()) - 1; }
  int cols() const { return static_cast<int>(t.cols()) - 1; }

  void pivot(int row, int col) {
    t.row(row) /= t(row, col);
    for (int r = 0; r < t.rows(); ++r) {
      if (r == row) continue;
      const double f = t(r, col);
      if (f != 0.0) t.row(r) -= f * t.row(row);
    }
    basis[row] = col;
  }

  // Returns false when the objective is unbounded below (cannot happen for
  // the bounded phase-1 objective, but kept as a guard).
  bool solve() {
    while (true) {
      int entering = -1;
      for (int c = 0; c < cols(); ++c) {
        if (t(rows(), c) < -kPivotTol) {
          entering = c;  // Bland: first improving column
          break;
        }
      }
      if (entering < 0) return true;

      int leaving = -1;
      double bestRatio = 0.0;
      for (int r = 0; r < rows(); ++r) {
        const double a = t(r, entering);
        if (a > kPivotTol) {
          const double ratio = t(r, cols()) / a;
          if (leaving < 0 || ratio < bestRatio - kPivotTol ||
              (ratio < bestRatio + kPivotTol && basis[r] < basis[leaving])) {
            leaving = r;
            bestRatio = ratio;
          }
        }
      }
      if (leaving < 0) return false;
      pivot(leaving, entering);
    }
  }
};

}  // namespace detail

/// Finds any x (unrestricted sign) with A x <= b, or nullopt if the system is
/// infeasible. Phase-1 simplex on x = u - w with slacks and artificials.
inline std::optional<Eigen::VectorXd> findFeasible(const Eigen::MatrixXd& A,
                                                   const Eigen::VectorXd& b) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m) throw ValidationError("lp::findFeasible: size mismatch");

  std::vector<int> artRows;
  for (int i = 0; i < m; ++i)
    if (b(i) < 0.0) artRows.push_back(i);
  const int nArt = static_cast<int>(artRows.size());

  const int cols = 2 * n + m + nArt;
  detail::Tableau tab;
  tab.t = Eigen::MatrixXd::Zero(m + 1, cols + 1);
  tab.basis.assign(m, -1);

  int artIdx = 0;
  for (int i = 0; i < m; ++i) {
    const double sgn = b(i) < 0.0 ? -1.0 : 1.0;
    tab.t.block(i, 0, 1, n) = sgn * A.row(i);
    tab.t.block(i, n, 1, n) = -sgn * A.row(i);
    tab.t(i, 2 * n + i) = sgn;  // slack
    tab.t(i, cols) = sgn * b(i);
    if (b(i) < 0.0) {
      tab.t(i, 2 * n + m + artIdx) = 1.0;
      tab.basis[i] = 2 * n + m + artIdx;
      ++artIdx;
    } else {
      tab.basis[i] = 2 * n + i;
    }
  }

  // phase-1 objective: minimize sum of artificials, expressed over nonbasics
  for (int i : artRows) tab.t.row(m) -= tab.t.row(i);
  for (int j = 0; j < nArt; ++j) tab.t(m, 2 * n + m + j) = 0.0;

  if (!tab.solve())
    throw NumericalError("lp::findFeasible: unbounded phase-1 objective");

  const double infeasibility = -tab.t(m, cols);
  if (infeasibility > 1e-7) return std::nullopt;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    const int bv = tab.basis[i];
    if (bv < n)
      x(bv) += tab.t(i, cols);
    else if (bv < 2 * n)
      x(bv - n) -= tab.t(i, cols);
  }
  return x;
}

}  // namespace hoi::lp
