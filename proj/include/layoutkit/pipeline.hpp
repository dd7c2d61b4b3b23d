// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dataset-construction math: reference placement sampling, candidate-box
// filtering, the weighted combined cost, and minimum-cost subject-to-box
// assignment with rejection of scenes that cannot be matched completely.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "layoutkit/bbox.hpp"
#include "layoutkit/errors.hpp"
#include "layoutkit/rng.hpp"

namespace layoutkit::pipeline {

// -- placement (single-reference layout diversification) -----------------------

struct PlacementConfig {
  double r_min = 0.6;   // side-length factor range
  double r_max = 0.8;
  int canvas_width = 1024;
  int canvas_height = 1024;
};

struct Placement {
  double r = 0.0;
  BBox box;
};

/// Draws r uniformly from [r_min, r_max], scales the source to fit inside the
/// canvas with its larger relative side equal to r (aspect preserved), and
/// places it uniformly among fully-inside positions. Coordinates are rounded
/// to three decimals; the larger normalized side equals r at that precision.
inline Placement sample_placement(Rng& rng, const PlacementConfig& cfg,
                                  double source_width, double source_height) {
  if (!(cfg.r_min > 0.0) || cfg.r_min > cfg.r_max || cfg.r_max > 1.0)
    throw ConfigError("placement requires 0 < r_min <= r_max <= 1");
  if (!(source_width > 0.0) || !(source_height > 0.0))
    throw DataError("placement source dimensions must be positive");
  if (cfg.canvas_width <= 0 || cfg.canvas_height <= 0)
    throw ConfigError("canvas dimensions must be positive");

  const double r = rng.uniform(cfg.r_min, cfg.r_max);
  const double fit = std::min(cfg.canvas_width / source_width,
                              cfg.canvas_height / source_height);
  const double placed_w = source_width * fit * r;   // pixels
  const double placed_h = source_height * fit * r;
  if (placed_w < 1.0 || placed_h < 1.0)
    throw NoValidPlacement("placed box collapses below one pixel");
  if (placed_w > cfg.canvas_width + 1e-9 || placed_h > cfg.canvas_height + 1e-9)
    throw NoValidPlacement("placed box exceeds the canvas");

  const double wn = placed_w / cfg.canvas_width;   // normalized extents
  const double hn = placed_h / cfg.canvas_height;
  const double x1 = rng.uniform(0.0, std::max(0.0, 1.0 - wn));
  const double y1 = rng.uniform(0.0, std::max(0.0, 1.0 - hn));

  BBox box;
  box.x1 = round3(x1);
  box.y1 = round3(y1);
  box.x2 = std::min(1.0, round3(box.x1 + wn));
  box.y2 = std::min(1.0, round3(box.y1 + hn));
  return {r, box};
}

// -- candidate filtering --------------------------------------------------------

struct ScoredBox {
  BBox box;
  double score = 0.0;
};

struct FilterConfig {
  double area_min = 0.20;
  double area_max = 0.60;
  double dedup_iou = 0.9;
  int min_subjects = 3;
};

struct FilterResult {
  std::vector<int> kept;  // original indices, ascending
  bool rejected = false;
  std::string reason;
};

/// Area gate, then duplicate removal (pairs with IoU >= dedup_iou keep the
/// higher score, lower index on ties), then a minimum-subject check that
/// rejects the whole image.
inline FilterResult filter_candidates(const std::vector<ScoredBox>& candidates,
                                      const FilterConfig& cfg = {}) {
  std::vector<int> order;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double a = candidates[i].box.area();
    if (a >= cfg.area_min && a <= cfg.area_max)
      order.push_back(static_cast<int>(i));
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (candidates[a].score != candidates[b].score)
      return candidates[a].score > candidates[b].score;
    return a < b;
  });

  std::vector<int> kept;
  for (int idx : order) {
    bool duplicate = false;
    for (int k : kept) {
      if (iou(candidates[idx].box, candidates[k].box) >= cfg.dedup_iou) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());

  FilterResult result;
  result.kept = std::move(kept);
  if (static_cast<int>(result.kept.size()) < cfg.min_subjects) {
    result.rejected = true;
    result.reason = "TooFewSubjects";
  }
  return result;
}

/// Crop-level text-similarity gate; the bound is inclusive.
inline bool crop_gate(double s_t, double threshold = 0.25) {
  return s_t >= threshold;
}

// -- combined cost ---------------------------------------------------------------

struct ScoreTriple {
  double s_t = 0.0;  // text-crop similarity
  double s_d = 0.0;  // detection score
  double s_i = 0.0;  // image-crop similarity
};

struct CostWeights {
  double alpha = 1.0 / 3.0;
  double beta = 1.0 / 3.0;
  double gamma = 1.0 / 3.0;
};

using ScoreMatrix = std::vector<std::vector<ScoreTriple>>;  // M x N
using CostMatrix = std::vector<std::vector<double>>;

/// Per-component min-max rescaling of a score matrix onto [0,1]. Constant
/// components map to 0.
inline ScoreMatrix normalize_scores_minmax(const ScoreMatrix& scores) {
  double lo[3] = {std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()};
  double hi[3] = {-std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
  for (const auto& row : scores) {
    for (const auto& t : row) {
      const double v[3] = {t.s_t, t.s_d, t.s_i};
      for (int k = 0; k < 3; ++k) {
        lo[k] = std::min(lo[k], v[k]);
        hi[k] = std::max(hi[k], v[k]);
      }
    }
  }
  ScoreMatrix out = scores;
  for (auto& row : out) {
    for (auto& t : row) {
      double* v[3] = {&t.s_t, &t.s_d, &t.s_i};
      for (int k = 0; k < 3; ++k) {
        const double span = hi[k] - lo[k];
        *v[k] = span > 0.0 ? (*v[k] - lo[k]) / span : 0.0;
      }
    }
  }
  return out;
}

/// C = 1 - (alpha*s_t + beta*s_d + gamma*s_i), elementwise. Weights must lie
/// on the simplex to 1e-9; scores must already be normalized to [0,1].
inline CostMatrix combined_cost(const ScoreMatrix& scores,
                                const CostWeights& w) {
  if (w.alpha < 0.0 || w.beta < 0.0 || w.gamma < 0.0 ||
      std::abs(w.alpha + w.beta + w.gamma - 1.0) > 1e-9)
    throw WeightsOffSimplex("cost weights must be nonnegative and sum to 1");
  CostMatrix cost(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    cost[i].reserve(scores[i].size());
    for (const auto& t : scores[i]) {
      if (t.s_t < 0.0 || t.s_t > 1.0 || t.s_d < 0.0 || t.s_d > 1.0 ||
          t.s_i < 0.0 || t.s_i > 1.0)
        throw DataError("scores must be normalized to [0,1]");
      cost[i].push_back(1.0 - (w.alpha * t.s_t + w.beta * t.s_d +
                               w.gamma * t.s_i));
    }
  }
  return cost;
}

// -- assignment ------------------------------------------------------------------

struct Assignment {
  std::vector<int> subject_to_box;  // size M when accepted, empty otherwise
  double total_cost = 0.0;
  bool accepted = false;
  std::string reason;               // rejection reason when !accepted
};

namespace detail {

/// Shortest-augmenting-path solver (Jonker-Volgenant style) for an M x N
/// cost matrix with M <= N. Returns the optimal total cost and fills
/// row_to_col.
inline double solve_assignment(const CostMatrix& cost, int m, int n,
                               std::vector<int>& row_to_col) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(m + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> col_to_row(n + 1, 0), way(n + 1, 0);

  for (int i = 1; i <= m; ++i) {
    col_to_row[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = col_to_row[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[col_to_row[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_to_row[j0] != 0);
    do {
      const int j1 = way[j0];
      col_to_row[j0] = col_to_row[j1];
      j0 = j1;
    } while (j0);
  }

  row_to_col.assign(m, -1);
  for (int j = 1; j <= n; ++j)
    if (col_to_row[j] != 0) row_to_col[col_to_row[j] - 1] = j - 1;
  double total = 0.0;
  for (int i = 0; i < m; ++i) total += cost[i][row_to_col[i]];
  return total;
}

/// Optimal completion cost for rows [row..M) restricted to unused columns;
/// used by the lexicographic tie-break. Returns +inf when infeasible.
inline double completion_cost(const CostMatrix& cost, int row,
                              const std::vector<bool>& used_cols) {
  const int m = static_cast<int>(cost.size());
  const int rows_left = m - row;
  if (rows_left == 0) return 0.0;
  std::vector<int> cols;
  for (std::size_t j = 0; j < used_cols.size(); ++j)
    if (!used_cols[j]) cols.push_back(static_cast<int>(j));
  if (static_cast<int>(cols.size()) < rows_left)
    return std::numeric_limits<double>::infinity();
  CostMatrix sub(rows_left);
  for (int i = 0; i < rows_left; ++i) {
    sub[i].reserve(cols.size());
    for (int j : cols) sub[i].push_back(cost[row + i][j]);
  }
  std::vector<int> dummy;
  return solve_assignment(sub, rows_left, static_cast<int>(cols.size()), dummy);
}

}  // namespace detail

/// Minimum-total-cost injective assignment of all M subjects to boxes.
/// Requires M <= N for acceptance; otherwise Rejected(IncompleteMatching).
/// Among cost-equal optima the lowest (subject index, box index) pairs win.
inline Assignment assign(const CostMatrix& cost) {
  const int m = static_cast<int>(cost.size());
  if (m < 1) throw DataError("assign: cost matrix needs at least one subject");
  const int n = static_cast<int>(cost[0].size());
  for (const auto& row : cost) {
    if (static_cast<int>(row.size()) != n)
      throw DataError("assign: cost matrix rows have unequal lengths");
    for (double c : row)
      if (!std::isfinite(c)) throw NonFiniteCost("assign: non-finite cost");
  }

  Assignment result;
  if (m > n) {
    result.reason = "IncompleteMatching";
    return result;
  }

  std::vector<int> row_to_col;
  const double optimal = detail::solve_assignment(cost, m, n, row_to_col);
  const double eps = 1e-9 * std::max(1.0, std::abs(optimal));

  // Lexicographic re-selection: fix each subject to the lowest box index
  // that still completes to an optimal total.
  std::vector<bool> used(n, false);
  std::vector<int> chosen(m, -1);
  double prefix = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      used[j] = true;
      const double completion = detail::completion_cost(cost, i + 1, used);
      if (prefix + cost[i][j] + completion <= optimal + eps) {
        chosen[i] = j;
        prefix += cost[i][j];
        break;
      }
      used[j] = false;
    }
    if (chosen[i] < 0) {  // numerical fallback: keep the solver's choice
      chosen[i] = row_to_col[i];
      used[row_to_col[i]] = true;
      prefix += cost[i][row_to_col[i]];
    }
  }

  result.subject_to_box = std::move(chosen);
  result.total_cost = 0.0;
  for (int i = 0; i < m; ++i)
    result.total_cost += cost[i][result.subject_to_box[i]];
  result.accepted = true;
  return result;
}

// -- per-pair quality gate ---------------------------------------------------------

struct AcceptThresholds {
  double t_min = 0.25;
  double d_min = 0.30;
  double i_min = 0.50;
};

struct SceneVerdict {
  bool accepted = false;
  std::vector<std::string> reasons;
};

/// Rejects the scene when any matched pair scores below a threshold; every
/// failing pair is cited.
inline SceneVerdict accept_scene(const Assignment& a, const ScoreMatrix& scores,
                                 const AcceptThresholds& thresholds = {}) {
  if (!a.accepted)
    throw DataError("accept_scene requires an accepted assignment");
  SceneVerdict verdict;
  for (std::size_t i = 0; i < a.subject_to_box.size(); ++i) {
    const int j = a.subject_to_box[i];
    const ScoreTriple& t = scores[i][j];
    const std::string pair =
        "pair " + std::to_string(i) + "->" + std::to_string(j);
    if (t.s_t < thresholds.t_min)
      verdict.reasons.push_back(pair + ": s_t below threshold");
    if (t.s_d < thresholds.d_min)
      verdict.reasons.push_back(pair + ": s_d below threshold");
    if (t.s_i < thresholds.i_min)
      verdict.reasons.push_back(pair + ": s_i below threshold");
  }
  verdict.accepted = verdict.reasons.empty();
  return verdict;
}

}  // namespace layoutkit::pipeline
