// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace layoutkit {

/// Rounds half-up to three decimals. Operates on the binary double value;
/// exact decimal ties coming from pixel coordinates should go through
/// normalize_box, which rounds in integer arithmetic.
inline double round3(double v) {
  return std::floor(v * 1000.0 + 0.5) / 1000.0;
}

/// Axis-aligned box in normalized [0,1] coordinates, corners top-left and
/// bottom-right. Plain aggregate: operations that require the ordering
/// invariant check it themselves, and prompt validation reports violations
/// on purpose-built invalid boxes instead of refusing to hold them.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  bool valid() const {
    return 0.0 <= x1 && x1 < x2 && x2 <= 1.0 && 0.0 <= y1 && y1 < y2 &&
           y2 <= 1.0;
  }

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }

  friend bool operator==(const BBox& a, const BBox& b) {
    return a.x1 == b.x1 && a.y1 == b.y1 && a.x2 == b.x2 && a.y2 == b.y2;
  }
};

inline double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

/// Intersection over union; 0 for disjoint boxes.
inline double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return inter / uni;
}

}  // namespace layoutkit
