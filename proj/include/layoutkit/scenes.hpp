// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic layout corpus: seeded random layouts of 2-6 colored rectangles,
// a rasterizer with a pixel-center inclusion rule, and an oracle detector
// (color thresholding + connected components) that recovers rendered boxes
// to within one pixel, so layout adherence is measurable without any
// external vision model.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "layoutkit/bbox.hpp"
#include "layoutkit/errors.hpp"
#include "layoutkit/rng.hpp"

namespace layoutkit::scenes {

/// HxWxC raster with intensities in [0,1]; training target and sampler
/// output alike.
struct ToyScene {
  int height = 0;
  int width = 0;
  int channels = 3;
  std::vector<double> pixels;  // row-major (y, x, c)

  static ToyScene filled(int h, int w, int c, double value) {
    ToyScene s;
    s.height = h;
    s.width = w;
    s.channels = c;
    s.pixels.assign(static_cast<std::size_t>(h) * w * c, value);
    return s;
  }

  double& at(int y, int x, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

using Color = std::array<double, 3>;

struct Palette {
  std::vector<std::string> names;   // class_id -> subject word
  std::vector<Color> colors;        // class_id -> RGB
  Color background{0.0, 0.0, 0.0};

  int size() const { return static_cast<int>(colors.size()); }
};

/// Eight classes at pairwise L-infinity distance >= 0.5 from each other and
/// from the black background, so a 0.25 tolerance never claims a pixel for
/// two classes.
inline Palette default_palette() {
  Palette p;
  p.names = {"red",    "green", "blue",  "yellow",
             "magenta","cyan",  "white", "gray"};
  p.colors = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0},
              {1, 0, 1}, {0, 1, 1}, {1, 1, 1}, {0.5, 0.5, 0.5}};
  return p;
}

struct Instance {
  int class_id = 0;
  BBox box;
};

struct LayoutSpec {
  std::vector<Instance> instances;
  int height = 32;
  int width = 32;
};

struct LayoutConfig {
  int n_min = 2;
  int n_max = 6;
  double min_side = 0.15;
  double max_side = 0.55;
  double max_overlap_iou = 0.1;
  int height = 32;
  int width = 32;
  int num_classes = 8;       // classes are distinct within a scene
  int max_attempts = 20000;  // per-box rejection budget
};

/// Uniform instance count, then boxes by rejection until every pair overlaps
/// at most max_overlap_iou. Coordinates are rounded to three decimals so the
/// layout survives the prompt grammar bit-exactly.
inline LayoutSpec sample_layout(Rng& rng, const LayoutConfig& cfg = {}) {
  if (cfg.n_min < 1 || cfg.n_min > cfg.n_max)
    throw ConfigError("sample_layout requires 1 <= n_min <= n_max");
  if (cfg.n_max > cfg.num_classes)
    throw ConfigError("sample_layout: more instances than distinct classes");

  LayoutSpec spec;
  spec.height = cfg.height;
  spec.width = cfg.width;
  const int n =
      static_cast<int>(rng.uniform_int(cfg.n_min, cfg.n_max));

  // Distinct classes via a partial Fisher-Yates shuffle.
  std::vector<int> classes(cfg.num_classes);
  for (int i = 0; i < cfg.num_classes; ++i) classes[i] = i;
  for (int i = 0; i < n; ++i) {
    const int j =
        static_cast<int>(rng.uniform_int(i, cfg.num_classes - 1));
    std::swap(classes[i], classes[j]);
  }

  for (int i = 0; i < n; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
      const double w = rng.uniform(cfg.min_side, cfg.max_side);
      const double h = rng.uniform(cfg.min_side, cfg.max_side);
      BBox box;
      box.x1 = round3(rng.uniform(0.0, 1.0 - w));
      box.y1 = round3(rng.uniform(0.0, 1.0 - h));
      box.x2 = std::min(1.0, round3(box.x1 + w));
      box.y2 = std::min(1.0, round3(box.y1 + h));
      if (!box.valid()) continue;
      if (box.width() * cfg.width * box.height() * cfg.height < 4.0) continue;
      bool rejected = false;
      for (const auto& other : spec.instances) {
        if (iou(box, other.box) > cfg.max_overlap_iou) {
          rejected = true;
          break;
        }
        // An overlap band spanning a box's full width or height would let
        // the painter's order erase an extreme row/column or split a box,
        // defeating the oracle detector. Keep such pairs out.
        const double iw =
            std::min(box.x2, other.box.x2) - std::max(box.x1, other.box.x1);
        const double ih =
            std::min(box.y2, other.box.y2) - std::max(box.y1, other.box.y1);
        if (iw > 0.0 && ih > 0.0) {
          const double eps = 1e-9;
          if (iw >= box.width() - eps || iw >= other.box.width() - eps ||
              ih >= box.height() - eps || ih >= other.box.height() - eps) {
            rejected = true;
            break;
          }
        }
      }
      if (rejected) continue;
      spec.instances.push_back({classes[i], box});
      placed = true;
      break;
    }
    if (!placed)
      throw RejectionExhausted(
          "sample_layout: could not place instance " + std::to_string(i) +
          " within the attempt budget");
  }
  return spec;
}

/// Paints instances over the background in order (later instances win).
/// Pixel (y, x) belongs to a box iff its center lies inside the half-open
/// region [x1*W, x2*W) x [y1*H, y2*H).
inline ToyScene render(const LayoutSpec& spec,
                       const Palette& palette = default_palette()) {
  ToyScene scene = ToyScene::filled(spec.height, spec.width, 3, 0.0);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x)
      for (int c = 0; c < 3; ++c) scene.at(y, x, c) = palette.background[c];

  for (const auto& inst : spec.instances) {
    const Color& color = palette.colors.at(inst.class_id);
    const int x_begin = static_cast<int>(
        std::ceil(inst.box.x1 * spec.width - 0.5));
    const int x_end = static_cast<int>(
        std::ceil(inst.box.x2 * spec.width - 0.5));
    const int y_begin = static_cast<int>(
        std::ceil(inst.box.y1 * spec.height - 0.5));
    const int y_end = static_cast<int>(
        std::ceil(inst.box.y2 * spec.height - 0.5));
    for (int y = std::max(0, y_begin); y < std::min(spec.height, y_end); ++y)
      for (int x = std::max(0, x_begin); x < std::min(spec.width, x_end); ++x)
        for (int c = 0; c < 3; ++c) scene.at(y, x, c) = color[c];
  }
  return scene;
}

struct DetectedBox {
  int class_id = 0;
  BBox box;
  double score = 1.0;
};

struct DetectConfig {
  double color_tolerance = 0.25;  // L-infinity match radius
  int min_area_px = 4;
};

/// Oracle detector: per class, threshold pixels within the color tolerance,
/// extract 4-connected components of sufficient area, and report each
/// component's tight bounding box with score = mean color match.
inline std::vector<DetectedBox> detect(const ToyScene& scene,
                                       const Palette& palette,
                                       const DetectConfig& cfg = {}) {
  std::vector<DetectedBox> detections;
  const int h = scene.height, w = scene.width;
  std::vector<char> mask(static_cast<std::size_t>(h) * w);
  std::vector<char> visited(static_cast<std::size_t>(h) * w);

  for (int class_id = 0; class_id < palette.size(); ++class_id) {
    const Color& color = palette.colors[class_id];
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double dist = 0.0;
        for (int c = 0; c < scene.channels && c < 3; ++c)
          dist = std::max(dist, std::abs(scene.at(y, x, c) - color[c]));
        mask[static_cast<std::size_t>(y) * w + x] =
            dist <= cfg.color_tolerance ? 1 : 0;
      }
    }
    std::fill(visited.begin(), visited.end(), 0);

    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t start = static_cast<std::size_t>(y) * w + x;
        if (!mask[start] || visited[start]) continue;
        // Flood fill one component.
        std::vector<std::pair<int, int>> stack{{y, x}};
        visited[start] = 1;
        int min_x = x, max_x = x, min_y = y, max_y = y;
        double match_sum = 0.0;
        int area = 0;
        while (!stack.empty()) {
          const auto [cy, cx] = stack.back();
          stack.pop_back();
          ++area;
          double dist = 0.0;
          for (int c = 0; c < scene.channels && c < 3; ++c)
            dist = std::max(dist, std::abs(scene.at(cy, cx, c) - color[c]));
          match_sum += 1.0 - dist / cfg.color_tolerance;
          min_x = std::min(min_x, cx);
          max_x = std::max(max_x, cx);
          min_y = std::min(min_y, cy);
          max_y = std::max(max_y, cy);
          constexpr int dy[4] = {-1, 1, 0, 0};
          constexpr int dx[4] = {0, 0, -1, 1};
          for (int k = 0; k < 4; ++k) {
            const int ny = cy + dy[k], nx = cx + dx[k];
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            const std::size_t at = static_cast<std::size_t>(ny) * w + nx;
            if (mask[at] && !visited[at]) {
              visited[at] = 1;
              stack.emplace_back(ny, nx);
            }
          }
        }
        if (area < cfg.min_area_px) continue;
        DetectedBox det;
        det.class_id = class_id;
        det.box = BBox{static_cast<double>(min_x) / w,
                       static_cast<double>(min_y) / h,
                       static_cast<double>(max_x + 1) / w,
                       static_cast<double>(max_y + 1) / h};
        det.score = match_sum / area;
        detections.push_back(det);
      }
    }
  }
  return detections;
}

// -- PPM + archive I/O ---------------------------------------------------------

inline void write_ppm(const ToyScene& scene, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "P6\n" << scene.width << " " << scene.height << "\n255\n";
  for (int y = 0; y < scene.height; ++y) {
    for (int x = 0; x < scene.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = scene.channels > c ? scene.at(y, x, c) : 0.0;
        const int byte =
            std::clamp(static_cast<int>(std::lround(v * 255.0)), 0, 255);
        out.put(static_cast<char>(byte));
      }
    }
  }
  if (!out) throw DataError("short write: " + path);
}

inline ToyScene read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || w <= 0 || h <= 0 || maxval != 255)
    throw DataError("unsupported PPM header in " + path);
  in.get();  // single whitespace after header
  ToyScene scene = ToyScene::filled(h, w, 3, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const int byte = in.get();
        if (byte < 0) throw DataError("truncated PPM data in " + path);
        scene.at(y, x, c) = byte / 255.0;
      }
    }
  }
  return scene;
}

}  // namespace layoutkit::scenes
