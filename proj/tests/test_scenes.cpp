// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>

#include <catch2/catch_amalgamated.hpp>

#include "layoutkit/metrics.hpp"
#include "layoutkit/rng.hpp"
#include "layoutkit/scenes.hpp"

using namespace layoutkit;
using namespace layoutkit::scenes;

TEST_CASE("sample_layout satisfies constraints deterministically", "[scenes]") {
  LayoutConfig cfg;
  cfg.n_min = 2;
  cfg.n_max = 2;
  cfg.max_overlap_iou = 0.0;
  Rng a(5), b(5);
  const LayoutSpec sa = sample_layout(a, cfg);
  const LayoutSpec sb = sample_layout(b, cfg);
  REQUIRE(sa.instances.size() == 2);
  CHECK(iou(sa.instances[0].box, sa.instances[1].box) == 0.0);
  REQUIRE(sb.instances.size() == sa.instances.size());
  for (std::size_t i = 0; i < sa.instances.size(); ++i) {
    CHECK(sa.instances[i].class_id == sb.instances[i].class_id);
    CHECK(sa.instances[i].box == sb.instances[i].box);
  }
  CHECK(sa.instances[0].class_id != sa.instances[1].class_id);
}

TEST_CASE("sample_layout covers every level over many draws", "[scenes]") {
  LayoutConfig cfg;  // n in [2,6]
  std::array<int, 7> seen{};
  for (int i = 0; i < 3000; ++i) {
    Rng rng(1000 + i);
    const LayoutSpec spec = sample_layout(rng, cfg);
    REQUIRE(spec.instances.size() >= 2);
    REQUIRE(spec.instances.size() <= 6);
    seen[spec.instances.size()] += 1;
  }
  for (int level = 2; level <= 6; ++level) CHECK(seen[level] > 0);
}

TEST_CASE("render paints by pixel centers in instance order", "[scenes]") {
  LayoutSpec spec;
  spec.instances.push_back({0, BBox{0.25, 0.25, 0.75, 0.75}});
  const Palette palette = default_palette();
  const ToyScene scene = render(spec, palette);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      const bool inside = x >= 8 && x < 24 && y >= 8 && y < 24;
      CHECK(scene.at(y, x, 0) == (inside ? 1.0 : 0.0));
      CHECK(scene.at(y, x, 1) == 0.0);
      CHECK(scene.at(y, x, 2) == 0.0);
    }
  }

  // Zero instances: uniform background.
  const ToyScene empty = render(LayoutSpec{}, palette);
  for (double v : empty.pixels) CHECK(v == 0.0);

  // Painter's order: the later instance wins the overlap.
  LayoutSpec overlap;
  overlap.instances.push_back({0, BBox{0.25, 0.25, 0.75, 0.75}});
  overlap.instances.push_back({1, BBox{0.5, 0.5, 0.9, 0.9}});
  const ToyScene painted = render(overlap, palette);
  CHECK(painted.at(20, 20, 0) == 0.0);  // green, not red
  CHECK(painted.at(20, 20, 1) == 1.0);
  CHECK(painted.at(10, 10, 0) == 1.0);  // red survives outside the overlap
}

TEST_CASE("detect recovers rendered layouts within one pixel", "[scenes]") {
  const Palette palette = default_palette();
  LayoutConfig cfg;
  cfg.max_overlap_iou = 0.0;
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Rng rng(50000 + trial);
    const LayoutSpec spec = sample_layout(rng, cfg);
    const std::vector<DetectedBox> dets = detect(render(spec, palette), palette);
    REQUIRE(dets.size() == spec.instances.size());
    for (const auto& inst : spec.instances) {
      const DetectedBox* found = nullptr;
      for (const auto& det : dets)
        if (det.class_id == inst.class_id) found = &det;
      REQUIRE(found != nullptr);
      const double tol = 1.0 / 32.0 + 1e-9;
      CHECK(std::abs(found->box.x1 - inst.box.x1) <= tol);
      CHECK(std::abs(found->box.y1 - inst.box.y1) <= tol);
      CHECK(std::abs(found->box.x2 - inst.box.x2) <= tol);
      CHECK(std::abs(found->box.y2 - inst.box.y2) <= tol);
      CHECK(found->score == 1.0);  // rendered colors match exactly
      ++checked;
    }
  }
  CHECK(checked > 600);
}

TEST_CASE("detect handles empty scenes and split blobs", "[scenes]") {
  const Palette palette = default_palette();
  const ToyScene background = ToyScene::filled(32, 32, 3, 0.0);
  CHECK(detect(background, palette).empty());

  // Two disjoint blobs of one color yield two boxes of that class.
  LayoutSpec spec;
  spec.instances.push_back({2, BBox{0.1, 0.1, 0.3, 0.3}});
  spec.instances.push_back({2, BBox{0.6, 0.6, 0.9, 0.9}});
  const auto dets = detect(render(spec, palette), palette);
  REQUIRE(dets.size() == 2);
  CHECK(dets[0].class_id == 2);
  CHECK(dets[1].class_id == 2);

  // Tiny specks below the area threshold are ignored.
  ToyScene speck = ToyScene::filled(32, 32, 3, 0.0);
  speck.at(5, 5, 0) = 1.0;
  speck.at(5, 6, 0) = 1.0;
  CHECK(detect(speck, palette).empty());
}

TEST_CASE("detect tolerates blurred colors within the tolerance", "[scenes]") {
  const Palette palette = default_palette();
  LayoutSpec spec;
  spec.instances.push_back({0, BBox{0.25, 0.25, 0.75, 0.75}});
  ToyScene scene = render(spec, palette);
  for (double& v : scene.pixels) v = std::clamp(v * 0.85 + 0.05, 0.0, 1.0);
  const auto dets = detect(scene, palette);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].class_id == 0);
  CHECK(dets[0].score > 0.0);
  CHECK(dets[0].score < 1.0);
}

TEST_CASE("PPM round-trip preserves the raster to 8-bit precision",
          "[scenes]") {
  Rng rng(77);
  ToyScene scene = ToyScene::filled(16, 24, 3, 0.0);
  for (double& v : scene.pixels) v = rng.uniform();
  const auto dir = std::filesystem::temp_directory_path() / "layoutkit_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "roundtrip.ppm").string();
  write_ppm(scene, path);
  const ToyScene back = read_ppm(path);
  REQUIRE(back.width == 24);
  REQUIRE(back.height == 16);
  for (std::size_t i = 0; i < scene.pixels.size(); ++i)
    CHECK(std::abs(back.pixels[i] - scene.pixels[i]) <= 0.5 / 255.0 + 1e-12);
  std::filesystem::remove(path);
}
