// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared test support: a random generator of valid layout prompts, a
// brute-force assignment oracle, and an independently coded two-branch CFG.
// Everything here stays independent of the implementation paths it checks.

#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "layoutkit/bbox.hpp"
#include "layoutkit/guidance.hpp"
#include "layoutkit/icbp.hpp"
#include "layoutkit/rng.hpp"

namespace test_support {

using layoutkit::BBox;
using layoutkit::Rng;

inline BBox random_box(Rng& rng) {
  const int x1 = static_cast<int>(rng.uniform_int(0, 979));
  const int x2 = static_cast<int>(rng.uniform_int(x1 + 20, 1000));
  const int y1 = static_cast<int>(rng.uniform_int(0, 979));
  const int y2 = static_cast<int>(rng.uniform_int(y1 + 20, 1000));
  return BBox{x1 / 1000.0, y1 / 1000.0, x2 / 1000.0, y2 / 1000.0};
}

/// Random valid LayoutPrompt exercising plain spans, multi-word subjects,
/// count prefixes, multi-box tags, and reference suffixes. Plain text never
/// contains the reserved tag token or a digit-leading "from image" pattern,
/// and a sourced tag is never directly followed by a count-prefixed tag
/// (adjacent digit runs like "image2" + "4 dogs" are ambiguous bytes);
/// those are the only inputs outside the grammar's round-trip guarantee.
inline layoutkit::icbp::LayoutPrompt random_prompt(Rng& rng) {
  static const std::vector<std::string> kNouns = {
      "cat",   "dog",   "sofa", "ball",  "backpack", "bench",
      "yarn",  "lamp",  "tree", "car",   "bird",     "cup",
      "chair", "table", "boat", "plant", "kite",     "drum"};
  static const std::vector<std::string> kFiller = {
      "the",   "a",     "small", "large", "bright", "plays", "sits",
      "near",  "under", "over",  "sunny", "quiet",  "park",  "windowsill",
      "scene", "with",  "and",   "on",    "warm",   "grass"};

  layoutkit::icbp::LayoutPrompt prompt;
  const int n_tags = static_cast<int>(rng.uniform_int(0, 4));

  const auto plain_fragment = [&](bool leading_space, bool trailing_space) {
    std::string text;
    const int words = static_cast<int>(rng.uniform_int(1, 4));
    for (int w = 0; w < words; ++w) {
      if (w > 0 || leading_space) text += " ";
      text += kFiller[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(kFiller.size()) - 1))];
    }
    if (trailing_space) text += " ";
    return text;
  };

  bool prev_tag_sourced = false;
  for (int i = 0; i < n_tags; ++i) {
    const bool has_plain = rng.uniform() < 0.85;
    if (has_plain) prompt.spans.emplace_back(plain_fragment(i > 0, true));
    layoutkit::icbp::InstanceTag tag;
    tag.subject = kNouns[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(kNouns.size()) - 1))];
    if (rng.uniform() < 0.3)
      tag.subject += " " + kNouns[static_cast<std::size_t>(rng.uniform_int(
                               0, static_cast<std::int64_t>(kNouns.size()) - 1))];
    const bool digits_would_merge = prev_tag_sourced && !has_plain;
    tag.count = !digits_would_merge && rng.uniform() < 0.3
                    ? static_cast<int>(rng.uniform_int(2, 4))
                    : 1;
    for (int b = 0; b < tag.count; ++b) tag.boxes.push_back(random_box(rng));
    if (rng.uniform() < 0.4)
      tag.source_image = static_cast<int>(rng.uniform_int(1, 4));
    prev_tag_sourced = tag.source_image.has_value();
    prompt.spans.emplace_back(std::move(tag));
  }
  if (n_tags == 0 || rng.uniform() < 0.7) {
    std::string tail = plain_fragment(n_tags > 0, false);
    if (rng.uniform() < 0.5) tail += ".";
    prompt.spans.emplace_back(std::move(tail));
  }
  return prompt;
}

/// Exhaustive minimum-cost injective assignment; enumerates all mappings in
/// lexicographic order and keeps strictly better totals, so ties resolve to
/// the lexicographically smallest assignment.
struct BruteForceResult {
  std::vector<int> subject_to_box;
  double total = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

inline void brute_force_recurse(const std::vector<std::vector<double>>& cost,
                                std::size_t row, std::vector<bool>& used,
                                std::vector<int>& current, double running,
                                BruteForceResult& best) {
  if (row == cost.size()) {
    if (!best.feasible || running < best.total) {
      best.total = running;
      best.subject_to_box = current;
      best.feasible = true;
    }
    return;
  }
  for (std::size_t j = 0; j < cost[row].size(); ++j) {
    if (used[j]) continue;
    used[j] = true;
    current.push_back(static_cast<int>(j));
    brute_force_recurse(cost, row + 1, used, current, running + cost[row][j],
                        best);
    current.pop_back();
    used[j] = false;
  }
}

inline BruteForceResult brute_force_assign(
    const std::vector<std::vector<double>>& cost) {
  BruteForceResult best;
  if (cost.empty() || cost[0].size() < cost.size()) return best;
  std::vector<bool> used(cost[0].size(), false);
  std::vector<int> current;
  brute_force_recurse(cost, 0, used, current, 0.0, best);
  // Recompute the total in subject order so float summation order matches
  // the implementation under test.
  if (best.feasible) {
    best.total = 0.0;
    for (std::size_t i = 0; i < best.subject_to_box.size(); ++i)
      best.total += cost[i][best.subject_to_box[i]];
  }
  return best;
}

/// Directly coded two-branch text-image CFG, the backward-compatibility
/// reference for the hierarchical fusion path.
inline layoutkit::guidance::Velocity two_branch_cfg(
    const layoutkit::guidance::Velocity& v_full,
    const layoutkit::guidance::Velocity& v_text_drop,
    const layoutkit::guidance::Velocity& v_img_drop, double s_text,
    double s_img) {
  layoutkit::guidance::Velocity text_cfg = v_full;
  for (std::size_t i = 0; i < text_cfg.data.size(); ++i)
    text_cfg.data[i] =
        v_text_drop.data[i] + s_text * (v_full.data[i] - v_text_drop.data[i]);
  layoutkit::guidance::Velocity out = text_cfg;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] =
        v_img_drop.data[i] + s_img * (text_cfg.data[i] - v_img_drop.data[i]);
  return out;
}

}  // namespace test_support
