// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Layout JSON interchange, used across the toolkit:
//   { "caption": str,
//     "instances": [ { "subject": str,
//                      "boxes": [[x1,y1,x2,y2], ...],
//                      "source_image": int|null } ] }

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "layoutkit/errors.hpp"
#include "layoutkit/icbp.hpp"

namespace layoutkit::icbp {

inline nlohmann::json layout_to_json(const LayoutPrompt& prompt) {
  nlohmann::json instances = nlohmann::json::array();
  for (const InstanceTag* tag : prompt.tags()) {
    nlohmann::json boxes = nlohmann::json::array();
    for (const BBox& b : tag->boxes)
      boxes.push_back({b.x1, b.y1, b.x2, b.y2});
    instances.push_back({{"subject", tag->subject},
                         {"boxes", std::move(boxes)},
                         {"source_image", tag->source_image
                                              ? nlohmann::json(*tag->source_image)
                                              : nlohmann::json(nullptr)}});
  }
  return {{"caption", prompt.original_caption()},
          {"instances", std::move(instances)}};
}

/// Builds a prompt by inserting each instance's tag right after the first
/// occurrence of its subject phrase in the caption (searching left to right,
/// later instances resume after the previous match).
inline LayoutPrompt layout_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("caption") || !j.contains("instances"))
    throw DataError("layout JSON requires 'caption' and 'instances'");
  const std::string caption = j.at("caption").get<std::string>();

  struct Insertion {
    std::size_t at;  // byte position in caption where the subject ends
    std::size_t subject_begin;
    InstanceTag tag;
  };
  std::vector<Insertion> insertions;
  std::size_t search_from = 0;
  for (const auto& inst : j.at("instances")) {
    InstanceTag tag;
    tag.subject = inst.at("subject").get<std::string>();
    if (tag.subject.empty()) throw DataError("instance subject is empty");
    for (const auto& b : inst.at("boxes")) {
      if (!b.is_array() || b.size() != 4)
        throw DataError("box must be [x1,y1,x2,y2]");
      tag.boxes.push_back(BBox{round3(b[0].get<double>()),
                               round3(b[1].get<double>()),
                               round3(b[2].get<double>()),
                               round3(b[3].get<double>())});
    }
    if (tag.boxes.empty()) throw DataError("instance has no boxes");
    tag.count = static_cast<int>(tag.boxes.size());
    if (inst.contains("source_image") && !inst.at("source_image").is_null())
      tag.source_image = inst.at("source_image").get<int>();

    const std::size_t at = caption.find(tag.subject, search_from);
    if (at == std::string::npos)
      throw DataError("subject '" + tag.subject + "' not found in caption");
    search_from = at + tag.subject.size();
    insertions.push_back({search_from, at, std::move(tag)});
  }

  LayoutPrompt prompt;
  std::size_t cursor = 0;
  for (auto& ins : insertions) {
    if (ins.subject_begin > cursor)
      prompt.spans.emplace_back(caption.substr(cursor, ins.subject_begin - cursor));
    prompt.spans.emplace_back(std::move(ins.tag));
    cursor = ins.at;
  }
  if (cursor < caption.size() || prompt.spans.empty())
    prompt.spans.emplace_back(caption.substr(cursor));
  return prompt;
}

}  // namespace layoutkit::icbp
