// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Layout evaluation suite: per-instance greedy matching, instance/image
// success ratios binned by instance count (L2-L6), mean IoU, and COCO-style
// average precision (101-point interpolation, IoU thresholds 0.50:0.05:0.95).
// Success uses strict IoU > 0.5. Ratios marked "avg" pool over instances or
// images, not over level means.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "layoutkit/bbox.hpp"
#include "layoutkit/errors.hpp"

namespace layoutkit::metrics {

struct GroundTruth {
  int class_id = 0;
  BBox box;
};

struct Detection {
  int class_id = 0;
  BBox box;
  double score = 1.0;
};

struct EvalRecord {
  std::vector<GroundTruth> gt;          // nonempty
  std::vector<Detection> detections;

  int level() const { return static_cast<int>(gt.size()); }
};

struct InstanceMatch {
  std::optional<int> detection;  // index into record.detections
  double achieved_iou = 0.0;
  bool success = false;          // achieved_iou > 0.5, strict
};

struct MatchResult {
  std::vector<InstanceMatch> per_gt;  // parallel to record.gt
};

namespace detail {

/// Detection order used everywhere: score descending, original index as the
/// deterministic tie-break.
inline std::vector<int> score_order(const std::vector<Detection>& dets) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dets[a].score > dets[b].score;
  });
  return order;
}

}  // namespace detail

/// Greedy class-gated matching: in score order, each detection claims the
/// still-unmatched ground-truth instance of its class with the highest
/// (positive) IoU. Unmatched instances keep IoU 0.
inline MatchResult match_instances(const std::vector<GroundTruth>& gt,
                                   const std::vector<Detection>& detections) {
  MatchResult result;
  result.per_gt.assign(gt.size(), InstanceMatch{});
  std::vector<bool> taken(gt.size(), false);

  for (int det_idx : detail::score_order(detections)) {
    const Detection& det = detections[det_idx];
    int best_gt = -1;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (taken[g] || gt[g].class_id != det.class_id) continue;
      const double overlap = iou(gt[g].box, det.box);
      if (overlap > best_iou) {
        best_iou = overlap;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0) {
      taken[best_gt] = true;
      result.per_gt[best_gt] = {det_idx, best_iou, best_iou > 0.5};
    }
  }
  return result;
}

struct LevelRatios {
  std::map<int, double> per_level;  // keyed by instance count; absent if empty
  double average = 0.0;             // pooled, not mean-of-levels
};

inline LevelRatios instance_success_ratio(
    const std::vector<EvalRecord>& records) {
  std::map<int, std::pair<long, long>> counts;  // level -> (success, total)
  long pooled_success = 0, pooled_total = 0;
  for (const auto& rec : records) {
    const MatchResult match = match_instances(rec.gt, rec.detections);
    auto& [success, total] = counts[rec.level()];
    for (const auto& m : match.per_gt) {
      success += m.success ? 1 : 0;
      ++total;
    }
    for (const auto& m : match.per_gt) pooled_success += m.success ? 1 : 0;
    pooled_total += static_cast<long>(match.per_gt.size());
  }
  LevelRatios out;
  for (const auto& [level, sc] : counts)
    out.per_level[level] = static_cast<double>(sc.first) / sc.second;
  out.average =
      pooled_total > 0 ? static_cast<double>(pooled_success) / pooled_total : 0.0;
  return out;
}

inline LevelRatios image_success_ratio(const std::vector<EvalRecord>& records) {
  std::map<int, std::pair<long, long>> counts;  // level -> (success, total)
  long pooled_success = 0, pooled_total = 0;
  for (const auto& rec : records) {
    const MatchResult match = match_instances(rec.gt, rec.detections);
    const bool all = std::all_of(match.per_gt.begin(), match.per_gt.end(),
                                 [](const InstanceMatch& m) { return m.success; });
    auto& [success, total] = counts[rec.level()];
    success += all ? 1 : 0;
    ++total;
    pooled_success += all ? 1 : 0;
    ++pooled_total;
  }
  LevelRatios out;
  for (const auto& [level, sc] : counts)
    out.per_level[level] = static_cast<double>(sc.first) / sc.second;
  out.average =
      pooled_total > 0 ? static_cast<double>(pooled_success) / pooled_total : 0.0;
  return out;
}

/// Mean achieved IoU over all ground-truth instances (unmatched contribute 0).
inline double mean_iou(const std::vector<EvalRecord>& records) {
  double sum = 0.0;
  long total = 0;
  for (const auto& rec : records) {
    const MatchResult match = match_instances(rec.gt, rec.detections);
    for (const auto& m : match.per_gt) sum += m.achieved_iou;
    total += static_cast<long>(match.per_gt.size());
  }
  return total > 0 ? sum / total : 0.0;
}

struct ApResult {
  double ap = 0.0;    // mean over all thresholds
  double ap50 = 0.0;  // threshold 0.50
  double ap75 = 0.0;  // threshold 0.75
};

inline std::vector<double> coco_thresholds() {
  std::vector<double> t;
  for (int k = 50; k <= 95; k += 5) t.push_back(k / 100.0);
  return t;
}

namespace detail {

/// Single-class AP at one IoU threshold: score-ranked greedy matching,
/// precision-recall curve, 101-point interpolated average.
inline double class_ap(const std::vector<EvalRecord>& records, int class_id,
                       double threshold) {
  struct Ranked {
    double score;
    int record;
    int det;
  };
  std::vector<Ranked> ranked;
  long n_gt = 0;
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (const auto& g : records[r].gt)
      if (g.class_id == class_id) ++n_gt;
    for (std::size_t d = 0; d < records[r].detections.size(); ++d)
      if (records[r].detections[d].class_id == class_id)
        ranked.push_back({records[r].detections[d].score,
                          static_cast<int>(r), static_cast<int>(d)});
  }
  if (n_gt == 0) return 0.0;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Ranked& a, const Ranked& b) {
                     return a.score > b.score;
                   });

  std::map<int, std::vector<bool>> gt_taken;
  for (std::size_t r = 0; r < records.size(); ++r)
    gt_taken[static_cast<int>(r)].assign(records[r].gt.size(), false);

  std::vector<double> precisions, recalls;
  long tp = 0, fp = 0;
  for (const auto& entry : ranked) {
    const auto& rec = records[entry.record];
    const BBox& det_box = rec.detections[entry.det].box;
    int best_gt = -1;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < rec.gt.size(); ++g) {
      if (rec.gt[g].class_id != class_id || gt_taken[entry.record][g]) continue;
      const double overlap = iou(rec.gt[g].box, det_box);
      if (overlap > best_iou) {
        best_iou = overlap;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0 && best_iou >= threshold) {
      gt_taken[entry.record][best_gt] = true;
      ++tp;
    } else {
      ++fp;
    }
    precisions.push_back(static_cast<double>(tp) / (tp + fp));
    recalls.push_back(static_cast<double>(tp) / n_gt);
  }

  // Interpolated precision is the running max from the high-recall end.
  for (int i = static_cast<int>(precisions.size()) - 2; i >= 0; --i)
    precisions[i] = std::max(precisions[i], precisions[i + 1]);

  double ap_sum = 0.0;
  std::size_t idx = 0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    while (idx < recalls.size() && recalls[idx] < r - 1e-12) ++idx;
    if (idx < recalls.size()) ap_sum += precisions[idx];
  }
  return ap_sum / 101.0;
}

}  // namespace detail

/// COCO-style AP averaged over classes that carry ground truth, then over
/// thresholds. ap50/ap75 are read from the matching threshold when present.
inline ApResult average_precision(
    const std::vector<EvalRecord>& records,
    const std::vector<double>& thresholds = coco_thresholds()) {
  std::vector<int> classes;
  for (const auto& rec : records)
    for (const auto& g : rec.gt)
      if (std::find(classes.begin(), classes.end(), g.class_id) ==
          classes.end())
        classes.push_back(g.class_id);
  std::sort(classes.begin(), classes.end());

  ApResult out;
  if (classes.empty() || thresholds.empty()) return out;
  double total = 0.0;
  for (double t : thresholds) {
    double class_sum = 0.0;
    for (int c : classes) class_sum += detail::class_ap(records, c, t);
    const double mean_over_classes = class_sum / classes.size();
    total += mean_over_classes;
    if (std::abs(t - 0.50) < 1e-9) out.ap50 = mean_over_classes;
    if (std::abs(t - 0.75) < 1e-9) out.ap75 = mean_over_classes;
  }
  out.ap = total / thresholds.size();
  return out;
}

// -- pluggable similarity scorers ----------------------------------------------

struct SimilarityPair {
  int image_index = 0;
  int instance_index = 0;
  BBox generated_box;
  BBox reference_box;
};

using SimilarityScorer = std::function<double(const SimilarityPair&)>;

enum class ScorerRange { Unit, Cosine };  // Cosine maps [-1,1] to [0,1]

struct SimilaritySummary {
  std::optional<double> mean;  // absent for an empty pair set
  int scored = 0;
  int failed = 0;              // pairs whose scorer threw
  std::string scorer_name;
};

inline SimilaritySummary aggregate_similarity(
    const std::vector<SimilarityPair>& pairs, const SimilarityScorer& scorer,
    const std::string& scorer_name, ScorerRange range = ScorerRange::Unit) {
  SimilaritySummary out;
  out.scorer_name = scorer_name;
  double sum = 0.0;
  for (const auto& pair : pairs) {
    double value;
    try {
      value = scorer(pair);
    } catch (const std::exception&) {
      ++out.failed;
      continue;
    }
    if (range == ScorerRange::Cosine) value = (value + 1.0) / 2.0;
    sum += value;
    ++out.scored;
  }
  if (out.scored > 0) out.mean = sum / out.scored;
  return out;
}

// -- report -------------------------------------------------------------------

struct ScoreSummary {
  LevelRatios instance_sr;
  LevelRatios image_sr;
  double miou = 0.0;
  double ap = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
  int n_images = 0;
  std::optional<double> clip_t_mean;
  std::optional<double> dino_mean;
};

inline ScoreSummary score_records(const std::vector<EvalRecord>& records) {
  ScoreSummary s;
  s.instance_sr = instance_success_ratio(records);
  s.image_sr = image_success_ratio(records);
  s.miou = mean_iou(records);
  const ApResult ap = average_precision(records);
  s.ap = ap.ap;
  s.ap50 = ap.ap50;
  s.ap75 = ap.ap75;
  s.n_images = static_cast<int>(records.size());
  return s;
}

inline nlohmann::json ratios_to_json(const LevelRatios& ratios) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [level, value] : ratios.per_level)
    j["L" + std::to_string(level)] = value;
  j["avg"] = ratios.average;
  return j;
}

inline nlohmann::json summary_to_json(const ScoreSummary& s) {
  nlohmann::json j{{"instance_sr", ratios_to_json(s.instance_sr)},
                   {"image_sr", ratios_to_json(s.image_sr)},
                   {"miou", s.miou},
                   {"ap", s.ap},
                   {"ap50", s.ap50},
                   {"ap75", s.ap75},
                   {"n_images", s.n_images},
                   {"matcher", "greedy-coco"},
                   {"pooling", "instances"}};
  if (s.clip_t_mean) j["clip_t_mean"] = *s.clip_t_mean;
  if (s.dino_mean) j["dino_mean"] = *s.dino_mean;
  return j;
}

/// CSV mirror of the summary: instance SR L2-L6 and avg, image SR L2-L6 and
/// avg, then miou/ap/ap50/ap75. Absent levels leave empty cells.
inline std::string summary_to_csv(const ScoreSummary& s) {
  std::ostringstream header, row;
  row.setf(std::ios::fixed);
  row.precision(6);
  const auto emit_ratios = [&](const char* prefix, const LevelRatios& r) {
    for (int level = 2; level <= 6; ++level) {
      header << prefix << "_L" << level << ",";
      const auto it = r.per_level.find(level);
      if (it != r.per_level.end()) row << it->second;
      row << ",";
    }
    header << prefix << "_avg,";
    row << r.average << ",";
  };
  emit_ratios("instance_sr", s.instance_sr);
  emit_ratios("image_sr", s.image_sr);
  header << "miou,ap,ap50,ap75";
  row << s.miou << "," << s.ap << "," << s.ap50 << "," << s.ap75;
  return header.str() + "\n" + row.str() + "\n";
}

}  // namespace layoutkit::metrics
