// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "layoutkit/metrics.hpp"
#include "layoutkit/rng.hpp"

using namespace layoutkit;
using namespace layoutkit::metrics;

namespace {

EvalRecord record_with_ious(const std::vector<double>& target_ious) {
  // One GT box per requested IoU; a detection of the same class is placed to
  // achieve the IoU analytically: det shares y-extent and x1, with width
  // w*iou/(2-iou)... simpler: same box shrunk along x so that
  // inter = w' * h, union = w * h, iou = w'/w... that holds only when the
  // shrunk box is inside. Use x-subinterval boxes.
  EvalRecord rec;
  for (std::size_t i = 0; i < target_ious.size(); ++i) {
    const double y0 = 0.02 + 0.16 * static_cast<double>(i);
    const BBox gt{0.1, y0, 0.6, y0 + 0.1};  // width 0.5
    rec.gt.push_back({static_cast<int>(i), gt});
    const double iou_target = target_ious[i];
    if (iou_target > 0.0) {
      // det = gt with x2 pulled in: inter/union = w'/w.
      const double w = gt.width() * iou_target;
      rec.detections.push_back(
          {static_cast<int>(i), BBox{gt.x1, gt.y1, gt.x1 + w, gt.y2}, 0.9});
    }
  }
  return rec;
}

}  // namespace

TEST_CASE("iou fixtures", "[metrics]") {
  const BBox a{0.0, 0.0, 0.5, 0.5};
  const BBox b{0.25, 0.25, 0.75, 0.75};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, BBox{0.6, 0.6, 0.9, 0.9}) == 0.0);
  CHECK(iou(a, b) == Catch::Approx(1.0 / 7.0).epsilon(1e-12));
  CHECK(iou(a, b) == iou(b, a));
}

TEST_CASE("iou shrinks monotonically toward disjointness", "[metrics]") {
  const BBox gt{0.2, 0.2, 0.6, 0.6};
  double prev = 1.0;
  for (int step = 0; step <= 10; ++step) {
    const double shift = 0.06 * step;
    const BBox moved{0.2 + shift, 0.2, 0.6 + shift, 0.6};
    const double v = iou(gt, moved);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("match_instances applies class gating and greedy score order",
          "[metrics]") {
  // Single pair above threshold.
  {
    const std::vector<GroundTruth> gt = {{0, BBox{0.1, 0.1, 0.5, 0.5}}};
    const std::vector<Detection> det = {{0, BBox{0.1, 0.1, 0.5, 0.34}, 0.9}};
    const MatchResult m = match_instances(gt, det);
    REQUIRE(m.per_gt.size() == 1);
    CHECK(m.per_gt[0].detection == 0);
    CHECK(m.per_gt[0].achieved_iou == Catch::Approx(0.6).margin(1e-9));
    CHECK(m.per_gt[0].success);
  }
  // Wrong class never matches.
  {
    const std::vector<GroundTruth> gt = {{0, BBox{0.1, 0.1, 0.5, 0.5}}};
    const std::vector<Detection> det = {{1, BBox{0.1, 0.1, 0.5, 0.5}, 0.99}};
    const MatchResult m = match_instances(gt, det);
    CHECK_FALSE(m.per_gt[0].detection.has_value());
    CHECK(m.per_gt[0].achieved_iou == 0.0);
  }
  // One detection overlapping two GTs claims the higher-IoU one.
  {
    const std::vector<GroundTruth> gt = {{0, BBox{0.0, 0.0, 0.35, 1.0}},
                                         {0, BBox{0.3, 0.0, 0.6, 1.0}}};
    const std::vector<Detection> det = {{0, BBox{0.0, 0.0, 0.4, 1.0}, 0.8}};
    const MatchResult m = match_instances(gt, det);
    CHECK(m.per_gt[0].detection == 0);
    CHECK_FALSE(m.per_gt[1].detection.has_value());
  }
}

TEST_CASE("instance success ratio pools instances and is strict at 0.5",
          "[metrics]") {
  const std::vector<EvalRecord> records = {record_with_ious({0.6, 0.4, 0.9})};
  const LevelRatios r = instance_success_ratio(records);
  CHECK(r.average == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
  REQUIRE(r.per_level.count(3) == 1);
  CHECK(r.per_level.at(3) == Catch::Approx(2.0 / 3.0).epsilon(1e-12));

  // IoU of exactly 0.5 (power-of-two coordinates, no rounding) fails.
  EvalRecord boundary;
  boundary.gt.push_back({0, BBox{0.0, 0.0, 0.5, 0.5}});
  boundary.detections.push_back({0, BBox{0.0, 0.0, 0.25, 0.5}, 1.0});
  REQUIRE(iou(boundary.gt[0].box, boundary.detections[0].box) == 0.5);
  const LevelRatios rb = instance_success_ratio({boundary});
  CHECK(rb.average == 0.0);

  const std::vector<EvalRecord> perfect = {record_with_ious({1.0, 1.0})};
  CHECK(instance_success_ratio(perfect).average == 1.0);
}

TEST_CASE("image success ratio requires every instance to pass", "[metrics]") {
  const std::vector<EvalRecord> pass = {record_with_ious({0.6, 0.9})};
  CHECK(image_success_ratio(pass).average == 1.0);
  const std::vector<EvalRecord> fail = {record_with_ious({0.6, 0.4})};
  CHECK(image_success_ratio(fail).average == 0.0);
  // Per-image implication: success means all instances succeeded.
  const LevelRatios inst = instance_success_ratio(pass);
  CHECK(inst.average == 1.0);
}

TEST_CASE("levels without records stay absent rather than zero", "[metrics]") {
  const std::vector<EvalRecord> records = {record_with_ious({0.9, 0.9}),
                                           record_with_ious({0.9, 0.2, 0.9})};
  const LevelRatios r = instance_success_ratio(records);
  CHECK(r.per_level.count(2) == 1);
  CHECK(r.per_level.count(3) == 1);
  CHECK(r.per_level.count(4) == 0);
  // Pooled average: 4 successes out of 5 instances.
  CHECK(r.average == Catch::Approx(4.0 / 5.0).epsilon(1e-12));
}

TEST_CASE("mean_iou averages achieved IoU over instances", "[metrics]") {
  CHECK(mean_iou({record_with_ious({1.0, 1.0})}) ==
        Catch::Approx(1.0).margin(1e-9));
  CHECK(mean_iou({record_with_ious({0.5, 0.0})}) ==
        Catch::Approx(0.25).margin(1e-9));
  EvalRecord none = record_with_ious({0.7});
  none.detections.clear();
  CHECK(mean_iou({none}) == 0.0);
}

TEST_CASE("average precision single-detection fixture", "[metrics]") {
  const std::vector<EvalRecord> records = {record_with_ious({0.6})};
  const ApResult ap = average_precision(records);
  CHECK(ap.ap50 == Catch::Approx(1.0).margin(1e-9));
  CHECK(ap.ap75 == Catch::Approx(0.0).margin(1e-9));
  // Thresholds 0.50/0.55/0.60 pass out of ten.
  CHECK(ap.ap == Catch::Approx(0.3).margin(1e-9));
}

TEST_CASE("average precision on perfect and empty detections", "[metrics]") {
  const std::vector<EvalRecord> perfect = {record_with_ious({1.0, 1.0, 1.0})};
  const ApResult ap = average_precision(perfect);
  CHECK(ap.ap == Catch::Approx(1.0).margin(1e-9));
  CHECK(ap.ap50 == Catch::Approx(1.0).margin(1e-9));
  CHECK(ap.ap75 == Catch::Approx(1.0).margin(1e-9));

  EvalRecord none = record_with_ious({0.9});
  none.detections.clear();
  const ApResult zero = average_precision({none});
  CHECK(zero.ap == 0.0);
  CHECK(zero.ap50 == 0.0);
  CHECK(zero.ap75 == 0.0);
}

TEST_CASE("average precision penalizes low-scored false positives after recall",
          "[metrics]") {
  // One GT matched by a high-scored detection plus a low-scored FP: the
  // PR curve reaches recall 1 at precision 1, so AP50 stays 1.
  EvalRecord rec = record_with_ious({0.8});
  rec.detections.push_back({0, BBox{0.7, 0.7, 0.9, 0.9}, 0.1});
  const ApResult ap = average_precision({rec});
  CHECK(ap.ap50 == Catch::Approx(1.0).margin(1e-9));

  // Flip the scores and the FP precedes the TP: precision at full recall
  // is 0.5, and the 101-point average reflects it.
  EvalRecord flipped = record_with_ious({0.8});
  flipped.detections[0].score = 0.1;
  flipped.detections.push_back({0, BBox{0.7, 0.7, 0.9, 0.9}, 0.9});
  const ApResult ap2 = average_precision({flipped});
  CHECK(ap2.ap50 == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("aggregate_similarity means scores and reports failures",
          "[metrics]") {
  std::vector<SimilarityPair> pairs(10);
  const SimilaritySummary constant = aggregate_similarity(
      pairs, [](const SimilarityPair&) { return 0.5; }, "constant");
  REQUIRE(constant.mean.has_value());
  CHECK(*constant.mean == Catch::Approx(0.5).margin(1e-12));
  CHECK(constant.scored == 10);

  const SimilaritySummary empty = aggregate_similarity(
      {}, [](const SimilarityPair&) { return 1.0; }, "constant");
  CHECK_FALSE(empty.mean.has_value());

  int calls = 0;
  const SimilaritySummary flaky = aggregate_similarity(
      pairs,
      [&calls](const SimilarityPair&) -> double {
        if (++calls % 2 == 0) throw std::runtime_error("scorer down");
        return 1.0;
      },
      "flaky");
  CHECK(flaky.scored == 5);
  CHECK(flaky.failed == 5);
  CHECK(*flaky.mean == Catch::Approx(1.0).margin(1e-12));

  const SimilaritySummary cosine = aggregate_similarity(
      pairs, [](const SimilarityPair&) { return -1.0; }, "cosine",
      ScorerRange::Cosine);
  CHECK(*cosine.mean == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("IoU stub scorer reproduces mean_iou under the same matching",
          "[metrics]") {
  const std::vector<EvalRecord> records = {record_with_ious({0.6, 0.0, 0.9})};
  std::vector<SimilarityPair> pairs;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const MatchResult m = match_instances(records[r].gt, records[r].detections);
    for (std::size_t g = 0; g < m.per_gt.size(); ++g) {
      SimilarityPair pair;
      pair.image_index = static_cast<int>(r);
      pair.instance_index = static_cast<int>(g);
      pair.reference_box = records[r].gt[g].box;
      pair.generated_box = m.per_gt[g].detection
                               ? records[r].detections[*m.per_gt[g].detection].box
                               : BBox{0.0, 0.0, 0.0, 0.0};
      pairs.push_back(pair);
    }
  }
  const SimilaritySummary stub = aggregate_similarity(
      pairs,
      [](const SimilarityPair& p) { return iou(p.generated_box, p.reference_box); },
      "iou-stub");
  REQUIRE(stub.mean.has_value());
  CHECK(*stub.mean == Catch::Approx(mean_iou(records)).margin(1e-12));
}

TEST_CASE("report JSON and CSV carry the published fields", "[metrics]") {
  const std::vector<EvalRecord> records = {record_with_ious({0.6, 0.9}),
                                           record_with_ious({0.9, 0.2, 0.9})};
  const ScoreSummary s = score_records(records);
  const nlohmann::json j = summary_to_json(s);
  CHECK(j.at("matcher") == "greedy-coco");
  CHECK(j.at("pooling") == "instances");
  CHECK(j.at("n_images") == 2);
  CHECK(j.at("instance_sr").contains("L2"));
  CHECK(j.at("instance_sr").contains("avg"));
  CHECK(j.at("miou").get<double>() >= 0.0);

  const std::string csv = summary_to_csv(s);
  CHECK(csv.find("instance_sr_L2") != std::string::npos);
  CHECK(csv.find("miou,ap,ap50,ap75") != std::string::npos);
  // Header plus one data row.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("all ratios stay in [0,1] on random records", "[metrics]") {
  Rng rng(99);
  std::vector<EvalRecord> records;
  for (int i = 0; i < 40; ++i) {
    EvalRecord rec;
    const int n = static_cast<int>(rng.uniform_int(2, 6));
    for (int g = 0; g < n; ++g) {
      const double x1 = rng.uniform(0.0, 0.6);
      const double y1 = rng.uniform(0.0, 0.6);
      rec.gt.push_back({static_cast<int>(rng.uniform_int(0, 3)),
                        BBox{x1, y1, x1 + 0.3, y1 + 0.3}});
    }
    const int nd = static_cast<int>(rng.uniform_int(0, 8));
    for (int d = 0; d < nd; ++d) {
      const double x1 = rng.uniform(0.0, 0.6);
      const double y1 = rng.uniform(0.0, 0.6);
      rec.detections.push_back({static_cast<int>(rng.uniform_int(0, 3)),
                                BBox{x1, y1, x1 + 0.3, y1 + 0.3},
                                rng.uniform()});
    }
    records.push_back(std::move(rec));
  }
  const ScoreSummary s = score_records(records);
  for (double v : {s.instance_sr.average, s.image_sr.average, s.miou, s.ap,
                   s.ap50, s.ap75}) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  // Determinism given identical records.
  const ScoreSummary again = score_records(records);
  CHECK(again.miou == s.miou);
  CHECK(again.ap == s.ap);
}
