#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gcm/focal_iou.hpp"

namespace gcm {

struct Detection {
    std::string image_id;
    int class_id = 0;
    BBox box;
    double confidence = 0.0; // in [0,1]
};

struct GroundTruthBox {
    std::string image_id;
    int class_id = 0;
    BBox box;
};

/// Greedy matching outcome for one class at one IoU threshold.
/// Entries are ordered by descending confidence (stable on ties).
struct MatchResult {
    std::vector<std::size_t> det_index; // index into the input detection list
    std::vector<bool> tp;
    std::vector<double> iou;       // IoU with the matched ground truth, 0 if none
    std::vector<int> matched_gt;   // index into the input gt list, -1 if none
};

/// Confidence-descending greedy matching: each detection takes the best-IoU
/// unmatched ground truth of its image if that IoU >= iou_t; ground truths
/// match at most once. Caller scopes detections and gts to one class.
MatchResult match(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts,
                  double iou_t);

/// Cumulative (recall, precision) after each detection in confidence order.
struct PrCurve {
    std::vector<double> recall;
    std::vector<double> precision;
    std::vector<double> thresholds; // confidence at each point
};

/// flags/confidences must already be in confidence order. n_gt == 0 leaves
/// recall at 0 everywhere, which drives the AP of such classes to 0.
PrCurve pr_curve(const std::vector<bool>& flags, const std::vector<double>& confidences,
                 std::size_t n_gt);

enum class ApMode { AllPoint, Coco101 };

/// AllPoint integrates the precision envelope over recall; Coco101 averages
/// the envelope sampled at recalls {0.00, 0.01, ..., 1.00}.
double average_precision(const PrCurve& curve, ApMode mode);

/// Arithmetic mean; empty input is an error (mAP undefined).
double mean_ap(const std::vector<double>& per_class_ap);

struct ClassEval {
    int class_id = 0;
    std::size_t n_gt = 0;
    std::size_t n_det = 0;
    double ap = 0.0;
    bool in_mean = false; // classes absent from the ground truth are excluded
};

struct ThresholdEval {
    double iou_t = 0.0;
    std::vector<ClassEval> per_class;
    double map = 0.0;
};

/// One detailed match row for reporting (threshold 0.5 by convention).
struct MatchDetail {
    std::string image_id;
    int class_id = 0;
    double confidence = 0.0;
    bool tp = false;
    double iou = 0.0;
};

struct EvalResult {
    double map_50 = 0.0;
    double map_50_95 = 0.0;
    std::vector<ThresholdEval> thresholds;
    std::vector<MatchDetail> matches_at_50;
};

/// Default COCO-style threshold grid 0.50:0.05:0.95.
std::vector<double> default_thresholds();

/// Class-wise evaluation over a threshold list; mAP@range is the mean over
/// thresholds of the per-threshold class-mean AP.
EvalResult evaluate(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts,
                    const std::vector<double>& thresholds, ApMode mode = ApMode::AllPoint);

/// Mean over thresholds of the class-mean AP, as a single number.
double map_at_range(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts,
                    const std::vector<double>& thresholds, ApMode mode = ApMode::AllPoint);

} // namespace gcm
