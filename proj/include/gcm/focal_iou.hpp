#pragma once

#include <array>
#include <utility>
#include <vector>

namespace gcm {

/// Axis-aligned box; x2 >= x1 and y2 >= y1, zero-area boxes permitted.
struct BBox {
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
    double area() const { return (x2 - x1) * (y2 - y1); }
};

struct FocalIouConfig {
    double iou_thresh = 0.5;
    double alpha_high = 1.0;
    double alpha_low = 0.25;
    double focusing_gamma = 2.0; // loss exponent, distinct from image gamma
};

enum class Quality { High, Low };

struct SampleLoss {
    double iou;
    Quality quality;
    double alpha;
    double loss;
};

/// Intersection / union in [0,1]; 0 when the union has zero area.
double iou(const BBox& a, const BBox& b);

/// High quality iff iou >= iou_thresh (the boundary counts as high).
std::pair<Quality, double> partition(double iou_val, const FocalIouConfig& cfg);

/// High: 1 - iou. Low: alpha_low * (1 - iou)^focusing_gamma.
SampleLoss sample_loss(const BBox& pred, const BBox& target, const FocalIouConfig& cfg);

/// Sum of per-sample losses with per-branch alpha and exponent; empty -> 0.
/// normalize divides by the sample count.
double batch_loss(const std::vector<std::pair<BBox, BBox>>& pairs, const FocalIouConfig& cfg,
                  bool normalize = false);

/// d(iou)/d(pred coordinates) as (x1, y1, x2, y2); piecewise analytic.
std::array<double, 4> iou_gradient(const BBox& pred, const BBox& target);

/// Exact gradient of sample_loss w.r.t. the predicted box coordinates.
/// At iou == iou_thresh the high-quality branch applies. Throws when the
/// union area is zero (gradient undefined).
std::array<double, 4> loss_gradient(const BBox& pred, const BBox& target,
                                    const FocalIouConfig& cfg);

} // namespace gcm
