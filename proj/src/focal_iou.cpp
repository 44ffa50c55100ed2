#include "gcm/focal_iou.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gcm/errors.hpp"

namespace gcm {

namespace {

void check_box(const BBox& b, const char* who) {
    if (!(b.x2 >= b.x1) || !(b.y2 >= b.y1)) {
        throw ValueError(std::string(who) + ": inverted box coordinates");
    }
    if (!std::isfinite(b.x1) || !std::isfinite(b.y1) || !std::isfinite(b.x2) ||
        !std::isfinite(b.y2)) {
        throw ValueError(std::string(who) + ": non-finite box coordinates");
    }
}

void check_config(const FocalIouConfig& cfg) {
    if (!(cfg.iou_thresh >= 0.0 && cfg.iou_thresh <= 1.0)) {
        throw ValueError("focal iou: iou_thresh must lie in [0,1]");
    }
    if (!(cfg.alpha_high >= 0.0 && cfg.alpha_high <= 1.0) ||
        !(cfg.alpha_low >= 0.0 && cfg.alpha_low <= 1.0)) {
        throw ValueError("focal iou: alpha factors must lie in [0,1]");
    }
    if (!(cfg.focusing_gamma >= 0.0)) throw ValueError("focal iou: focusing_gamma must be >= 0");
}

} // namespace

double iou(const BBox& a, const BBox& b) {
    check_box(a, "iou");
    check_box(b, "iou");
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

std::pair<Quality, double> partition(double iou_val, const FocalIouConfig& cfg) {
    check_config(cfg);
    if (iou_val >= cfg.iou_thresh) return {Quality::High, cfg.alpha_high};
    return {Quality::Low, cfg.alpha_low};
}

SampleLoss sample_loss(const BBox& pred, const BBox& target, const FocalIouConfig& cfg) {
    const double v = iou(pred, target);
    const auto [quality, alpha] = partition(v, cfg);
    const double loss = quality == Quality::High
                            ? 1.0 - v
                            : cfg.alpha_low * std::pow(1.0 - v, cfg.focusing_gamma);
    return SampleLoss{v, quality, alpha, loss};
}

double batch_loss(const std::vector<std::pair<BBox, BBox>>& pairs, const FocalIouConfig& cfg,
                  bool normalize) {
    check_config(cfg);
    double total = 0.0;
    for (const auto& [pred, target] : pairs) {
        total += sample_loss(pred, target, cfg).loss;
    }
    if (normalize && !pairs.empty()) total /= static_cast<double>(pairs.size());
    return total;
}

std::array<double, 4> iou_gradient(const BBox& p, const BBox& t) {
    check_box(p, "iou_gradient");
    check_box(t, "iou_gradient");
    const double iw = std::min(p.x2, t.x2) - std::max(p.x1, t.x1);
    const double ih = std::min(p.y2, t.y2) - std::max(p.y1, t.y1);
    const bool overlap = iw > 0.0 && ih > 0.0;
    const double inter = overlap ? iw * ih : 0.0;
    const double uni = p.area() + t.area() - inter;
    if (uni <= 0.0) throw ValueError("iou_gradient: zero union area, gradient undefined");
    if (!overlap) return {0.0, 0.0, 0.0, 0.0}; // locally constant at 0

    // Intersection derivatives: a predicted edge moves the window only when
    // it is the binding one (strict inequality holds in general position).
    const double di_dx1 = (p.x1 > t.x1) ? -ih : 0.0;
    const double di_dx2 = (p.x2 < t.x2) ? ih : 0.0;
    const double di_dy1 = (p.y1 > t.y1) ? -iw : 0.0;
    const double di_dy2 = (p.y2 < t.y2) ? iw : 0.0;

    const double pw = p.x2 - p.x1, ph = p.y2 - p.y1;
    const double da_dx1 = -ph, da_dx2 = ph, da_dy1 = -pw, da_dy2 = pw;

    const std::array<double, 4> di = {di_dx1, di_dy1, di_dx2, di_dy2};
    const std::array<double, 4> da = {da_dx1, da_dy1, da_dx2, da_dy2};
    std::array<double, 4> g{};
    for (int i = 0; i < 4; ++i) {
        const double du = da[i] - di[i];
        g[i] = (di[i] * uni - inter * du) / (uni * uni);
    }
    return g;
}

std::array<double, 4> loss_gradient(const BBox& pred, const BBox& target,
                                    const FocalIouConfig& cfg) {
    check_config(cfg);
    const double v = iou(pred, target);
    const double uni = pred.area() + target.area() -
                       ((std::min(pred.x2, target.x2) - std::max(pred.x1, target.x1) > 0.0 &&
                         std::min(pred.y2, target.y2) - std::max(pred.y1, target.y1) > 0.0)
                            ? (std::min(pred.x2, target.x2) - std::max(pred.x1, target.x1)) *
                                  (std::min(pred.y2, target.y2) - std::max(pred.y1, target.y1))
                            : 0.0);
    if (uni <= 0.0) throw ValueError("loss_gradient: zero union area, gradient undefined");

    const std::array<double, 4> gi = iou_gradient(pred, target);
    // High: d(1-v) = -dv. Low: d(a*(1-v)^g) = -a*g*(1-v)^(g-1) * dv.
    const double factor = (v >= cfg.iou_thresh)
                              ? -1.0
                              : -cfg.alpha_low * cfg.focusing_gamma *
                                    std::pow(1.0 - v, cfg.focusing_gamma - 1.0);
    return {factor * gi[0], factor * gi[1], factor * gi[2], factor * gi[3]};
}

} // namespace gcm
