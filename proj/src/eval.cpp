#include "gcm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "gcm/errors.hpp"

namespace gcm {

MatchResult match(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts,
                  double iou_t) {
    if (!(iou_t > 0.0 && iou_t <= 1.0)) throw ValueError("match: iou threshold must be in (0,1]");

    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].confidence > dets[b].confidence;
    });

    std::map<std::string, std::vector<std::size_t>> gts_by_image;
    for (std::size_t i = 0; i < gts.size(); ++i) gts_by_image[gts[i].image_id].push_back(i);

    std::vector<bool> gt_used(gts.size(), false);
    MatchResult res;
    res.det_index = order;
    res.tp.resize(dets.size(), false);
    res.iou.resize(dets.size(), 0.0);
    res.matched_gt.resize(dets.size(), -1);

    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const Detection& d = dets[order[rank]];
        const auto it = gts_by_image.find(d.image_id);
        if (it == gts_by_image.end()) continue;
        double best = 0.0;
        int best_gt = -1;
        for (std::size_t gi : it->second) {
            if (gt_used[gi]) continue;
            const double v = iou(d.box, gts[gi].box);
            if (v > best) {
                best = v;
                best_gt = static_cast<int>(gi);
            }
        }
        if (best_gt >= 0 && best >= iou_t) {
            gt_used[static_cast<std::size_t>(best_gt)] = true;
            res.tp[rank] = true;
            res.iou[rank] = best;
            res.matched_gt[rank] = best_gt;
        }
    }
    return res;
}

PrCurve pr_curve(const std::vector<bool>& flags, const std::vector<double>& confidences,
                 std::size_t n_gt) {
    if (flags.size() != confidences.size()) {
        throw ShapeError("pr_curve: flags and confidences must have equal length");
    }
    PrCurve curve;
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (flags[i]) ++tp; else ++fp;
        const double prec = static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double rec = n_gt == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_gt);
        curve.recall.push_back(rec);
        curve.precision.push_back(prec);
        curve.thresholds.push_back(confidences[i]);
    }
    return curve;
}

double average_precision(const PrCurve& curve, ApMode mode) {
    const std::size_t n = curve.recall.size();
    if (n == 0) return 0.0;

    // Precision envelope: at each point, the max precision at equal or
    // higher recall.
    std::vector<double> env(n);
    double running = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        running = std::max(running, curve.precision[i]);
        env[i] = running;
    }

    if (mode == ApMode::AllPoint) {
        double ap = 0.0;
        double prev_recall = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ap += (curve.recall[i] - prev_recall) * env[i];
            prev_recall = curve.recall[i];
        }
        return ap;
    }

    // Coco101: envelope sampled at recalls {0.00, 0.01, ..., 1.00}.
    double total = 0.0;
    for (int s = 0; s <= 100; ++s) {
        const double r = static_cast<double>(s) / 100.0;
        double p = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (curve.recall[i] >= r - 1e-12) {
                p = env[i];
                break;
            }
        }
        total += p;
    }
    return total / 101.0;
}

double mean_ap(const std::vector<double>& per_class_ap) {
    if (per_class_ap.empty()) throw ValueError("mean_ap: undefined for an empty class list");
    double s = 0.0;
    for (double v : per_class_ap) s += v;
    return s / static_cast<double>(per_class_ap.size());
}

std::vector<double> default_thresholds() {
    std::vector<double> t;
    for (int i = 0; i < 10; ++i) t.push_back(0.50 + 0.05 * i);
    return t;
}

EvalResult evaluate(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts,
                    const std::vector<double>& thresholds, ApMode mode) {
    if (thresholds.empty()) throw ValueError("evaluate: threshold list must be non-empty");

    std::set<int> class_ids;
    for (const auto& g : gts) class_ids.insert(g.class_id);
    for (const auto& d : dets) class_ids.insert(d.class_id);

    std::map<int, std::vector<Detection>> dets_by_class;
    std::map<int, std::vector<GroundTruthBox>> gts_by_class;
    for (const auto& d : dets) dets_by_class[d.class_id].push_back(d);
    for (const auto& g : gts) gts_by_class[g.class_id].push_back(g);

    EvalResult result;
    for (double t : thresholds) {
        ThresholdEval te;
        te.iou_t = t;
        std::vector<double> aps_in_mean;
        for (int cid : class_ids) {
            const auto& cd = dets_by_class[cid];
            const auto& cg = gts_by_class[cid];
            const MatchResult mr = match(cd, cg, t);
            std::vector<double> confs(mr.det_index.size());
            for (std::size_t i = 0; i < mr.det_index.size(); ++i) {
                confs[i] = cd[mr.det_index[i]].confidence;
            }
            const PrCurve curve = pr_curve(mr.tp, confs, cg.size());
            ClassEval ce;
            ce.class_id = cid;
            ce.n_gt = cg.size();
            ce.n_det = cd.size();
            ce.ap = cg.empty() ? 0.0 : average_precision(curve, mode);
            ce.in_mean = !cg.empty();
            if (ce.in_mean) aps_in_mean.push_back(ce.ap);
            te.per_class.push_back(ce);

            if (std::fabs(t - 0.5) < 1e-12) {
                for (std::size_t i = 0; i < mr.det_index.size(); ++i) {
                    const Detection& d = cd[mr.det_index[i]];
                    result.matches_at_50.push_back(
                        MatchDetail{d.image_id, cid, d.confidence, mr.tp[i], mr.iou[i]});
                }
            }
        }
        te.map = aps_in_mean.empty() ? 0.0 : mean_ap(aps_in_mean);
        result.thresholds.push_back(std::move(te));
    }

    double sum = 0.0;
    for (const auto& te : result.thresholds) {
        sum += te.map;
        if (std::fabs(te.iou_t - 0.5) < 1e-12) result.map_50 = te.map;
    }
    result.map_50_95 = sum / static_cast<double>(result.thresholds.size());

    // Deterministic report order: image, then class, then confidence rank.
    std::stable_sort(result.matches_at_50.begin(), result.matches_at_50.end(),
                     [](const MatchDetail& a, const MatchDetail& b) {
                         if (a.image_id != b.image_id) return a.image_id < b.image_id;
                         if (a.class_id != b.class_id) return a.class_id < b.class_id;
                         return a.confidence > b.confidence;
                     });
    return result;
}

double map_at_range(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts,
                    const std::vector<double>& thresholds, ApMode mode) {
    const EvalResult r = evaluate(dets, gts, thresholds, mode);
    double sum = 0.0;
    for (const auto& te : r.thresholds) sum += te.map;
    return sum / static_cast<double>(r.thresholds.size());
}

} // namespace gcm
