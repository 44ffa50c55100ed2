#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "gcm/errors.hpp"
#include "gcm/eval.hpp"
#include "gcm/rng.hpp"

using namespace gcm;

namespace {

Detection det(const std::string& img, int cls, BBox b, double conf) {
    return Detection{img, cls, b, conf};
}

GroundTruthBox gt(const std::string& img, int cls, BBox b) {
    return GroundTruthBox{img, cls, b};
}

// Independent greedy matcher: repeated max-extraction instead of sorting,
// with the same confidence-then-input-order tie rule.
std::vector<bool> oracle_match_flags(const std::vector<Detection>& dets,
                                     const std::vector<GroundTruthBox>& gts, double iou_t,
                                     std::vector<std::size_t>* order_out = nullptr) {
    std::vector<bool> taken(dets.size(), false), used(gts.size(), false);
    std::vector<bool> flags;
    std::vector<std::size_t> order;
    for (std::size_t step = 0; step < dets.size(); ++step) {
        std::size_t pick = dets.size();
        for (std::size_t i = 0; i < dets.size(); ++i) {
            if (taken[i]) continue;
            if (pick == dets.size() || dets[i].confidence > dets[pick].confidence) pick = i;
        }
        taken[pick] = true;
        order.push_back(pick);
        double best = 0.0;
        int best_g = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (used[g] || gts[g].image_id != dets[pick].image_id) continue;
            const double v = iou(dets[pick].box, gts[g].box);
            if (v > best) {
                best = v;
                best_g = static_cast<int>(g);
            }
        }
        if (best_g >= 0 && best >= iou_t) {
            used[static_cast<std::size_t>(best_g)] = true;
            flags.push_back(true);
        } else {
            flags.push_back(false);
        }
    }
    if (order_out) *order_out = order;
    return flags;
}

} // namespace

TEST_CASE("match basic rules") {
    const BBox box{0, 0, 1, 1};
    // a single exact detection is a TP
    const MatchResult one = match({det("a", 0, box, 0.9)}, {gt("a", 0, box)}, 0.5);
    CHECK(one.tp == std::vector<bool>{true});
    CHECK(one.iou[0] == doctest::Approx(1.0));

    // a duplicate cannot rematch the same ground truth
    const MatchResult two =
        match({det("a", 0, box, 0.9), det("a", 0, box, 0.8)}, {gt("a", 0, box)}, 0.5);
    CHECK(two.tp == std::vector<bool>{true, false});

    // detections only match ground truth in their own image
    const MatchResult cross = match({det("b", 0, box, 0.9)}, {gt("a", 0, box)}, 0.5);
    CHECK(cross.tp == std::vector<bool>{false});

    CHECK_THROWS_AS(match({}, {}, 0.0), ValueError);
}

TEST_CASE("match is stable under equal confidences") {
    const BBox b1{0, 0, 1, 1}, b2{10, 10, 11, 11};
    const MatchResult r = match(
        {det("a", 0, b1, 0.5), det("a", 0, b2, 0.5)}, {gt("a", 0, b1), gt("a", 0, b2)}, 0.5);
    // stable sort keeps input order on ties: both should be TPs on their own gt
    CHECK(r.det_index == std::vector<std::size_t>{0, 1});
    CHECK(r.tp == std::vector<bool>{true, true});
}

TEST_CASE("match agrees with the max-extraction oracle on random instances") {
    Rng rng(91);
    for (int it = 0; it < 300; ++it) {
        std::vector<Detection> dets;
        std::vector<GroundTruthBox> gts;
        const std::size_t nd = rng.uniform_int(6);
        const std::size_t ng = rng.uniform_int(4);
        for (std::size_t i = 0; i < nd; ++i) {
            const double x = rng.uniform(0, 4), y = rng.uniform(0, 4);
            dets.push_back(det(rng.uniform_int(2) ? "a" : "b", 0,
                               BBox{x, y, x + rng.uniform(0.5, 2.0), y + rng.uniform(0.5, 2.0)},
                               0.1 * static_cast<double>(1 + rng.uniform_int(9))));
        }
        for (std::size_t i = 0; i < ng; ++i) {
            const double x = rng.uniform(0, 4), y = rng.uniform(0, 4);
            gts.push_back(gt(rng.uniform_int(2) ? "a" : "b", 0,
                             BBox{x, y, x + rng.uniform(0.5, 2.0), y + rng.uniform(0.5, 2.0)}));
        }
        const MatchResult r = match(dets, gts, 0.5);
        std::vector<std::size_t> oracle_order;
        const std::vector<bool> want = oracle_match_flags(dets, gts, 0.5, &oracle_order);
        CHECK(r.tp == want);
        CHECK(r.det_index == oracle_order);
    }
}

TEST_CASE("pr_curve cumulative arithmetic") {
    const PrCurve a = pr_curve({true}, {0.9}, 1);
    CHECK(a.recall == std::vector<double>{1.0});
    CHECK(a.precision == std::vector<double>{1.0});

    const PrCurve b = pr_curve({true, false}, {0.9, 0.8}, 1);
    CHECK(b.recall == std::vector<double>{1.0, 1.0});
    CHECK(b.precision == std::vector<double>{1.0, 0.5});

    const PrCurve c = pr_curve({false, true}, {0.9, 0.8}, 2);
    CHECK(c.recall == std::vector<double>{0.0, 0.5});
    CHECK(c.precision == std::vector<double>{0.0, 0.5});

    // no ground truth: recall pinned to zero, AP collapses to zero
    const PrCurve d = pr_curve({false, false}, {0.9, 0.8}, 0);
    CHECK(d.recall == std::vector<double>{0.0, 0.0});
    CHECK(average_precision(d, ApMode::AllPoint) == 0.0);
}

TEST_CASE("average_precision pinned values") {
    CHECK(average_precision(PrCurve{}, ApMode::AllPoint) == 0.0);

    const PrCurve perfect = pr_curve({true}, {1.0}, 1);
    CHECK(average_precision(perfect, ApMode::AllPoint) == doctest::Approx(1.0));

    // envelope lifts the trailing FP: AP stays 1
    const PrCurve tpfp = pr_curve({true, false}, {0.9, 0.8}, 1);
    CHECK(average_precision(tpfp, ApMode::AllPoint) == doctest::Approx(1.0));

    // recall caps at 0.5 with precision 1
    const PrCurve half = pr_curve({true}, {0.9}, 2);
    CHECK(average_precision(half, ApMode::AllPoint) == doctest::Approx(0.5));
    // coco samples 51 of 101 recall points at precision 1
    CHECK(average_precision(half, ApMode::Coco101) == doctest::Approx(51.0 / 101.0));
}

TEST_CASE("average_precision matches a fine Riemann integration of the envelope") {
    Rng rng(92);
    // ground-truth counts whose recall levels sit exactly on the 1e-4 grid,
    // so midpoint sampling integrates the step function without bias
    const std::size_t gt_choices[] = {1, 2, 4, 5, 8, 10};
    for (int it = 0; it < 50; ++it) {
        const std::size_t n = 1 + rng.uniform_int(20);
        const std::size_t n_gt = gt_choices[rng.uniform_int(6)];
        std::vector<bool> flags(n);
        std::vector<double> confs(n);
        std::size_t tp_left = n_gt; // matching never produces more TPs than gts
        for (std::size_t i = 0; i < n; ++i) {
            flags[i] = tp_left > 0 && rng.uniform() < 0.5;
            if (flags[i]) --tp_left;
            confs[i] = 1.0 - 0.01 * static_cast<double>(i);
        }
        const PrCurve curve = pr_curve(flags, confs, n_gt);
        const double ap = average_precision(curve, ApMode::AllPoint);

        // midpoint Riemann sum over recall at 1e-4 resolution
        double riemann = 0.0;
        const int steps = 10000;
        for (int s = 0; s < steps; ++s) {
            const double r = (static_cast<double>(s) + 0.5) / steps;
            double p = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (curve.recall[i] >= r) {
                    double env = 0.0;
                    for (std::size_t j = i; j < n; ++j) env = std::max(env, curve.precision[j]);
                    p = env;
                    break;
                }
            }
            riemann += p / steps;
        }
        CHECK(std::fabs(ap - riemann) <= 1e-6);
    }
}

TEST_CASE("appending a lowest-confidence FP never raises all-point AP") {
    Rng rng(93);
    for (int it = 0; it < 100; ++it) {
        const std::size_t n = 1 + rng.uniform_int(10);
        std::vector<bool> flags(n);
        std::vector<double> confs(n);
        for (std::size_t i = 0; i < n; ++i) {
            flags[i] = rng.uniform() < 0.6;
            confs[i] = 1.0 - 0.05 * static_cast<double>(i);
        }
        const double before = average_precision(pr_curve(flags, confs, 5), ApMode::AllPoint);
        flags.push_back(false);
        confs.push_back(confs.back() - 0.05);
        const double after = average_precision(pr_curve(flags, confs, 5), ApMode::AllPoint);
        CHECK(after <= before + 1e-15);
    }
}

TEST_CASE("coco101 and all-point agree on dense curves") {
    Rng rng(94);
    std::vector<bool> flags;
    std::vector<double> confs;
    for (int i = 0; i < 400; ++i) {
        flags.push_back(rng.uniform() < 0.7);
        confs.push_back(1.0 - 0.002 * i);
    }
    const PrCurve curve = pr_curve(flags, confs, 300);
    const double a = average_precision(curve, ApMode::AllPoint);
    const double c = average_precision(curve, ApMode::Coco101);
    CHECK(std::fabs(a - c) <= 0.01);
}

TEST_CASE("mean_ap arithmetic and the published table rows") {
    CHECK(mean_ap({1.0}) == 1.0);
    CHECK(mean_ap({1.0, 0.5}) == 0.75);
    CHECK_THROWS_AS(mean_ap({}), ValueError);

    // five per-class APs averaging to the printed mAP
    const double ours = mean_ap({0.660, 0.590, 0.430, 0.386, 0.596});
    CHECK(std::fabs(ours - 0.5324) <= 1e-12);
    const double yolov8n = mean_ap({0.336, 0.548, 0.183, 0.069, 0.151});
    CHECK(std::fabs(yolov8n - 0.2574) <= 1e-12);
}

TEST_CASE("map_at_range over thresholds") {
    const BBox box{0, 0, 1, 1};
    const std::vector<Detection> dets{det("a", 0, box, 1.0)};
    const std::vector<GroundTruthBox> gts{gt("a", 0, box)};
    CHECK(map_at_range(dets, gts, default_thresholds()) == doctest::Approx(1.0));

    // IoU exactly 0.6 passes thresholds {0.50, 0.55, 0.60} only
    const std::vector<Detection> d6{det("a", 0, BBox{0, 0, 3, 1}, 1.0)};
    const std::vector<GroundTruthBox> g6{gt("a", 0, BBox{0, 0, 5, 1})};
    CHECK(map_at_range(d6, g6, default_thresholds()) == doctest::Approx(0.3).epsilon(1e-12));

    // no detections at all
    CHECK(map_at_range({}, g6, default_thresholds()) == 0.0);

    CHECK_THROWS_AS(map_at_range(dets, gts, {}), ValueError);
}

TEST_CASE("evaluate separates classes and reports details") {
    const BBox b0{0, 0, 1, 1}, b1{2, 2, 3, 3};
    const std::vector<Detection> dets{
        det("a", 0, b0, 0.9), det("a", 1, b1, 0.8), det("a", 2, b0, 0.7)};
    const std::vector<GroundTruthBox> gts{gt("a", 0, b0), gt("a", 1, b1)};
    const EvalResult r = evaluate(dets, gts, default_thresholds());

    CHECK(r.map_50 == doctest::Approx(1.0)); // class 2 has no gt and is excluded
    CHECK(r.map_50_95 == doctest::Approx(1.0));
    CHECK(r.thresholds.size() == 10);
    CHECK(r.thresholds[0].per_class.size() == 3);
    for (const auto& ce : r.thresholds[0].per_class) {
        if (ce.class_id == 2) {
            CHECK_FALSE(ce.in_mean);
            CHECK(ce.ap == 0.0);
        } else {
            CHECK(ce.in_mean);
            CHECK(ce.ap == doctest::Approx(1.0));
        }
    }
    CHECK(r.matches_at_50.size() == 3);
}
