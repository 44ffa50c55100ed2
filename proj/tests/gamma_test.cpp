#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "gcm/gamma.hpp"
#include "test_support.hpp"

using namespace gcm;
using testutil::random_tensor;

TEST_CASE("rgb_to_gray coefficients") {
    Tensor white = Tensor::full({3, 1, 1}, 1.0);
    CHECK(rgb_to_gray(white)[0] == doctest::Approx(1.0).epsilon(1e-12));

    Tensor red({3, 1, 1}, {1.0, 0.0, 0.0});
    CHECK(rgb_to_gray(red)[0] == doctest::Approx(0.299).epsilon(1e-15));
    Tensor green({3, 1, 1}, {0.0, 1.0, 0.0});
    CHECK(rgb_to_gray(green)[0] == doctest::Approx(0.587).epsilon(1e-15));
    Tensor blue({3, 1, 1}, {0.0, 0.0, 1.0});
    CHECK(rgb_to_gray(blue)[0] == doctest::Approx(0.114).epsilon(1e-15));
}

TEST_CASE("rgb_to_gray matches the per-pixel oracle") {
    Rng rng(21);
    const Tensor img = random_tensor({3, 5, 7}, rng, 0.0, 1.0);
    const Tensor gray = rgb_to_gray(img);
    const std::size_t n = 35;
    for (std::size_t i = 0; i < n; ++i) {
        const double want = 0.299 * img[i] + 0.587 * img[n + i] + 0.114 * img[2 * n + i];
        CHECK(gray[i] == doctest::Approx(want).epsilon(1e-15));
        CHECK(gray[i] >= 0.0);
        CHECK(gray[i] <= 1.0);
    }
}

TEST_CASE("rgb_to_gray rejects bad input") {
    Rng rng(22);
    CHECK_THROWS_AS(rgb_to_gray(random_tensor({2, 2, 2}, rng, 0.0, 1.0)), ShapeError);
    Tensor out_of_range({3, 1, 1}, {1.5, 0.0, 0.0});
    CHECK_THROWS_AS(rgb_to_gray(out_of_range), ValueError);
}

TEST_CASE("compute_gamma limits") {
    GammaConfig cfg; // g_min 0.5, g_max 2.0, eps 1e-6

    // uniform image: std = 0, ratio -> 1, gamma -> g_max
    const Tensor uni = Tensor::full({1, 4, 4}, 0.5);
    GammaConfig tight = cfg;
    tight.epsilon = 1e-12;
    const GammaStats s = compute_gamma(uni, tight);
    CHECK(s.gray_std == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(s.gamma == doctest::Approx(cfg.g_max).epsilon(1e-9));

    // zero mean: gamma = g_min
    const Tensor black = Tensor::full({1, 4, 4}, 0.0);
    CHECK(compute_gamma(black, cfg).gamma == doctest::Approx(cfg.g_min).epsilon(1e-15));
}

TEST_CASE("compute_gamma scalar evaluation") {
    // mean 0.6, std 0.2: gamma = 0.5 + 1.0 * 0.6/0.800001
    Tensor gray({1, 1, 2}, {0.4, 0.8}); // mean 0.6, population std 0.2
    GammaConfig cfg{0.5, 1.5, 1e-6};
    const GammaStats s = compute_gamma(gray, cfg);
    CHECK(s.gray_mean == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(s.gray_std == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(s.gamma == doctest::Approx(0.5 + 0.6 / 0.800001).epsilon(1e-12));
}

TEST_CASE("compute_gamma is permutation invariant") {
    Rng rng(23);
    Tensor gray = random_tensor({1, 3, 3}, rng, 0.0, 1.0);
    GammaConfig cfg;
    const double g1 = compute_gamma(gray, cfg).gamma;
    std::reverse(gray.values().begin(), gray.values().end());
    CHECK(compute_gamma(gray, cfg).gamma == doctest::Approx(g1).epsilon(1e-15));
}

TEST_CASE("apply_gamma pinned points") {
    Tensor x({3, 1, 1}, {0.25, 0.25, 0.25});
    const Tensor sqrt_out = apply_gamma(x, 0.5, 1e-15);
    CHECK(sqrt_out[0] == doctest::Approx(0.5).epsilon(1e-7));
    const Tensor sq_out = apply_gamma(x, 2.0, 1e-15);
    CHECK(sq_out[0] == doctest::Approx(0.0625).epsilon(1e-7));

    Rng rng(24);
    const Tensor img = random_tensor({3, 4, 4}, rng, 0.0, 1.0);
    CHECK(max_abs_diff(apply_gamma(img, 1.0, 1e-15), img) <= 1e-12);

    CHECK_THROWS_AS(apply_gamma(img, 0.0, 1e-6), ValueError);
    CHECK_THROWS_AS(apply_gamma(img, -1.0, 1e-6), ValueError);
}

TEST_CASE("apply_gamma preserves ordering and range") {
    Rng rng(25);
    const Tensor img = random_tensor({3, 6, 6}, rng, 0.0, 1.0);
    for (double gamma : {0.5, 1.0, 1.7, 2.0}) {
        const Tensor out = apply_gamma(img, gamma, 1e-6);
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(out[i] >= 0.0);
            CHECK(out[i] <= 1.0);
        }
        for (std::size_t i = 0; i + 1 < out.size(); ++i) {
            if (img[i] <= img[i + 1]) {
                CHECK(out[i] <= out[i + 1]);
            } else {
                CHECK(out[i] >= out[i + 1]);
            }
        }
    }
}

TEST_CASE("correct composes the closed forms") {
    // uniform mid-gray image: gamma ~ 2, corrected pixel ~ 0.25
    const Tensor img = Tensor::full({3, 4, 4}, 0.5);
    GammaConfig cfg{0.5, 2.0, 1e-6};
    const CorrectionResult r = correct(img, cfg);
    CHECK(r.gamma == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(r.corrected[0] == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(r.gray_mean == doctest::Approx(0.5).epsilon(1e-12));

    // all-black image: gamma = g_min, output ~ eps^{g_min}
    const Tensor black = Tensor::full({3, 4, 4}, 0.0);
    const CorrectionResult rb = correct(black, cfg);
    CHECK(rb.gamma == doctest::Approx(cfg.g_min).epsilon(1e-15));
    CHECK(rb.corrected[0] == doctest::Approx(std::pow(cfg.epsilon, cfg.g_min)).epsilon(1e-9));
}

TEST_CASE("correct keeps gamma and pixels in bounds on random images") {
    Rng rng(26);
    GammaConfig cfg;
    for (int it = 0; it < 100; ++it) {
        const Tensor img = random_tensor({3, 8, 8}, rng, 0.0, 1.0);
        const CorrectionResult r = correct(img, cfg);
        CHECK(r.gamma >= cfg.g_min);
        CHECK(r.gamma <= cfg.g_max);
        for (std::size_t i = 0; i < r.corrected.size(); ++i) {
            CHECK(r.corrected[i] >= 0.0);
            CHECK(r.corrected[i] <= 1.0);
        }
    }
}
