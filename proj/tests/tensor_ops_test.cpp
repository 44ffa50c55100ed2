#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "gcm/ops.hpp"
#include "gcm/reference.hpp"
#include "test_support.hpp"

using namespace gcm;
using testutil::random_tensor;

TEST_CASE("tensor shape and data invariants") {
    CHECK_THROWS_AS(Tensor({2, 0, 3}), ShapeError);
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
    Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.size() == 6);
    CHECK(t.all_finite());
    t[0] = std::nan("");
    CHECK_FALSE(t.all_finite());
}

TEST_CASE("conv2d identity 1x1 kernel") {
    Rng rng(1);
    const Tensor x = random_tensor({2, 4, 5}, rng);
    ConvWeights w;
    w.kernel = Tensor({2, 2, 1, 1}, {1, 0, 0, 1});
    const Tensor y = conv2d(x, w);
    CHECK(max_abs_diff(x, y) == 0.0);
}

TEST_CASE("conv2d all-ones 3x3 on constant image") {
    const Tensor x = Tensor::full({1, 5, 5}, 1.0);
    ConvWeights w;
    w.kernel = Tensor::full({1, 1, 3, 3}, 1.0);
    w.padding = 1;
    const Tensor y = conv2d(x, w);
    CHECK(y.at(0, 2, 2) == doctest::Approx(9.0).epsilon(1e-14));
    CHECK(y.at(0, 0, 2) == doctest::Approx(6.0).epsilon(1e-14)); // edge
    CHECK(y.at(0, 0, 0) == doctest::Approx(4.0).epsilon(1e-14)); // corner
}

TEST_CASE("depthwise conv2d keeps channels independent") {
    Rng rng(2);
    Tensor x = random_tensor({2, 6, 6}, rng);
    ConvWeights w = make_conv_weights(2, 2, 3, 1, 1, 2, rng);
    const Tensor y = conv2d(x, w);

    // zero out channel 1; channel 0 of the output must not move
    Tensor x0 = x;
    for (std::size_t i = 0; i < 36; ++i) x0[36 + i] = 0.0;
    const Tensor y0 = conv2d(x0, w);
    for (std::size_t i = 0; i < 36; ++i) CHECK(y[i] == y0[i]);

    // and it must match the straight loop-nest oracle
    CHECK(max_abs_diff(y, ref::conv2d(x, w)) <= 1e-14);
}

TEST_CASE("conv2d matches the serial oracle on random shapes") {
    Rng rng(3);
    for (int it = 0; it < 40; ++it) {
        const std::size_t c_in = 1 + rng.uniform_int(8);
        const std::size_t h = 1 + rng.uniform_int(8);
        const std::size_t w = 1 + rng.uniform_int(8);
        const std::size_t k = 1 + 2 * rng.uniform_int(2); // 1 or 3
        const int stride = 1 + static_cast<int>(rng.uniform_int(2));
        const int pad = static_cast<int>(rng.uniform_int(2));
        if (h + 2 * static_cast<std::size_t>(pad) < k || w + 2 * static_cast<std::size_t>(pad) < k) continue;
        const std::size_t c_out = 1 + rng.uniform_int(6);
        const Tensor x = random_tensor({c_in, h, w}, rng);
        ConvWeights cw = make_conv_weights(c_out, c_in, k, stride, pad, 1, rng);
        CHECK(testutil::rel_dev(conv2d(x, cw), ref::conv2d(x, cw)) <= 1e-12);
    }
}

TEST_CASE("conv2d is linear in the input") {
    Rng rng(4);
    const Tensor x = random_tensor({3, 6, 6}, rng);
    const Tensor y = random_tensor({3, 6, 6}, rng);
    ConvWeights w = make_conv_weights(4, 3, 3, 1, 1, 1, rng);
    w.bias.assign(4, 0.0);
    const double a = 1.7, b = -0.4;

    Tensor mix({3, 6, 6});
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + b * y[i];
    const Tensor lhs = conv2d(mix, w);
    const Tensor cx = conv2d(x, w);
    const Tensor cy = conv2d(y, w);
    Tensor rhs({4, 6, 6});
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = a * cx[i] + b * cy[i];
    CHECK(max_abs_diff(lhs, rhs) <= 1e-10);
}

TEST_CASE("conv2d rejects bad geometry") {
    Rng rng(5);
    const Tensor x = random_tensor({3, 4, 4}, rng);
    ConvWeights w = make_conv_weights(4, 2, 3, 1, 1, 1, rng); // expects 2 input channels
    CHECK_THROWS_AS(conv2d(x, w), ShapeError);

    ConvWeights big = make_conv_weights(1, 3, 3, 1, 0, 1, rng);
    const Tensor tiny = random_tensor({3, 2, 2}, rng);
    CHECK_THROWS_AS(conv2d(tiny, big), ShapeError); // k exceeds padded size

    ConvWeights g = make_conv_weights(4, 3, 1, 1, 0, 1, rng);
    g.groups = 2; // does not divide C_in=3
    CHECK_THROWS_AS(conv2d(x, g), ShapeError);
}

TEST_CASE("batch_norm_infer identity and centered input") {
    Rng rng(6);
    const Tensor x = random_tensor({2, 3, 3}, rng);
    NormStats s = make_identity_norm(2, 1e-12);
    CHECK(max_abs_diff(batch_norm_infer(x, s), x) <= 1e-9);

    NormStats c = make_identity_norm(2, 1e-12);
    c.mean = {0.7, -0.3};
    c.shift = {2.0, -1.0};
    Tensor flat({2, 3, 3});
    for (std::size_t i = 0; i < 9; ++i) flat[i] = 0.7;
    for (std::size_t i = 9; i < 18; ++i) flat[i] = -0.3;
    const Tensor y = batch_norm_infer(flat, c);
    for (std::size_t i = 0; i < 9; ++i) CHECK(y[i] == doctest::Approx(2.0).epsilon(1e-12));
    for (std::size_t i = 9; i < 18; ++i) CHECK(y[i] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("batch_norm_infer scalar formula") {
    // scale*(x-mean)/sqrt(var) + shift = 2*(5-1)/2 + 3 = 7
    Tensor x({1, 1, 1}, {5.0});
    NormStats s{{1.0}, {4.0}, {2.0}, {3.0}, 1e-12};
    CHECK(batch_norm_infer(x, s)[0] == doctest::Approx(7.0).epsilon(1e-9));
}

TEST_CASE("batch_norm_infer round trips through its algebraic inverse") {
    Rng rng(7);
    const Tensor x = random_tensor({3, 4, 4}, rng);
    NormStats s;
    s.epsilon = 1e-5;
    for (int c = 0; c < 3; ++c) {
        s.mean.push_back(rng.uniform(-1, 1));
        s.variance.push_back(rng.uniform(0.5, 2.0));
        s.scale.push_back(rng.uniform(0.5, 1.5));
        s.shift.push_back(rng.uniform(-1, 1));
    }
    const Tensor y = batch_norm_infer(x, s);
    Tensor back(y.shape());
    for (std::size_t c = 0; c < 3; ++c) {
        const double inv = std::sqrt(s.variance[c] + s.epsilon) / s.scale[c];
        for (std::size_t i = 0; i < 16; ++i) {
            back[c * 16 + i] = (y[c * 16 + i] - s.shift[c]) * inv + s.mean[c];
        }
    }
    CHECK(max_abs_diff(back, x) <= 1e-9);
}

TEST_CASE("batch_norm_infer rejects mismatched stats") {
    Rng rng(8);
    const Tensor x = random_tensor({3, 2, 2}, rng);
    CHECK_THROWS_AS(batch_norm_infer(x, make_identity_norm(2)), ShapeError);
}

TEST_CASE("layer_norm basic behavior") {
    // already zero-mean unit-variance per site stays put
    Tensor x({2, 1, 1}, {1.0, -1.0});
    const std::vector<double> one{1.0, 1.0}, zero{0.0, 0.0};
    const Tensor y = layer_norm(x, one, zero, 1e-12);
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(y[1] == doctest::Approx(-1.0).epsilon(1e-6));

    // constant vector per site collapses to the shift
    Tensor c = Tensor::full({2, 2, 2}, 3.5);
    const std::vector<double> shift{0.25, -0.5};
    const Tensor yc = layer_norm(c, one, shift, 1e-5);
    for (std::size_t i = 0; i < 4; ++i) CHECK(yc[i] == doctest::Approx(0.25).epsilon(1e-12));
    for (std::size_t i = 4; i < 8; ++i) CHECK(yc[i] == doctest::Approx(-0.5).epsilon(1e-12));

    // site values [1,3] normalize to [-1,1]
    Tensor two({2, 1, 1}, {1.0, 3.0});
    const Tensor yt = layer_norm(two, one, zero, 1e-12);
    CHECK(yt[0] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(yt[1] == doctest::Approx(1.0).epsilon(1e-6));

    // single channel, zero variance: epsilon absorbs the division
    Tensor single = Tensor::full({1, 2, 2}, 2.0);
    const Tensor ys = layer_norm(single, {1.0}, {0.0}, 1e-5);
    CHECK(ys.all_finite());
}

TEST_CASE("activations at pinned points") {
    Tensor x({1, 1, 3}, {0.0, 20.0, 1.0});
    const Tensor s = activate(Activation::SiLU, x);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == doctest::Approx(20.0).epsilon(1e-7));
    CHECK(s[2] == doctest::Approx(0.7310585786300049).epsilon(1e-12));

    const Tensor g = activate(Activation::GELU, x);
    CHECK(g[0] == 0.0);
    CHECK(g[2] == doctest::Approx(0.8413447460685429).epsilon(1e-12)); // erf form, not tanh
}

TEST_CASE("softmax_axis properties") {
    // equal entries split evenly
    const Tensor eq = Tensor::full({4, 2, 2}, 0.3);
    const Tensor se = softmax_axis(eq, 0);
    for (std::size_t i = 0; i < se.size(); ++i) CHECK(se[i] == doctest::Approx(0.25).epsilon(1e-14));

    // two-element closed form [0, ln 3] -> [0.25, 0.75]
    Tensor pair({2}, {0.0, std::log(3.0)});
    const Tensor sp = softmax_axis(pair, 0);
    CHECK(sp[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(sp[1] == doctest::Approx(0.75).epsilon(1e-12));

    // random slices sum to one with entries in (0,1]
    Rng rng(9);
    const Tensor x = random_tensor({5, 3, 4}, rng, -30.0, 30.0);
    for (std::size_t axis = 0; axis < 3; ++axis) {
        const Tensor s = softmax_axis(x, axis);
        std::size_t outer = 1, inner = 1;
        const std::size_t n = s.dim(axis);
        for (std::size_t i = 0; i < axis; ++i) outer *= s.dim(i);
        for (std::size_t i = axis + 1; i < 3; ++i) inner *= s.dim(i);
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t in = 0; in < inner; ++in) {
                double sum = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double v = s[o * n * inner + k * inner + in];
                    CHECK(v > 0.0);
                    CHECK(v <= 1.0);
                    sum += v;
                }
                CHECK(std::fabs(sum - 1.0) <= 1e-12);
            }
        }
    }
    CHECK_THROWS_AS(softmax_axis(x, 3), ShapeError);
}

TEST_CASE("softmax_axis is permutation equivariant along the axis") {
    Rng rng(10);
    Tensor x = random_tensor({4, 1, 1}, rng);
    const Tensor s = softmax_axis(x, 0);
    Tensor perm({4, 1, 1}, {x[2], x[0], x[3], x[1]});
    const Tensor sp = softmax_axis(perm, 0);
    CHECK(sp[0] == doctest::Approx(s[2]).epsilon(1e-15));
    CHECK(sp[1] == doctest::Approx(s[0]).epsilon(1e-15));
    CHECK(sp[2] == doctest::Approx(s[3]).epsilon(1e-15));
    CHECK(sp[3] == doctest::Approx(s[1]).epsilon(1e-15));
}

TEST_CASE("pixel_shuffle layout and bijection") {
    // r=1 is the identity
    Rng rng(11);
    const Tensor x = random_tensor({3, 2, 2}, rng);
    CHECK(max_abs_diff(pixel_shuffle(x, 1), x) == 0.0);

    // single site, r=2: channels (a,b,c,d) land as [[a,b],[c,d]]
    Tensor one({4, 1, 1}, {1.0, 2.0, 3.0, 4.0});
    const Tensor y = pixel_shuffle(one, 2);
    CHECK(y.shape() == std::vector<std::size_t>{1, 2, 2});
    CHECK(y.at(0, 0, 0) == 1.0);
    CHECK(y.at(0, 0, 1) == 2.0);
    CHECK(y.at(0, 1, 0) == 3.0);
    CHECK(y.at(0, 1, 1) == 4.0);

    // unshuffle inverts exactly and the multiset is preserved
    const Tensor big = random_tensor({8, 3, 5}, rng);
    const Tensor sh = pixel_shuffle(big, 2);
    CHECK(max_abs_diff(pixel_unshuffle(sh, 2), big) == 0.0);
    std::vector<double> a(big.values()), b(sh.values());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);

    CHECK_THROWS_AS(pixel_shuffle(random_tensor({3, 2, 2}, rng), 2), ShapeError);
}
