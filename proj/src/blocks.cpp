#include "gcm/blocks.hpp"

#include <string>

namespace gcm {

LayerNormParams make_identity_layer_norm(std::size_t channels, double epsilon) {
    return LayerNormParams{std::vector<double>(channels, 1.0), std::vector<double>(channels, 0.0),
                           epsilon};
}

LayerNormParams make_zero_layer_norm(std::size_t channels, double epsilon) {
    return LayerNormParams{std::vector<double>(channels, 0.0), std::vector<double>(channels, 0.0),
                           epsilon};
}

StemWeights make_stem_weights(std::size_t c_out, Rng& rng) {
    StemWeights w;
    w.conv1 = make_conv_weights(c_out, 3, 3, 2, 1, 1, rng);
    w.bn1 = make_identity_norm(c_out);
    w.conv2 = make_conv_weights(c_out, c_out, 3, 2, 1, 1, rng);
    w.bn2 = make_identity_norm(c_out);
    return w;
}

ClueMergeWeights make_clue_merge_weights(std::size_t c_in, std::size_t c_out, Rng& rng) {
    return ClueMergeWeights{make_conv_weights(c_out, 4 * c_in, 1, 1, 0, 1, rng)};
}

LocalSpatialWeights make_local_spatial_weights(std::size_t channels, Rng& rng) {
    LocalSpatialWeights w;
    w.dw = make_conv_weights(channels, channels, 3, 1, 1, static_cast<int>(channels), rng);
    w.bn = make_identity_norm(channels);
    w.pw1 = make_conv_weights(channels, channels, 1, 1, 0, 1, rng);
    w.pw2 = make_conv_weights(channels, channels, 1, 1, 0, 1, rng);
    return w;
}

LocalSpatialWeights make_zero_local_spatial_weights(std::size_t channels) {
    LocalSpatialWeights w;
    w.dw = make_zero_conv_weights(channels, channels, 3, 1, 1, static_cast<int>(channels));
    w.bn = make_identity_norm(channels);
    w.bn.scale.assign(channels, 0.0);
    w.pw1 = make_zero_conv_weights(channels, channels, 1, 1, 0, 1);
    w.pw2 = make_zero_conv_weights(channels, channels, 1, 1, 0, 1);
    return w;
}

ResGatedWeights make_rg_weights(std::size_t channels, Rng& rng) {
    ResGatedWeights w;
    w.branch1 = make_conv_weights(channels, channels, 1, 1, 0, 1, rng);
    w.branch2 = make_conv_weights(channels, channels, 1, 1, 0, 1, rng);
    w.dw = make_conv_weights(channels, channels, 3, 1, 1, static_cast<int>(channels), rng);
    w.out = make_conv_weights(channels, channels, 1, 1, 0, 1, rng);
    return w;
}

ResGatedWeights make_zero_rg_weights(std::size_t channels) {
    ResGatedWeights w;
    w.branch1 = make_zero_conv_weights(channels, channels, 1, 1, 0, 1);
    w.branch2 = make_zero_conv_weights(channels, channels, 1, 1, 0, 1);
    w.dw = make_zero_conv_weights(channels, channels, 3, 1, 1, static_cast<int>(channels));
    w.out = make_zero_conv_weights(channels, channels, 1, 1, 0, 1);
    return w;
}

namespace {

// Random stable direction systems for SS2D.
std::array<SsmParams, 4> make_ss2d_params(std::size_t state_size, Rng& rng) {
    return {make_random_ssm(state_size, rng), make_random_ssm(state_size, rng),
            make_random_ssm(state_size, rng), make_random_ssm(state_size, rng)};
}

SsmParams make_zero_ssm(std::size_t state_size) {
    SsmParams p;
    p.a = Matrix(state_size, state_size);
    p.b = Matrix(state_size, 1);
    p.c = Matrix(1, state_size);
    p.delta = 0.1;
    return p;
}

} // namespace

OdssWeights make_odss_weights(std::size_t channels, std::size_t state_size, Rng& rng) {
    OdssWeights w;
    w.entry = make_conv_weights(channels, channels, 1, 1, 0, 1, rng);
    w.entry_bn = make_identity_norm(channels);
    w.ls = make_local_spatial_weights(channels, rng);
    w.ln1 = make_identity_layer_norm(channels);
    w.ss2d = make_ss2d_params(state_size, rng);
    w.ln2 = make_identity_layer_norm(channels);
    w.rg = make_rg_weights(channels, rng);
    return w;
}

OdssWeights make_zero_odss_weights(std::size_t channels, std::size_t state_size) {
    OdssWeights w;
    w.entry = make_zero_conv_weights(channels, channels, 1, 1, 0, 1);
    w.entry_bn = make_identity_norm(channels);
    w.entry_bn.scale.assign(channels, 0.0);
    w.ls = make_zero_local_spatial_weights(channels);
    w.ln1 = make_zero_layer_norm(channels);
    w.ss2d = {make_zero_ssm(state_size), make_zero_ssm(state_size), make_zero_ssm(state_size),
              make_zero_ssm(state_size)};
    w.ln2 = make_zero_layer_norm(channels);
    w.rg = make_zero_rg_weights(channels);
    return w;
}

Tensor simple_stem(const Tensor& img, const StemWeights& w) {
    if (img.rank() != 3) throw ShapeError("simple_stem: expected (C,H,W) input");
    if (img.dim(1) % 4 != 0 || img.dim(2) % 4 != 0) {
        throw ShapeError("simple_stem: H and W must be divisible by 4, got " +
                         shape_str(img.shape()));
    }
    Tensor t = activate(Activation::SiLU, batch_norm_infer(conv2d(img, w.conv1), w.bn1));
    return activate(Activation::SiLU, batch_norm_infer(conv2d(t, w.conv2), w.bn2));
}

Tensor vision_clue_merge(const Tensor& x, const ClueMergeWeights& w) {
    if (x.rank() != 3) throw ShapeError("vision_clue_merge: expected (C,H,W) input");
    if (x.dim(1) % 2 != 0 || x.dim(2) % 2 != 0) {
        throw ShapeError("vision_clue_merge: H and W must be even, got " + shape_str(x.shape()));
    }
    return conv2d(pixel_unshuffle(x, 2), w.pointwise);
}

Tensor local_spatial_block(const Tensor& f, const LocalSpatialWeights& w) {
    const Tensor inner = batch_norm_infer(conv2d(f, w.dw), w.bn);
    const Tensor mixed = conv2d(activate(Activation::GELU, conv2d(inner, w.pw1)), w.pw2);
    return add(mixed, f);
}

Tensor rg_block(const Tensor& x, const ResGatedWeights& w) {
    const Tensor x1 = conv2d(x, w.branch1);
    const Tensor x2 = conv2d(x, w.branch2);
    const Tensor gate = activate(Activation::GELU, add(conv2d(x2, w.dw), x2));
    return add(conv2d(mul(x1, gate), w.out), x);
}

Tensor odss_block(const Tensor& z, const OdssWeights& w) {
    const Tensor z2 = activate(Activation::SiLU, batch_norm_infer(conv2d(z, w.entry), w.entry_bn));

    const std::array<DiscreteSsm, 4> dirs = {
        zoh_discretize(w.ss2d[0]), zoh_discretize(w.ss2d[1]), zoh_discretize(w.ss2d[2]),
        zoh_discretize(w.ss2d[3])};
    const Tensor ls_out = local_spatial_block(z2, w.ls);
    const Tensor normed = layer_norm(ls_out, w.ln1.scale, w.ln1.shift, w.ln1.epsilon);
    const Tensor z1 = add(ss2d_scan(normed, dirs), z2);

    const Tensor n2 = layer_norm(z1, w.ln2.scale, w.ln2.shift, w.ln2.epsilon);
    return add(rg_block(n2, w.rg), z1);
}

} // namespace gcm
