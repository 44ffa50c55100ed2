#include "gcm/pipeline.hpp"

#include <string>

namespace gcm {

namespace {

Tensor vec_tensor(const std::vector<double>& v) {
    return Tensor({v.size()}, std::vector<double>(v));
}

std::vector<double> tensor_vec(const Tensor& t, std::size_t want, const std::string& name) {
    if (t.rank() != 1 || t.dim(0) != want) {
        throw ParseError("weight section '" + name + "' must be a length-" + std::to_string(want) +
                         " vector, got " + shape_str(t.shape()));
    }
    return t.values();
}

Tensor mat_tensor(const Matrix& m) {
    return Tensor({m.rows(), m.cols()}, std::vector<double>(m.values()));
}

Matrix tensor_mat(const Tensor& t, const std::string& name) {
    if (t.rank() != 2) {
        throw ParseError("weight section '" + name + "' must be a matrix, got " +
                         shape_str(t.shape()));
    }
    return Matrix(t.dim(0), t.dim(1), std::vector<double>(t.values()));
}

void pack_conv(WeightFile& wf, const std::string& prefix, const ConvWeights& w) {
    wf.add(prefix + ".kernel", w.kernel);
    wf.add(prefix + ".bias", vec_tensor(w.bias));
}

ConvWeights unpack_conv(const WeightFile& wf, const std::string& prefix, int stride, int padding,
                        bool depthwise) {
    ConvWeights w;
    w.kernel = wf.require(prefix + ".kernel");
    if (w.kernel.rank() != 4) {
        throw ParseError("weight section '" + prefix + ".kernel' must be rank-4, got " +
                         shape_str(w.kernel.shape()));
    }
    w.bias = tensor_vec(wf.require(prefix + ".bias"), w.kernel.dim(0), prefix + ".bias");
    w.stride = stride;
    w.padding = padding;
    w.groups = depthwise ? static_cast<int>(w.kernel.dim(0)) : 1;
    return w;
}

void pack_norm(WeightFile& wf, const std::string& prefix, const NormStats& s) {
    wf.add(prefix + ".mean", vec_tensor(s.mean));
    wf.add(prefix + ".variance", vec_tensor(s.variance));
    wf.add(prefix + ".scale", vec_tensor(s.scale));
    wf.add(prefix + ".shift", vec_tensor(s.shift));
}

NormStats unpack_norm(const WeightFile& wf, const std::string& prefix, std::size_t channels) {
    NormStats s;
    s.mean = tensor_vec(wf.require(prefix + ".mean"), channels, prefix + ".mean");
    s.variance = tensor_vec(wf.require(prefix + ".variance"), channels, prefix + ".variance");
    s.scale = tensor_vec(wf.require(prefix + ".scale"), channels, prefix + ".scale");
    s.shift = tensor_vec(wf.require(prefix + ".shift"), channels, prefix + ".shift");
    return s;
}

void pack_layer_norm(WeightFile& wf, const std::string& prefix, const LayerNormParams& p) {
    wf.add(prefix + ".scale", vec_tensor(p.scale));
    wf.add(prefix + ".shift", vec_tensor(p.shift));
}

LayerNormParams unpack_layer_norm(const WeightFile& wf, const std::string& prefix,
                                  std::size_t channels) {
    LayerNormParams p;
    p.scale = tensor_vec(wf.require(prefix + ".scale"), channels, prefix + ".scale");
    p.shift = tensor_vec(wf.require(prefix + ".shift"), channels, prefix + ".shift");
    return p;
}

void pack_ssm(WeightFile& wf, const std::string& prefix, const SsmParams& p) {
    wf.add(prefix + ".a", mat_tensor(p.a));
    wf.add(prefix + ".b", mat_tensor(p.b));
    wf.add(prefix + ".c", mat_tensor(p.c));
    wf.add(prefix + ".delta", Tensor({1}, {p.delta}));
}

SsmParams unpack_ssm(const WeightFile& wf, const std::string& prefix) {
    SsmParams p;
    p.a = tensor_mat(wf.require(prefix + ".a"), prefix + ".a");
    p.b = tensor_mat(wf.require(prefix + ".b"), prefix + ".b");
    p.c = tensor_mat(wf.require(prefix + ".c"), prefix + ".c");
    p.delta = tensor_vec(wf.require(prefix + ".delta"), 1, prefix + ".delta")[0];
    return p;
}

} // namespace

PipelineWeights make_pipeline_weights(const PipelineConfig& cfg, Rng& rng) {
    PipelineWeights w;
    w.stem = make_stem_weights(cfg.stem_channels, rng);
    w.merge = make_clue_merge_weights(cfg.stem_channels, cfg.merge_channels, rng);
    w.odss = make_odss_weights(cfg.merge_channels, cfg.state_size, rng);
    w.carafe = make_carafe_weights(cfg.merge_channels, cfg.carafe, rng);
    return w;
}

WeightFile pack_pipeline_weights(const PipelineWeights& w) {
    WeightFile wf;
    pack_conv(wf, "stem.conv1", w.stem.conv1);
    pack_norm(wf, "stem.bn1", w.stem.bn1);
    pack_conv(wf, "stem.conv2", w.stem.conv2);
    pack_norm(wf, "stem.bn2", w.stem.bn2);
    pack_conv(wf, "merge.pw", w.merge.pointwise);
    pack_conv(wf, "odss.entry", w.odss.entry);
    pack_norm(wf, "odss.entry_bn", w.odss.entry_bn);
    pack_conv(wf, "odss.ls.dw", w.odss.ls.dw);
    pack_norm(wf, "odss.ls.bn", w.odss.ls.bn);
    pack_conv(wf, "odss.ls.pw1", w.odss.ls.pw1);
    pack_conv(wf, "odss.ls.pw2", w.odss.ls.pw2);
    pack_layer_norm(wf, "odss.ln1", w.odss.ln1);
    for (std::size_t d = 0; d < 4; ++d) {
        pack_ssm(wf, "odss.ss2d." + std::to_string(d), w.odss.ss2d[d]);
    }
    pack_layer_norm(wf, "odss.ln2", w.odss.ln2);
    pack_conv(wf, "odss.rg.branch1", w.odss.rg.branch1);
    pack_conv(wf, "odss.rg.branch2", w.odss.rg.branch2);
    pack_conv(wf, "odss.rg.dw", w.odss.rg.dw);
    pack_conv(wf, "odss.rg.out", w.odss.rg.out);
    pack_conv(wf, "carafe.compress", w.carafe.compress);
    pack_conv(wf, "carafe.encode", w.carafe.encode);
    return wf;
}

PipelineWeights unpack_pipeline_weights(const WeightFile& wf, const PipelineConfig& cfg) {
    PipelineWeights w;
    w.stem.conv1 = unpack_conv(wf, "stem.conv1", 2, 1, false);
    w.stem.bn1 = unpack_norm(wf, "stem.bn1", cfg.stem_channels);
    w.stem.conv2 = unpack_conv(wf, "stem.conv2", 2, 1, false);
    w.stem.bn2 = unpack_norm(wf, "stem.bn2", cfg.stem_channels);
    w.merge.pointwise = unpack_conv(wf, "merge.pw", 1, 0, false);
    w.odss.entry = unpack_conv(wf, "odss.entry", 1, 0, false);
    w.odss.entry_bn = unpack_norm(wf, "odss.entry_bn", cfg.merge_channels);
    w.odss.ls.dw = unpack_conv(wf, "odss.ls.dw", 1, 1, true);
    w.odss.ls.bn = unpack_norm(wf, "odss.ls.bn", cfg.merge_channels);
    w.odss.ls.pw1 = unpack_conv(wf, "odss.ls.pw1", 1, 0, false);
    w.odss.ls.pw2 = unpack_conv(wf, "odss.ls.pw2", 1, 0, false);
    w.odss.ln1 = unpack_layer_norm(wf, "odss.ln1", cfg.merge_channels);
    for (std::size_t d = 0; d < 4; ++d) {
        w.odss.ss2d[d] = unpack_ssm(wf, "odss.ss2d." + std::to_string(d));
    }
    w.odss.ln2 = unpack_layer_norm(wf, "odss.ln2", cfg.merge_channels);
    w.odss.rg.branch1 = unpack_conv(wf, "odss.rg.branch1", 1, 0, false);
    w.odss.rg.branch2 = unpack_conv(wf, "odss.rg.branch2", 1, 0, false);
    w.odss.rg.dw = unpack_conv(wf, "odss.rg.dw", 1, 1, true);
    w.odss.rg.out = unpack_conv(wf, "odss.rg.out", 1, 0, false);
    w.carafe = unpack_carafe_weights(wf);
    return w;
}

WeightFile pack_carafe_weights(const CarafeWeights& w) {
    WeightFile wf;
    pack_conv(wf, "carafe.compress", w.compress);
    pack_conv(wf, "carafe.encode", w.encode);
    return wf;
}

CarafeWeights unpack_carafe_weights(const WeightFile& wf) {
    CarafeWeights w;
    w.compress = unpack_conv(wf, "carafe.compress", 1, 0, false);
    const Tensor& enc = wf.require("carafe.encode.kernel");
    if (enc.rank() != 4) throw ParseError("carafe.encode.kernel must be rank-4");
    const int pad = static_cast<int>((enc.dim(2) - 1) / 2);
    w.encode = unpack_conv(wf, "carafe.encode", 1, pad, false);
    return w;
}

} // namespace gcm
