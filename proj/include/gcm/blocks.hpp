#pragma once

#include <array>

#include "gcm/ops.hpp"
#include "gcm/ssm.hpp"
#include "gcm/tensor.hpp"

namespace gcm {

/// Channel-wise layer-norm affine parameters.
struct LayerNormParams {
    std::vector<double> scale;
    std::vector<double> shift;
    double epsilon = 1e-5;
};

/// Two stride-2 3x3 convolutions, each followed by BN and SiLU. H,W -> /4.
struct StemWeights {
    ConvWeights conv1;
    NormStats bn1;
    ConvWeights conv2;
    NormStats bn2;
};

/// 2x2 space-to-depth followed by a pointwise compression, no normalization.
struct ClueMergeWeights {
    ConvWeights pointwise; // 4C -> C'
};

/// Depthwise 3x3 + BN, then two pointwise convolutions around GELU,
/// residual added from the block input.
struct LocalSpatialWeights {
    ConvWeights dw; // depthwise 3x3, same padding
    NormStats bn;
    ConvWeights pw1;
    ConvWeights pw2;
};

/// Two pointwise branches; gate = branch1 * GELU(DWConv(branch2) + branch2);
/// pointwise output conv; residual added from the block input.
struct ResGatedWeights {
    ConvWeights branch1;
    ConvWeights branch2;
    ConvWeights dw; // depthwise 3x3, same padding
    ConvWeights out;
};

/// Full ODSS block: entry pointwise + BN + SiLU, then the LS/SS2D stage and
/// the RG stage, each with layer norm and a residual connection.
struct OdssWeights {
    ConvWeights entry; // 1x1, C -> C
    NormStats entry_bn;
    LocalSpatialWeights ls;
    LayerNormParams ln1; // after LS, before SS2D
    std::array<SsmParams, 4> ss2d; // one continuous system per scan direction
    LayerNormParams ln2; // before RG
    ResGatedWeights rg;
};

LayerNormParams make_identity_layer_norm(std::size_t channels, double epsilon = 1e-5);
LayerNormParams make_zero_layer_norm(std::size_t channels, double epsilon = 1e-5);

StemWeights make_stem_weights(std::size_t c_out, Rng& rng);
ClueMergeWeights make_clue_merge_weights(std::size_t c_in, std::size_t c_out, Rng& rng);
LocalSpatialWeights make_local_spatial_weights(std::size_t channels, Rng& rng);
LocalSpatialWeights make_zero_local_spatial_weights(std::size_t channels);
ResGatedWeights make_rg_weights(std::size_t channels, Rng& rng);
ResGatedWeights make_zero_rg_weights(std::size_t channels);
OdssWeights make_odss_weights(std::size_t channels, std::size_t state_size, Rng& rng);
OdssWeights make_zero_odss_weights(std::size_t channels, std::size_t state_size);

/// (3,H,W) -> (C, H/4, W/4); H and W must be divisible by 4.
Tensor simple_stem(const Tensor& img, const StemWeights& w);

/// (C,H,W) -> (C', H/2, W/2); H and W must be even.
Tensor vision_clue_merge(const Tensor& x, const ClueMergeWeights& w);

/// F_out = Conv1x1(GELU(Conv1x1(BN(DWConv3x3(f))))) + f
Tensor local_spatial_block(const Tensor& f, const LocalSpatialWeights& w);

/// X_out = Conv1x1(Conv1x1(x) * GELU(DWConv3x3(Conv1x1(x)) + Conv1x1(x))) + x
Tensor rg_block(const Tensor& x, const ResGatedWeights& w);

/// z2 = SiLU(BN(Conv1x1(z)));  z1 = SS2D(LN(LS(z2))) + z2;  out = RG(LN(z1)) + z1
Tensor odss_block(const Tensor& z, const OdssWeights& w);

} // namespace gcm
