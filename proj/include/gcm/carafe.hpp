#pragma once

#include "gcm/ops.hpp"
#include "gcm/tensor.hpp"

namespace gcm {

/// Content-aware reassembly upsampling settings.
struct CarafeConfig {
    std::size_t c_mid = 0;      // 0 selects max(C_in/4, 1)
    std::size_t k_encoder = 3;  // odd
    std::size_t k_up = 5;       // odd, centered reassembly window
    std::size_t scale = 2;
    bool softmax_normalize = true; // raw encoder logits when false (comparison mode)
};

struct CarafeWeights {
    ConvWeights compress; // C_in -> c_mid, 1x1
    ConvWeights encode;   // c_mid -> scale^2 * k_up^2, k_encoder, same padding
};

/// One normalized k_up x k_up kernel per upsampled location:
/// kernels has shape (k_up^2, rH, rW); each kernel sums to 1 with
/// non-negative entries after softmax normalization.
struct ReassemblyField {
    Tensor kernels;
    std::size_t k_up = 0;
};

std::size_t carafe_mid_channels(std::size_t c_in, const CarafeConfig& cfg);

/// Seeded initialization of both convolutions for a given input width.
CarafeWeights make_carafe_weights(std::size_t c_in, const CarafeConfig& cfg, Rng& rng);

/// 1x1 compression C_in -> c_mid, spatial size unchanged.
Tensor channel_compress(const Tensor& x, const CarafeWeights& w);

/// Content encoder -> pixel shuffle by scale -> softmax over the kernel axis.
ReassemblyField predict_kernels(const Tensor& x_comp, const CarafeWeights& w,
                                const CarafeConfig& cfg);

/// X'(c, l') = sum over the centered k_up window of W_l'(n,m) * X(c, i+n, j+m)
/// with (i,j) = (l'_y / r, l'_x / r); out-of-bounds sources contribute zero.
/// The same kernel is shared across channels.
Tensor reassemble(const Tensor& x, const ReassemblyField& field, const CarafeConfig& cfg);

/// channel_compress -> predict_kernels -> reassemble.
Tensor carafe_forward(const Tensor& x, const CarafeWeights& w, const CarafeConfig& cfg);

} // namespace gcm
