#pragma once

#include <vector>

#include "gcm/rng.hpp"
#include "gcm/tensor.hpp"

namespace gcm {

/// 2-D convolution parameters. Kernel layout (C_out, C_in/groups, k, k).
/// groups == C_in == C_out expresses a depthwise convolution.
struct ConvWeights {
    Tensor kernel;
    std::vector<double> bias; // empty or length C_out
    int stride = 1;
    int padding = 0;
    int groups = 1;
};

/// Per-channel inference-mode normalization statistics.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> variance;
    std::vector<double> scale;
    std::vector<double> shift;
    double epsilon = 1e-5;
};

enum class Activation { SiLU, GELU };

/// Cross-correlation with zero padding (no kernel flip).
/// Output H' = (H + 2*pad - k)/stride + 1, same for W'.
Tensor conv2d(const Tensor& x, const ConvWeights& w);

/// y[c,i,j] = scale[c]*(x[c,i,j]-mean[c])/sqrt(variance[c]+eps) + shift[c]
Tensor batch_norm_infer(const Tensor& x, const NormStats& s);

/// Normalizes across channels at each spatial site, then applies the
/// per-channel affine. Zero-variance sites are absorbed by epsilon.
Tensor layer_norm(const Tensor& x, const std::vector<double>& scale,
                  const std::vector<double>& shift, double epsilon = 1e-5);

/// Elementwise SiLU(v) = v*sigmoid(v) or GELU via the exact Gaussian CDF.
Tensor activate(Activation kind, const Tensor& x);

double silu(double v);
double gelu(double v);

/// Softmax along one axis with max-subtraction; each slice sums to 1.
Tensor softmax_axis(const Tensor& x, std::size_t axis);

/// (C*r^2, H, W) -> (C, rH, rW). Output channel k at (i,j) reads input
/// channel k*r^2 + (i%r)*r + (j%r) at (i/r, j/r).
Tensor pixel_shuffle(const Tensor& x, std::size_t r);

/// Exact inverse of pixel_shuffle: (C, rH, rW) -> (C*r^2, H, W).
Tensor pixel_unshuffle(const Tensor& x, std::size_t r);

/// Seeded conv init: kernel and bias uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
ConvWeights make_conv_weights(std::size_t c_out, std::size_t c_in, std::size_t k,
                              int stride, int padding, int groups, Rng& rng);

/// All-zero kernel and bias with the same geometry.
ConvWeights make_zero_conv_weights(std::size_t c_out, std::size_t c_in, std::size_t k,
                                   int stride, int padding, int groups);

/// Identity stats: mean 0, var 1, scale 1, shift 0.
NormStats make_identity_norm(std::size_t channels, double epsilon = 1e-5);

} // namespace gcm
