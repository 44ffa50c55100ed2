#pragma once

#include "gcm/tensor.hpp"

namespace gcm {

/// Bounds and epsilon for the adaptive gamma rule.
struct GammaConfig {
    double g_min = 0.5;
    double g_max = 2.0;
    double epsilon = 1e-6;
};

struct GammaStats {
    double gamma;
    double gray_mean;
    double gray_std; // population standard deviation
};

struct CorrectionResult {
    double gamma;
    double gray_mean;
    double gray_std;
    Tensor corrected; // (3,H,W), values in [0,1]
};

/// gray = 0.299 R + 0.587 G + 0.114 B, channel order R,G,B, pixels in [0,1].
Tensor rgb_to_gray(const Tensor& img);

/// gamma = g_min + (g_max-g_min) * mean/(mean+std+eps), clamped to [g_min,g_max].
GammaStats compute_gamma(const Tensor& gray, const GammaConfig& cfg);

/// out = clamp((v+eps)^gamma, 0, 1) per pixel; monotone in v for fixed gamma.
Tensor apply_gamma(const Tensor& img, double gamma, double epsilon);

/// rgb_to_gray -> compute_gamma -> apply_gamma.
CorrectionResult correct(const Tensor& img, const GammaConfig& cfg);

} // namespace gcm
