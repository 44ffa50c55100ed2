#include "gcm/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gcm {

namespace {

void check_unit_range(const Tensor& img, const char* who) {
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = img[i];
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ValueError(std::string(who) + ": pixel value " + std::to_string(v) +
                             " outside [0,1] at index " + std::to_string(i));
        }
    }
}

void check_config(const GammaConfig& cfg) {
    if (!(cfg.g_min > 0.0) || !(cfg.g_min <= cfg.g_max)) {
        throw ValueError("gamma config requires 0 < g_min <= g_max");
    }
    if (!(cfg.epsilon > 0.0)) throw ValueError("gamma config requires epsilon > 0");
}

} // namespace

Tensor rgb_to_gray(const Tensor& img) {
    if (img.rank() != 3 || img.dim(0) != 3) {
        throw ShapeError("rgb_to_gray: expected (3,H,W) image, got " + shape_str(img.shape()));
    }
    check_unit_range(img, "rgb_to_gray");
    const std::size_t h = img.dim(1), w = img.dim(2);
    const std::size_t plane = h * w;
    Tensor gray({1, h, w});
    const double* p = img.data();
    double* g = gray.data();

    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(plane); ++i) {
        g[i] = 0.299 * p[i] + 0.587 * p[plane + i] + 0.114 * p[2 * plane + i];
    }
    return gray;
}

GammaStats compute_gamma(const Tensor& gray, const GammaConfig& cfg) {
    check_config(cfg);
    if (gray.rank() != 3 || gray.dim(0) != 1) {
        throw ShapeError("compute_gamma: expected (1,H,W) grayscale, got " + shape_str(gray.shape()));
    }
    const std::size_t n = gray.size();
    if (n == 0) throw ShapeError("compute_gamma: empty image");

    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += gray[i];
    mean /= static_cast<double>(n);

    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = gray[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);

    double gamma = cfg.g_min + (cfg.g_max - cfg.g_min) * mean / (mean + sd + cfg.epsilon);
    gamma = std::clamp(gamma, cfg.g_min, cfg.g_max);
    return GammaStats{gamma, mean, sd};
}

Tensor apply_gamma(const Tensor& img, double gamma, double epsilon) {
    if (!(gamma > 0.0)) throw ValueError("apply_gamma: gamma must be positive");
    check_unit_range(img, "apply_gamma");
    Tensor out(img.shape());
    const double* p = img.data();
    double* o = out.data();
    const long long n = static_cast<long long>(img.size());

    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        o[i] = std::clamp(std::pow(p[i] + epsilon, gamma), 0.0, 1.0);
    }
    return out;
}

CorrectionResult correct(const Tensor& img, const GammaConfig& cfg) {
    const Tensor gray = rgb_to_gray(img);
    const GammaStats st = compute_gamma(gray, cfg);
    Tensor corrected = apply_gamma(img, st.gamma, cfg.epsilon);
    return CorrectionResult{st.gamma, st.gray_mean, st.gray_std, std::move(corrected)};
}

} // namespace gcm
