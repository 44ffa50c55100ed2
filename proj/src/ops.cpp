#include "gcm/ops.hpp"

#include <cmath>
#include <string>

namespace gcm {

namespace {

void check_rank3(const Tensor& x, const char* who) {
    if (x.rank() != 3) {
        throw ShapeError(std::string(who) + ": expected rank-3 (C,H,W) input, got " +
                         shape_str(x.shape()));
    }
}

} // namespace

double silu(double v) { return v / (1.0 + std::exp(-v)); }

// Exact erf-based form, not the tanh approximation.
double gelu(double v) { return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))); }

Tensor conv2d(const Tensor& x, const ConvWeights& w) {
    check_rank3(x, "conv2d");
    if (w.kernel.rank() != 4) {
        throw ShapeError("conv2d: kernel must be rank-4 (C_out, C_in/groups, k, k), got " +
                         shape_str(w.kernel.shape()));
    }
    const int c_in = static_cast<int>(x.dim(0));
    const int h = static_cast<int>(x.dim(1));
    const int wd = static_cast<int>(x.dim(2));
    const int c_out = static_cast<int>(w.kernel.dim(0));
    const int cpg = static_cast<int>(w.kernel.dim(1));
    const int kh = static_cast<int>(w.kernel.dim(2));
    const int kw = static_cast<int>(w.kernel.dim(3));
    const int stride = w.stride;
    const int pad = w.padding;
    const int groups = w.groups;

    if (kh != kw) throw ShapeError("conv2d: kernels must be square");
    if (stride < 1) throw ValueError("conv2d: stride must be positive");
    if (pad < 0) throw ValueError("conv2d: padding must be non-negative");
    if (groups < 1 || c_in % groups != 0 || c_out % groups != 0) {
        throw ShapeError("conv2d: groups " + std::to_string(groups) + " must divide C_in " +
                         std::to_string(c_in) + " and C_out " + std::to_string(c_out));
    }
    if (cpg != c_in / groups) {
        throw ShapeError("conv2d: kernel expects " + std::to_string(cpg) +
                         " channels per group, input provides " + std::to_string(c_in / groups));
    }
    if (!w.bias.empty() && static_cast<int>(w.bias.size()) != c_out) {
        throw ShapeError("conv2d: bias length " + std::to_string(w.bias.size()) +
                         " != C_out " + std::to_string(c_out));
    }
    const int oh = (h + 2 * pad - kh) / stride + 1;
    const int ow = (wd + 2 * pad - kw) / stride + 1;
    if (h + 2 * pad < kh || wd + 2 * pad < kw || oh <= 0 || ow <= 0) {
        throw ShapeError("conv2d: non-positive output size for input " + shape_str(x.shape()) +
                         ", k=" + std::to_string(kh) + ", stride=" + std::to_string(stride) +
                         ", pad=" + std::to_string(pad));
    }

    Tensor out({static_cast<std::size_t>(c_out), static_cast<std::size_t>(oh),
                static_cast<std::size_t>(ow)});
    const double* xp = x.data();
    const double* kp = w.kernel.data();
    double* op = out.data();
    const int out_per_group = c_out / groups;

    // Each (oc, oy, ox) cell is produced by exactly one iteration with a fixed
    // inner summation order, so results are identical for any thread count.
    // Valid tap ranges are hoisted so interior pixels run branch-free.
    #pragma omp parallel for collapse(2) schedule(static)
    for (int oc = 0; oc < c_out; ++oc) {
        for (int oy = 0; oy < oh; ++oy) {
            const int g = oc / out_per_group;
            const int ic0 = g * cpg;
            const int iy0 = oy * stride - pad;
            const int ky_lo = iy0 < 0 ? -iy0 : 0;
            const int ky_hi = iy0 + kh > h ? h - iy0 : kh;
            for (int ox = 0; ox < ow; ++ox) {
                double acc = w.bias.empty() ? 0.0 : w.bias[oc];
                const int ix0 = ox * stride - pad;
                const int kx_lo = ix0 < 0 ? -ix0 : 0;
                const int kx_hi = ix0 + kw > wd ? wd - ix0 : kw;
                for (int ic = 0; ic < cpg; ++ic) {
                    const double* xc = xp + static_cast<std::size_t>(ic0 + ic) * h * wd;
                    const double* kc = kp + ((static_cast<std::size_t>(oc) * cpg + ic) * kh) * kw;
                    for (int ky = ky_lo; ky < ky_hi; ++ky) {
                        const double* xrow = xc + (iy0 + ky) * wd + ix0;
                        const double* krow = kc + ky * kw;
                        for (int kx = kx_lo; kx < kx_hi; ++kx) {
                            acc += krow[kx] * xrow[kx];
                        }
                    }
                }
                op[(static_cast<std::size_t>(oc) * oh + oy) * ow + ox] = acc;
            }
        }
    }
    return out;
}

Tensor batch_norm_infer(const Tensor& x, const NormStats& s) {
    check_rank3(x, "batch_norm_infer");
    const std::size_t c = x.dim(0);
    if (s.mean.size() != c || s.variance.size() != c || s.scale.size() != c ||
        s.shift.size() != c) {
        throw ShapeError("batch_norm_infer: stats vectors must have length C=" + std::to_string(c));
    }
    if (s.epsilon <= 0.0) throw ValueError("batch_norm_infer: epsilon must be positive");
    for (double v : s.variance) {
        if (v < 0.0) throw ValueError("batch_norm_infer: negative variance");
    }
    const std::size_t plane = x.dim(1) * x.dim(2);
    Tensor out(x.shape());
    const double* xp = x.data();
    double* op = out.data();

    #pragma omp parallel for schedule(static)
    for (long long ci = 0; ci < static_cast<long long>(c); ++ci) {
        const double inv = 1.0 / std::sqrt(s.variance[ci] + s.epsilon);
        const double a = s.scale[ci] * inv;
        const double b = s.shift[ci] - a * s.mean[ci];
        const double* src = xp + ci * plane;
        double* dst = op + ci * plane;
        for (std::size_t i = 0; i < plane; ++i) dst[i] = a * src[i] + b;
    }
    return out;
}

Tensor layer_norm(const Tensor& x, const std::vector<double>& scale,
                  const std::vector<double>& shift, double epsilon) {
    check_rank3(x, "layer_norm");
    const std::size_t c = x.dim(0);
    const std::size_t h = x.dim(1);
    const std::size_t w = x.dim(2);
    if (scale.size() != c || shift.size() != c) {
        throw ShapeError("layer_norm: scale/shift must have length C=" + std::to_string(c));
    }
    if (epsilon <= 0.0) throw ValueError("layer_norm: epsilon must be positive");
    const std::size_t plane = h * w;
    Tensor out(x.shape());
    const double* xp = x.data();
    double* op = out.data();

    #pragma omp parallel for schedule(static)
    for (long long site = 0; site < static_cast<long long>(plane); ++site) {
        double mean = 0.0;
        for (std::size_t ci = 0; ci < c; ++ci) mean += xp[ci * plane + site];
        mean /= static_cast<double>(c);
        double var = 0.0;
        for (std::size_t ci = 0; ci < c; ++ci) {
            const double d = xp[ci * plane + site] - mean;
            var += d * d;
        }
        var /= static_cast<double>(c);
        const double inv = 1.0 / std::sqrt(var + epsilon);
        for (std::size_t ci = 0; ci < c; ++ci) {
            op[ci * plane + site] = scale[ci] * (xp[ci * plane + site] - mean) * inv + shift[ci];
        }
    }
    return out;
}

Tensor activate(Activation kind, const Tensor& x) {
    Tensor out(x.shape());
    const double* xp = x.data();
    double* op = out.data();
    const long long n = static_cast<long long>(x.size());
    if (kind == Activation::SiLU) {
        #pragma omp parallel for schedule(static)
        for (long long i = 0; i < n; ++i) op[i] = silu(xp[i]);
    } else {
        #pragma omp parallel for schedule(static)
        for (long long i = 0; i < n; ++i) op[i] = gelu(xp[i]);
    }
    return out;
}

Tensor softmax_axis(const Tensor& x, std::size_t axis) {
    if (axis >= x.rank()) {
        throw ShapeError("softmax_axis: axis " + std::to_string(axis) + " out of range for " +
                         shape_str(x.shape()));
    }
    const std::size_t n = x.dim(axis);
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);
    for (std::size_t i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);

    Tensor out(x.shape());
    const double* xp = x.data();
    double* op = out.data();

    #pragma omp parallel for collapse(2) schedule(static)
    for (long long o = 0; o < static_cast<long long>(outer); ++o) {
        for (long long in = 0; in < static_cast<long long>(inner); ++in) {
            const std::size_t base = static_cast<std::size_t>(o) * n * inner + in;
            double mx = xp[base];
            for (std::size_t k = 1; k < n; ++k) mx = std::max(mx, xp[base + k * inner]);
            double sum = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double e = std::exp(xp[base + k * inner] - mx);
                op[base + k * inner] = e;
                sum += e;
            }
            const double inv = 1.0 / sum;
            for (std::size_t k = 0; k < n; ++k) op[base + k * inner] *= inv;
        }
    }
    return out;
}

Tensor pixel_shuffle(const Tensor& x, std::size_t r) {
    check_rank3(x, "pixel_shuffle");
    if (r == 0) throw ValueError("pixel_shuffle: scale must be positive");
    const std::size_t c_in = x.dim(0);
    const std::size_t h = x.dim(1);
    const std::size_t w = x.dim(2);
    if (c_in % (r * r) != 0) {
        throw ShapeError("pixel_shuffle: channel count " + std::to_string(c_in) +
                         " not divisible by r^2=" + std::to_string(r * r));
    }
    const std::size_t c_out = c_in / (r * r);
    Tensor out({c_out, h * r, w * r});
    const std::size_t oh = h * r, ow = w * r;

    #pragma omp parallel for schedule(static)
    for (long long k = 0; k < static_cast<long long>(c_out); ++k) {
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                const std::size_t src_c = static_cast<std::size_t>(k) * r * r + (i % r) * r + (j % r);
                out.at(static_cast<std::size_t>(k), i, j) = x.at(src_c, i / r, j / r);
            }
        }
    }
    return out;
}

Tensor pixel_unshuffle(const Tensor& x, std::size_t r) {
    check_rank3(x, "pixel_unshuffle");
    if (r == 0) throw ValueError("pixel_unshuffle: scale must be positive");
    const std::size_t c = x.dim(0);
    const std::size_t oh = x.dim(1);
    const std::size_t ow = x.dim(2);
    if (oh % r != 0 || ow % r != 0) {
        throw ShapeError("pixel_unshuffle: spatial size " + shape_str(x.shape()) +
                         " not divisible by r=" + std::to_string(r));
    }
    const std::size_t h = oh / r, w = ow / r;
    Tensor out({c * r * r, h, w});

    #pragma omp parallel for schedule(static)
    for (long long k = 0; k < static_cast<long long>(c); ++k) {
        for (std::size_t py = 0; py < r; ++py) {
            for (std::size_t px = 0; px < r; ++px) {
                const std::size_t dst_c = static_cast<std::size_t>(k) * r * r + py * r + px;
                for (std::size_t y = 0; y < h; ++y) {
                    for (std::size_t xx = 0; xx < w; ++xx) {
                        out.at(dst_c, y, xx) = x.at(static_cast<std::size_t>(k), y * r + py, xx * r + px);
                    }
                }
            }
        }
    }
    return out;
}

ConvWeights make_conv_weights(std::size_t c_out, std::size_t c_in, std::size_t k,
                              int stride, int padding, int groups, Rng& rng) {
    const std::size_t cpg = c_in / static_cast<std::size_t>(groups);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cpg * k * k));
    Tensor kernel({c_out, cpg, k, k});
    for (std::size_t i = 0; i < kernel.size(); ++i) kernel[i] = rng.uniform(-bound, bound);
    std::vector<double> bias(c_out);
    for (double& b : bias) b = rng.uniform(-bound, bound);
    return ConvWeights{std::move(kernel), std::move(bias), stride, padding, groups};
}

ConvWeights make_zero_conv_weights(std::size_t c_out, std::size_t c_in, std::size_t k,
                                   int stride, int padding, int groups) {
    Tensor kernel({c_out, c_in / static_cast<std::size_t>(groups), k, k});
    return ConvWeights{std::move(kernel), std::vector<double>(c_out, 0.0), stride, padding, groups};
}

NormStats make_identity_norm(std::size_t channels, double epsilon) {
    NormStats s;
    s.mean.assign(channels, 0.0);
    s.variance.assign(channels, 1.0);
    s.scale.assign(channels, 1.0);
    s.shift.assign(channels, 0.0);
    s.epsilon = epsilon;
    return s;
}

} // namespace gcm
