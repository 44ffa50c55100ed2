#include "gcm/carafe.hpp"

#include <algorithm>
#include <string>

namespace gcm {

namespace {

void check_config(const CarafeConfig& cfg) {
    if (cfg.k_up % 2 == 0 || cfg.k_up == 0) throw ValueError("carafe: k_up must be odd");
    if (cfg.k_encoder % 2 == 0 || cfg.k_encoder == 0) throw ValueError("carafe: k_encoder must be odd");
    if (cfg.scale == 0) throw ValueError("carafe: scale must be positive");
}

} // namespace

std::size_t carafe_mid_channels(std::size_t c_in, const CarafeConfig& cfg) {
    if (cfg.c_mid > 0) {
        if (cfg.c_mid > c_in) throw ValueError("carafe: c_mid must not exceed C_in");
        return cfg.c_mid;
    }
    return std::max<std::size_t>(c_in / 4, 1);
}

CarafeWeights make_carafe_weights(std::size_t c_in, const CarafeConfig& cfg, Rng& rng) {
    check_config(cfg);
    const std::size_t c_mid = carafe_mid_channels(c_in, cfg);
    const std::size_t enc_out = cfg.scale * cfg.scale * cfg.k_up * cfg.k_up;
    CarafeWeights w;
    w.compress = make_conv_weights(c_mid, c_in, 1, 1, 0, 1, rng);
    w.encode = make_conv_weights(enc_out, c_mid, cfg.k_encoder, 1,
                                 static_cast<int>((cfg.k_encoder - 1) / 2), 1, rng);
    return w;
}

Tensor channel_compress(const Tensor& x, const CarafeWeights& w) {
    return conv2d(x, w.compress);
}

ReassemblyField predict_kernels(const Tensor& x_comp, const CarafeWeights& w,
                                const CarafeConfig& cfg) {
    check_config(cfg);
    const std::size_t enc_out = cfg.scale * cfg.scale * cfg.k_up * cfg.k_up;
    if (w.encode.kernel.dim(0) != enc_out) {
        throw ShapeError("predict_kernels: encoder must emit scale^2*k_up^2=" +
                         std::to_string(enc_out) + " channels, has " +
                         std::to_string(w.encode.kernel.dim(0)));
    }
    const Tensor logits = conv2d(x_comp, w.encode);          // (r^2*k_up^2, H, W)
    const Tensor shuffled = pixel_shuffle(logits, cfg.scale); // (k_up^2, rH, rW)
    ReassemblyField field;
    field.k_up = cfg.k_up;
    field.kernels = cfg.softmax_normalize ? softmax_axis(shuffled, 0) : shuffled;
    return field;
}

Tensor reassemble(const Tensor& x, const ReassemblyField& field, const CarafeConfig& cfg) {
    check_config(cfg);
    if (x.rank() != 3) throw ShapeError("reassemble: expected (C,H,W) input");
    const int c = static_cast<int>(x.dim(0));
    const int h = static_cast<int>(x.dim(1));
    const int w = static_cast<int>(x.dim(2));
    const int r = static_cast<int>(cfg.scale);
    const int k = static_cast<int>(field.k_up);
    const int half = k / 2;
    if (field.kernels.rank() != 3 ||
        field.kernels.dim(0) != static_cast<std::size_t>(k * k) ||
        field.kernels.dim(1) != static_cast<std::size_t>(h * r) ||
        field.kernels.dim(2) != static_cast<std::size_t>(w * r)) {
        throw ShapeError("reassemble: field shape " + shape_str(field.kernels.shape()) +
                         " does not match input " + shape_str(x.shape()) + " at scale " +
                         std::to_string(r));
    }
    const int oh = h * r, ow = w * r;
    Tensor out({static_cast<std::size_t>(c), static_cast<std::size_t>(oh),
                static_cast<std::size_t>(ow)});

    const double* xp = x.data();
    const double* fp = field.kernels.data();
    double* op = out.data();
    const std::size_t oplane = static_cast<std::size_t>(oh) * ow;

    #pragma omp parallel for collapse(2) schedule(static)
    for (int ci = 0; ci < c; ++ci) {
        for (int oy = 0; oy < oh; ++oy) {
            const int sy = oy / r;
            const int n_lo = sy - half < 0 ? -sy : -half;
            const int n_hi = sy + half >= h ? h - 1 - sy : half;
            const double* xc = xp + static_cast<std::size_t>(ci) * h * w;
            for (int ox = 0; ox < ow; ++ox) {
                const int sx = ox / r;
                const int m_lo = sx - half < 0 ? -sx : -half;
                const int m_hi = sx + half >= w ? w - 1 - sx : half;
                const std::size_t site = static_cast<std::size_t>(oy) * ow + ox;
                double acc = 0.0;
                for (int n = n_lo; n <= n_hi; ++n) {
                    const double* xrow = xc + (sy + n) * w + sx;
                    const std::size_t krow = static_cast<std::size_t>((n + half) * k + half);
                    for (int m = m_lo; m <= m_hi; ++m) {
                        acc += fp[(krow + m) * oplane + site] * xrow[m];
                    }
                }
                op[static_cast<std::size_t>(ci) * oplane + site] = acc;
            }
        }
    }
    return out;
}

Tensor carafe_forward(const Tensor& x, const CarafeWeights& w, const CarafeConfig& cfg) {
    const Tensor comp = channel_compress(x, w);
    const ReassemblyField field = predict_kernels(comp, w, cfg);
    return reassemble(x, field, cfg);
}

} // namespace gcm
