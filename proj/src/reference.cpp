#include "gcm/reference.hpp"

#include <cmath>
#include <vector>

namespace gcm::ref {

namespace {

// Zero-padded copy so the loop nests below need no bounds checks.
Tensor pad_input(const Tensor& x, int pad) {
    const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
    Tensor out({c, h + 2 * static_cast<std::size_t>(pad), w + 2 * static_cast<std::size_t>(pad)});
    for (std::size_t ci = 0; ci < c; ++ci) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t xx = 0; xx < w; ++xx) {
                out.at(ci, y + static_cast<std::size_t>(pad), xx + static_cast<std::size_t>(pad)) =
                    x.at(ci, y, xx);
            }
        }
    }
    return out;
}

} // namespace

Tensor conv2d(const Tensor& x, const ConvWeights& w) {
    const std::size_t c_in = x.dim(0);
    const std::size_t c_out = w.kernel.dim(0);
    const std::size_t cpg = w.kernel.dim(1);
    const std::size_t k = w.kernel.dim(2);
    const std::size_t stride = static_cast<std::size_t>(w.stride);
    const std::size_t groups = static_cast<std::size_t>(w.groups);
    const Tensor padded = pad_input(x, w.padding);
    const std::size_t ph = padded.dim(1), pw = padded.dim(2);
    const std::size_t oh = (ph - k) / stride + 1;
    const std::size_t ow = (pw - k) / stride + 1;
    const std::size_t out_per_group = c_out / groups;
    (void)c_in;

    Tensor out({c_out, oh, ow});
    for (std::size_t oc = 0; oc < c_out; ++oc) {
        const std::size_t ic0 = (oc / out_per_group) * cpg;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double acc = w.bias.empty() ? 0.0 : w.bias[oc];
                for (std::size_t ic = 0; ic < cpg; ++ic) {
                    for (std::size_t ky = 0; ky < k; ++ky) {
                        for (std::size_t kx = 0; kx < k; ++kx) {
                            acc += w.kernel[((oc * cpg + ic) * k + ky) * k + kx] *
                                   padded.at(ic0 + ic, oy * stride + ky, ox * stride + kx);
                        }
                    }
                }
                out.at(oc, oy, ox) = acc;
            }
        }
    }
    return out;
}

Tensor reassemble(const Tensor& x, const ReassemblyField& field, const CarafeConfig& cfg) {
    const int c = static_cast<int>(x.dim(0));
    const int h = static_cast<int>(x.dim(1));
    const int w = static_cast<int>(x.dim(2));
    const int r = static_cast<int>(cfg.scale);
    const int k = static_cast<int>(field.k_up);
    const int half = k / 2;

    Tensor out({static_cast<std::size_t>(c), static_cast<std::size_t>(h * r),
                static_cast<std::size_t>(w * r)});
    for (int ci = 0; ci < c; ++ci) {
        for (int oy = 0; oy < h * r; ++oy) {
            for (int ox = 0; ox < w * r; ++ox) {
                double acc = 0.0;
                for (int n = -half; n <= half; ++n) {
                    for (int m = -half; m <= half; ++m) {
                        const int sy = oy / r + n;
                        const int sx = ox / r + m;
                        if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                        acc += field.kernels.at(static_cast<std::size_t>((n + half) * k + (m + half)),
                                                static_cast<std::size_t>(oy),
                                                static_cast<std::size_t>(ox)) *
                               x.at(static_cast<std::size_t>(ci), static_cast<std::size_t>(sy),
                                    static_cast<std::size_t>(sx));
                    }
                }
                out.at(static_cast<std::size_t>(ci), static_cast<std::size_t>(oy),
                       static_cast<std::size_t>(ox)) = acc;
            }
        }
    }
    return out;
}

Tensor carafe_forward(const Tensor& x, const CarafeWeights& w, const CarafeConfig& cfg) {
    const int c_in = static_cast<int>(x.dim(0));
    const int h = static_cast<int>(x.dim(1));
    const int wd = static_cast<int>(x.dim(2));
    const int c_mid = static_cast<int>(w.compress.kernel.dim(0));
    const int ke = static_cast<int>(cfg.k_encoder);
    const int pe = ke / 2;
    const int r = static_cast<int>(cfg.scale);
    const int k = static_cast<int>(cfg.k_up);
    const int half = k / 2;
    const int enc_out = r * r * k * k;

    // 1x1 channel compression with bias.
    std::vector<double> comp(static_cast<std::size_t>(c_mid) * h * wd, 0.0);
    for (int m = 0; m < c_mid; ++m) {
        for (int y = 0; y < h; ++y) {
            for (int xx = 0; xx < wd; ++xx) {
                double acc = w.compress.bias.empty() ? 0.0 : w.compress.bias[static_cast<std::size_t>(m)];
                for (int ci = 0; ci < c_in; ++ci) {
                    acc += w.compress.kernel[static_cast<std::size_t>(m * c_in + ci)] *
                           x.at(static_cast<std::size_t>(ci), static_cast<std::size_t>(y),
                                static_cast<std::size_t>(xx));
                }
                comp[(static_cast<std::size_t>(m) * h + y) * wd + xx] = acc;
            }
        }
    }

    // Same-padding content encoder.
    std::vector<double> enc(static_cast<std::size_t>(enc_out) * h * wd, 0.0);
    for (int e = 0; e < enc_out; ++e) {
        for (int y = 0; y < h; ++y) {
            for (int xx = 0; xx < wd; ++xx) {
                double acc = w.encode.bias.empty() ? 0.0 : w.encode.bias[static_cast<std::size_t>(e)];
                for (int m = 0; m < c_mid; ++m) {
                    for (int ky = 0; ky < ke; ++ky) {
                        for (int kx = 0; kx < ke; ++kx) {
                            const int sy = y + ky - pe;
                            const int sx = xx + kx - pe;
                            if (sy < 0 || sy >= h || sx < 0 || sx >= wd) continue;
                            acc += w.encode.kernel[((static_cast<std::size_t>(e) * c_mid + m) * ke +
                                                    ky) * ke + kx] *
                                   comp[(static_cast<std::size_t>(m) * h + sy) * wd + sx];
                        }
                    }
                }
                enc[(static_cast<std::size_t>(e) * h + y) * wd + xx] = acc;
            }
        }
    }

    // Per upsampled site: gather the k*k logits through the sub-pixel layout,
    // normalize, and take the convex combination of the source window.
    const int oh = h * r, ow = wd * r;
    Tensor out({static_cast<std::size_t>(c_in), static_cast<std::size_t>(oh),
                static_cast<std::size_t>(ow)});
    std::vector<double> kern(static_cast<std::size_t>(k) * k, 0.0);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const int sub = (oy % r) * r + (ox % r);
            const int sy0 = oy / r, sx0 = ox / r;
            for (int q = 0; q < k * k; ++q) {
                const int src_c = q * r * r + sub;
                kern[static_cast<std::size_t>(q)] =
                    enc[(static_cast<std::size_t>(src_c) * h + sy0) * wd + sx0];
            }
            if (cfg.softmax_normalize) {
                double mx = kern[0];
                for (int q = 1; q < k * k; ++q) mx = std::max(mx, kern[static_cast<std::size_t>(q)]);
                double sum = 0.0;
                for (int q = 0; q < k * k; ++q) {
                    kern[static_cast<std::size_t>(q)] = std::exp(kern[static_cast<std::size_t>(q)] - mx);
                    sum += kern[static_cast<std::size_t>(q)];
                }
                for (int q = 0; q < k * k; ++q) kern[static_cast<std::size_t>(q)] /= sum;
            }
            for (int ci = 0; ci < c_in; ++ci) {
                double acc = 0.0;
                for (int n = -half; n <= half; ++n) {
                    for (int m = -half; m <= half; ++m) {
                        const int sy = sy0 + n, sx = sx0 + m;
                        if (sy < 0 || sy >= h || sx < 0 || sx >= wd) continue;
                        acc += kern[static_cast<std::size_t>((n + half) * k + (m + half))] *
                               x.at(static_cast<std::size_t>(ci), static_cast<std::size_t>(sy),
                                    static_cast<std::size_t>(sx));
                    }
                }
                out.at(static_cast<std::size_t>(ci), static_cast<std::size_t>(oy),
                       static_cast<std::size_t>(ox)) = acc;
            }
        }
    }
    return out;
}

Tensor ss2d_scan(const Tensor& x, const std::array<DiscreteSsm, 4>& dirs) {
    const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const std::size_t plane = h * w;
    Tensor out(x.shape());

    // Visit orders spelled out longhand, one per direction.
    std::array<std::vector<std::size_t>, 4> orders;
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t xx = 0; xx < w; ++xx) orders[0].push_back(y * w + xx);
    for (std::size_t y = h; y-- > 0;)
        for (std::size_t xx = w; xx-- > 0;) orders[1].push_back(y * w + xx);
    for (std::size_t xx = 0; xx < w; ++xx)
        for (std::size_t y = 0; y < h; ++y) orders[2].push_back(y * w + xx);
    for (std::size_t xx = w; xx-- > 0;)
        for (std::size_t y = h; y-- > 0;) orders[3].push_back(y * w + xx);

    for (std::size_t ci = 0; ci < c; ++ci) {
        std::array<std::vector<double>, 4> traces;
        for (std::size_t dir = 0; dir < 4; ++dir) {
            const DiscreteSsm& d = dirs[dir];
            const std::size_t n = d.a_bar.rows();
            std::vector<double> hstate(n, 0.0), hnext(n, 0.0);
            traces[dir].assign(plane, 0.0);
            for (std::size_t t = 0; t < plane; ++t) {
                const double xt = x.data()[ci * plane + orders[dir][t]];
                for (std::size_t i = 0; i < n; ++i) {
                    double acc = d.b_bar.at(i, 0) * xt;
                    for (std::size_t j = 0; j < n; ++j) acc += d.a_bar.at(i, j) * hstate[j];
                    hnext[i] = acc;
                }
                std::swap(hstate, hnext);
                double yt = 0.0;
                for (std::size_t j = 0; j < n; ++j) yt += d.c.at(0, j) * hstate[j];
                traces[dir][orders[dir][t]] = yt;
            }
        }
        for (std::size_t i = 0; i < plane; ++i) {
            out.data()[ci * plane + i] =
                ((traces[0][i] + traces[1][i]) + traces[2][i]) + traces[3][i];
        }
    }
    return out;
}

} // namespace gcm::ref
