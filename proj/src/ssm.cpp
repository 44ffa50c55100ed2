#include "gcm/ssm.hpp"

#include <cmath>
#include <string>

namespace gcm {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw ShapeError("matrix data length " + std::to_string(data_.size()) + " != " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ, " + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()));
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double av = a.at(i, k);
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out.at(i, j) += av * b.at(k, j);
            }
        }
    }
    return out;
}

Matrix matadd(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("matadd: shape mismatch");
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.values().size(); ++i) out.values()[i] = a.values()[i] + b.values()[i];
    return out;
}

Matrix matscale(const Matrix& a, double s) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.values().size(); ++i) out.values()[i] = a.values()[i] * s;
    return out;
}

double mat_norm1(const Matrix& a) {
    double best = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) s += std::fabs(a.at(i, j));
        best = std::max(best, s);
    }
    return best;
}

Matrix expm(const Matrix& a) {
    if (a.rows() != a.cols()) throw ShapeError("expm: matrix must be square");
    if (!a.all_finite()) throw ValueError("expm: non-finite entries");
    const std::size_t n = a.rows();

    // Scale down so the Taylor core converges fast, then square back up.
    const double norm = mat_norm1(a);
    int squarings = 0;
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    }
    const Matrix b = matscale(a, std::ldexp(1.0, -squarings));

    Matrix sum = Matrix::identity(n);
    Matrix term = Matrix::identity(n);
    for (int k = 1; k <= 64; ++k) {
        term = matscale(matmul(term, b), 1.0 / static_cast<double>(k));
        sum = matadd(sum, term);
        if (mat_norm1(term) < 1e-18 * std::max(1.0, mat_norm1(sum))) break;
    }
    for (int s = 0; s < squarings; ++s) sum = matmul(sum, sum);
    return sum;
}

DiscreteSsm zoh_discretize(const SsmParams& p) {
    const std::size_t n = p.a.rows();
    if (p.a.cols() != n) throw ShapeError("zoh_discretize: A must be square");
    if (p.b.rows() != n || p.b.cols() != 1) throw ShapeError("zoh_discretize: B must be Nx1");
    if (p.c.rows() != 1 || p.c.cols() != n) throw ShapeError("zoh_discretize: C must be 1xN");
    if (!(p.delta > 0.0)) throw ValueError("zoh_discretize: delta must be positive");
    if (!p.a.all_finite() || !p.b.all_finite() || !p.c.all_finite() || !std::isfinite(p.delta)) {
        throw ValueError("zoh_discretize: non-finite parameters");
    }

    const Matrix da = matscale(p.a, p.delta);
    DiscreteSsm d;
    d.a_bar = expm(da);
    d.c = p.c;

    // S = I + dA/2! + dA^2/3! + ... ; B_bar = delta * S * B.
    Matrix s = Matrix::identity(n);
    Matrix term = Matrix::identity(n);
    for (int k = 1; k <= 128; ++k) {
        term = matscale(matmul(term, da), 1.0 / static_cast<double>(k + 1));
        if (mat_norm1(term) < 1e-16) break;
        s = matadd(s, term);
    }
    d.b_bar = matscale(matmul(s, p.b), p.delta);
    return d;
}

std::vector<double> scan(const DiscreteSsm& d, const std::vector<double>& x) {
    if (x.empty()) throw ShapeError("scan: empty input sequence");
    const std::size_t n = d.a_bar.rows();
    std::vector<double> h(n, 0.0), hn(n, 0.0);
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t t = 0; t < x.size(); ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = d.b_bar.at(i, 0) * x[t];
            for (std::size_t j = 0; j < n; ++j) acc += d.a_bar.at(i, j) * h[j];
            hn[i] = acc;
        }
        std::swap(h, hn);
        double out = 0.0;
        for (std::size_t j = 0; j < n; ++j) out += d.c.at(0, j) * h[j];
        y[t] = out;
    }
    return y;
}

SsmKernel build_kernel(const DiscreteSsm& d, std::size_t length) {
    if (length == 0) throw ShapeError("build_kernel: length must be >= 1");
    const std::size_t n = d.a_bar.rows();
    std::vector<double> v(n), vn(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = d.b_bar.at(i, 0);

    SsmKernel k;
    k.k_bar.resize(length);
    for (std::size_t t = 0; t < length; ++t) {
        double out = 0.0;
        for (std::size_t j = 0; j < n; ++j) out += d.c.at(0, j) * v[j];
        k.k_bar[t] = out;
        if (t + 1 == length) break;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += d.a_bar.at(i, j) * v[j];
            vn[i] = acc;
        }
        std::swap(v, vn);
    }
    return k;
}

std::vector<double> conv_apply(const SsmKernel& k, const std::vector<double>& x) {
    if (k.k_bar.size() != x.size()) {
        throw ShapeError("conv_apply: kernel length " + std::to_string(k.k_bar.size()) +
                         " != input length " + std::to_string(x.size()));
    }
    const std::size_t l = x.size();
    std::vector<double> y(l, 0.0);
    for (std::size_t t = 0; t < l; ++t) {
        double acc = 0.0;
        for (std::size_t s = 0; s <= t; ++s) acc += k.k_bar[s] * x[t - s];
        y[t] = acc;
    }
    return y;
}

namespace {

// Flattened visit order of the (H, W) grid for one scan direction.
std::vector<std::size_t> scan_order(ScanOrder order, std::size_t h, std::size_t w) {
    std::vector<std::size_t> idx;
    idx.reserve(h * w);
    switch (order) {
        case ScanOrder::RowMajor:
            for (std::size_t i = 0; i < h * w; ++i) idx.push_back(i);
            break;
        case ScanOrder::RowMajorReverse:
            for (std::size_t i = h * w; i-- > 0;) idx.push_back(i);
            break;
        case ScanOrder::ColMajor:
            for (std::size_t x = 0; x < w; ++x)
                for (std::size_t y = 0; y < h; ++y) idx.push_back(y * w + x);
            break;
        case ScanOrder::ColMajorReverse:
            for (std::size_t x = w; x-- > 0;)
                for (std::size_t y = h; y-- > 0;) idx.push_back(y * w + x);
            break;
    }
    return idx;
}

} // namespace

Tensor ss2d_scan(const Tensor& x, const std::array<DiscreteSsm, 4>& dirs) {
    if (x.rank() != 3) throw ShapeError("ss2d_scan: expected (C,H,W) input");
    const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const std::size_t plane = h * w;

    const std::array<std::vector<std::size_t>, 4> orders = {
        scan_order(ScanOrder::RowMajor, h, w),
        scan_order(ScanOrder::RowMajorReverse, h, w),
        scan_order(ScanOrder::ColMajor, h, w),
        scan_order(ScanOrder::ColMajorReverse, h, w),
    };

    Tensor out(x.shape());
    const double* xp = x.data();
    double* op = out.data();

    // Channels are independent; directions are summed in fixed order per cell.
    #pragma omp parallel for schedule(static)
    for (long long ci = 0; ci < static_cast<long long>(c); ++ci) {
        const double* src = xp + static_cast<std::size_t>(ci) * plane;
        double* dst = op + static_cast<std::size_t>(ci) * plane;
        std::array<std::vector<double>, 4> traces;
        std::vector<double> seq(plane);
        for (std::size_t dir = 0; dir < 4; ++dir) {
            const auto& ord = orders[dir];
            for (std::size_t t = 0; t < plane; ++t) seq[t] = src[ord[t]];
            const std::vector<double> y = scan(dirs[dir], seq);
            traces[dir].assign(plane, 0.0);
            for (std::size_t t = 0; t < plane; ++t) traces[dir][ord[t]] = y[t];
        }
        for (std::size_t i = 0; i < plane; ++i) {
            dst[i] = ((traces[0][i] + traces[1][i]) + traces[2][i]) + traces[3][i];
        }
    }
    return out;
}

Tensor ss2d_scan(const Tensor& x, const DiscreteSsm& shared) {
    return ss2d_scan(x, std::array<DiscreteSsm, 4>{shared, shared, shared, shared});
}

SsmParams make_random_ssm(std::size_t n, Rng& rng, double delta_lo, double delta_hi) {
    SsmParams p;
    p.a = Matrix(n, n);
    p.b = Matrix(n, 1);
    p.c = Matrix(1, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) p.a.at(i, j) = rng.uniform(-1.0, 1.0);
    }
    // Diagonal dominance with negative diagonal keeps all eigenvalues in the
    // left half-plane, so the discrete system contracts and kernels decay.
    for (std::size_t i = 0; i < n; ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) off += std::fabs(p.a.at(i, j));
        }
        p.a.at(i, i) = -(1.0 + off + std::fabs(p.a.at(i, i)));
    }
    for (std::size_t i = 0; i < n; ++i) p.b.at(i, 0) = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) p.c.at(0, i) = rng.uniform(-1.0, 1.0);
    p.delta = rng.uniform(delta_lo, delta_hi);
    return p;
}

} // namespace gcm
