#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "gcm/rng.hpp"
#include "gcm/tensor.hpp"

namespace gcm {

/// Small dense matrix for state-space algebra (row-major).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    const std::vector<double>& values() const { return data_; }
    std::vector<double>& values() { return data_; }
    bool all_finite() const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matadd(const Matrix& a, const Matrix& b);
Matrix matscale(const Matrix& a, double s);
double mat_norm1(const Matrix& a); // max column sum

/// Matrix exponential by scaling-and-squaring with a Taylor core.
Matrix expm(const Matrix& a);

/// Continuous system (A, B, C) with timescale delta.
/// A: NxN evolution, B: Nx1 input projection, C: 1xN output projection.
struct SsmParams {
    Matrix a;
    Matrix b;
    Matrix c;
    double delta = 0.0;
};

struct DiscreteSsm {
    Matrix a_bar; // exp(delta*A)
    Matrix b_bar; // (delta*A)^-1 (exp(delta*A) - I) delta*B, via series
    Matrix c;
};

/// Impulse response (C B_bar, C A_bar B_bar, ..., C A_bar^{L-1} B_bar).
struct SsmKernel {
    std::vector<double> k_bar;
};

/// Zero-order hold. B_bar uses the always-convergent series
/// delta * (I + dA/2! + dA^2/3! + ...) * B so singular A needs no branch;
/// terms stop once their 1-norm drops below 1e-16.
DiscreteSsm zoh_discretize(const SsmParams& p);

/// h_t = A_bar h_{t-1} + B_bar x_t with h_{-1} = 0; y_t = C h_t.
std::vector<double> scan(const DiscreteSsm& d, const std::vector<double>& x);

/// k_bar[t] = C A_bar^t B_bar via iterated matrix-vector products.
SsmKernel build_kernel(const DiscreteSsm& d, std::size_t length);

/// Causal convolution y_t = sum_{s<=t} k_bar[s] x_{t-s}.
std::vector<double> conv_apply(const SsmKernel& k, const std::vector<double>& x);

/// Scan traversal orders of the spatial grid.
enum class ScanOrder { RowMajor, RowMajorReverse, ColMajor, ColMajorReverse };

/// Four-direction 2D selective scan: flatten the grid in each order, run the
/// 1D scan per channel, un-flatten, and sum the four outputs in fixed
/// direction order (bitwise identical for any thread count).
Tensor ss2d_scan(const Tensor& x, const std::array<DiscreteSsm, 4>& dirs);
Tensor ss2d_scan(const Tensor& x, const DiscreteSsm& shared);

/// Random stable system: off-diagonal entries uniform, diagonal shifted so
/// every Gershgorin disc stays in the left half-plane.
SsmParams make_random_ssm(std::size_t n, Rng& rng, double delta_lo = 0.05, double delta_hi = 0.2);

} // namespace gcm
