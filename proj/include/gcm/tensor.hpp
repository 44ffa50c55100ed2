#pragma once

#include <cstddef>
#include <vector>

#include "gcm/errors.hpp"

namespace gcm {

/// Dense real array. Row-major storage; image/feature data uses the
/// channel-major (C, H, W) convention throughout the library.
class Tensor {
public:
    Tensor() = default;

    /// Zero-filled tensor of the given shape.
    explicit Tensor(std::vector<std::size_t> shape);

    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor full(std::vector<std::size_t> shape, double value);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const;
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // (C, H, W) accessors for rank-3 tensors; no bounds check in release.
    double& at(std::size_t c, std::size_t y, std::size_t x) {
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }
    double at(std::size_t c, std::size_t y, std::size_t x) const {
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

/// Human-readable "(c, h, w)" string for diagnostics.
std::string shape_str(const std::vector<std::size_t>& shape);

/// Elementwise sum; shapes must match.
Tensor add(const Tensor& a, const Tensor& b);

/// Elementwise (Hadamard) product; shapes must match.
Tensor mul(const Tensor& a, const Tensor& b);

/// Largest absolute elementwise difference; shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

} // namespace gcm
