#include "gcm/tensor.hpp"

#include <cmath>
#include <sstream>

namespace gcm {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ", ";
        os << shape[i];
    }
    os << ")";
    return os.str();
}

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    for (std::size_t d : shape_) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str(shape_));
    }
    data_.assign(shape_product(shape_), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    for (std::size_t d : shape_) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str(shape_));
    }
    if (shape_product(shape_) != data_.size()) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str(shape_));
    }
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
    Tensor t(std::move(shape));
    for (double& v : t.data_) v = value;
    return t;
}

std::size_t Tensor::dim(std::size_t i) const {
    if (i >= shape_.size()) {
        throw ShapeError("axis " + std::to_string(i) + " out of range for rank " +
                         std::to_string(shape_.size()));
    }
    return shape_[i];
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("add: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
    Tensor out(a.shape());
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("mul: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
    Tensor out(a.shape());
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
    return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("max_abs_diff: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = std::fabs(a[i] - b[i]);
        if (d > m) m = d;
    }
    return m;
}

} // namespace gcm
