#include "trackcast/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "trackcast/errors.hpp"

namespace trackcast::nn {

namespace {

std::size_t element_count(const Shape& shape) {
    if (shape.empty() || shape.size() > 3) {
        throw DimensionError("tensor rank must be 1..3, got " + std::to_string(shape.size()));
    }
    for (auto d : shape) {
        if (d == 0) throw DimensionError("tensor dims must be >= 1, got " + shape_string(shape));
    }
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

} // namespace

std::string shape_string(const Shape& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    data_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::initializer_list<double> data)
    : Tensor(std::move(shape), Storage(data)) {}

Tensor::Tensor(Shape shape, const std::vector<double>& data)
    : Tensor(std::move(shape), Storage(data.begin(), data.end())) {}

Tensor::Tensor(Shape shape, Storage data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size()) {
        throw DimensionError("data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_string(shape_));
    }
}

double Tensor::at(std::size_t i, std::size_t j) const {
    if (rank() != 2 || i >= shape_[0] || j >= shape_[1]) {
        throw DimensionError("index out of range for shape " + shape_string(shape_));
    }
    return (*this)(i, j);
}

double Tensor::at(std::size_t i, std::size_t j, std::size_t k) const {
    if (rank() != 3 || i >= shape_[0] || j >= shape_[1] || k >= shape_[2]) {
        throw DimensionError("index out of range for shape " + shape_string(shape_));
    }
    return (*this)(i, j, k);
}

Tensor Tensor::slice(std::size_t index) const {
    if (rank() < 2 || index >= shape_[0]) {
        throw DimensionError("cannot slice index " + std::to_string(index) + " of " +
                             shape_string(shape_));
    }
    Shape inner(shape_.begin() + 1, shape_.end());
    const std::size_t stride = data_.size() / shape_[0];
    std::vector<double> part(data_.begin() + index * stride, data_.begin() + (index + 1) * stride);
    return Tensor(std::move(inner), std::move(part));
}

void Tensor::set_slice(std::size_t index, const Tensor& part) {
    if (rank() < 2 || index >= shape_[0] || part.shape() != Shape(shape_.begin() + 1, shape_.end())) {
        throw DimensionError("slice " + shape_string(part.shape()) + " does not fit " +
                             shape_string(shape_));
    }
    std::copy(part.data_.begin(), part.data_.end(), data_.begin() + index * part.size());
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor& Tensor::operator+=(const Tensor& other) {
    require_same_shape(*this, other, "tensor +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor& Tensor::operator*=(double scale) {
    for (auto& v : data_) v *= scale;
    return *this;
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* context) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(context) + ": shape " + shape_string(a.shape()) +
                             " vs " + shape_string(b.shape()));
    }
}

void require_rank(const Tensor& t, std::size_t rank, const char* context) {
    if (t.rank() != rank) {
        throw DimensionError(std::string(context) + ": expected rank " + std::to_string(rank) +
                             ", got shape " + shape_string(t.shape()));
    }
}

} // namespace trackcast::nn
