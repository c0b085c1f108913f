#pragma once

#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace trackcast::nn {

using Shape = std::vector<std::size_t>;

// Cache-line alignment keeps vectorised kernels on the same code path
// regardless of where the heap places a buffer, so results do not depend on
// which thread allocated them.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    AlignedAllocator() noexcept = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using Storage = std::vector<double, AlignedAllocator<double>>;

std::string shape_string(const Shape& shape);

// Dense row-major tensor of doubles, rank 1 to 3.
//
// Layout conventions used throughout the library:
//   rank 1  (n)                      vectors, biases
//   rank 2  (channels, positions)    one time slice of a spatial signal
//   rank 3  (time, channels, positions) or (out, in, width) for kernels
// The last axis is contiguous.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::initializer_list<double> data);
    Tensor(Shape shape, const std::vector<double>& data);
    Tensor(Shape shape, Storage data);
    Tensor(std::initializer_list<std::size_t> shape, double fill = 0.0)
        : Tensor(Shape(shape), fill) {}

    static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_, 0.0); }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    Storage& storage() { return data_; }
    const Storage& storage() const { return data_; }
    std::vector<double> to_vector() const { return {data_.begin(), data_.end()}; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // Unchecked multi-index access; rank must match the number of indices.
    double& operator()(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    // Bounds-checked access, throws DimensionError.
    double at(std::size_t i, std::size_t j) const;
    double at(std::size_t i, std::size_t j, std::size_t k) const;

    // Copy of one leading-axis slice: (T, C, L) -> (C, L), (C, L) -> (L).
    Tensor slice(std::size_t index) const;
    // Overwrite one leading-axis slice with `part`.
    void set_slice(std::size_t index, const Tensor& part);

    void fill(double value);
    Tensor& operator+=(const Tensor& other);
    Tensor& operator*=(double scale);

    bool all_finite() const;

private:
    Shape shape_;
    Storage data_;
};

// Throws DimensionError with `context` in the message unless shapes match.
void require_same_shape(const Tensor& a, const Tensor& b, const char* context);
void require_rank(const Tensor& t, std::size_t rank, const char* context);

} // namespace trackcast::nn
