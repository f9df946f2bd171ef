#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tarseg/errors.hpp"

namespace tarseg {

// Dense row-major n-dimensional array. float is the working precision;
// the double instantiation exists for gradient-check paths. Tensors are
// treated as immutable once built: ops return new tensors, so sharing
// them read-only across worker threads is safe.
template <typename T>
class TensorT {
public:
    TensorT() = default;

    explicit TensorT(std::vector<int> shape) : shape_(std::move(shape)) {
        data_.assign(checked_size(shape_), T(0));
    }

    TensorT(std::vector<int> shape, std::vector<T> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (checked_size(shape_) != data_.size())
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape product " +
                             std::to_string(checked_size(shape_)));
    }

    static TensorT full(std::vector<int> shape, T value) {
        TensorT t(std::move(shape));
        for (auto& v : t.data_) v = value;
        return t;
    }

    int rank() const { return static_cast<int>(shape_.size()); }
    const std::vector<int>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    // Axis must be in [0, rank); negative indices are rejected.
    int dim(int axis) const {
        if (axis < 0 || axis >= rank())
            throw ShapeError("axis " + std::to_string(axis) + " out of range for rank " +
                             std::to_string(rank()) + " tensor");
        return shape_[static_cast<std::size_t>(axis)];
    }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& vec() { return data_; }
    const std::vector<T>& vec() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    // Unchecked multi-index access; shape discipline lives in the ops.
    T& operator()(int i) { return data_[static_cast<std::size_t>(i)]; }
    const T& operator()(int i) const { return data_[static_cast<std::size_t>(i)]; }

    T& operator()(int i, int j) {
        return data_[static_cast<std::size_t>(i) * shape_[1] + j];
    }
    const T& operator()(int i, int j) const {
        return data_[static_cast<std::size_t>(i) * shape_[1] + j];
    }

    T& operator()(int i, int j, int k) {
        return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k];
    }
    const T& operator()(int i, int j, int k) const {
        return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k];
    }

    T& operator()(int i, int j, int k, int l) {
        return data_[((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) *
                         shape_[3] +
                     l];
    }
    const T& operator()(int i, int j, int k, int l) const {
        return data_[((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) *
                         shape_[3] +
                     l];
    }

    bool same_shape(const TensorT& other) const { return shape_ == other.shape_; }

    static std::string shape_str(const std::vector<int>& s) {
        std::string out = "[";
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(s[i]);
        }
        return out + "]";
    }
    std::string shape_str() const { return shape_str(shape_); }

private:
    static std::size_t checked_size(const std::vector<int>& shape) {
        std::size_t n = 1;
        for (int d : shape) {
            if (d < 1) throw ShapeError("tensor dimensions must be >= 1, got " + shape_str(shape));
            n *= static_cast<std::size_t>(d);
        }
        return shape.empty() ? 0 : n;
    }

    std::vector<int> shape_;
    std::vector<T> data_;
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

}  // namespace tarseg
