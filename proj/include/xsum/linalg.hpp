#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

#include "xsum/kernels.hpp"

namespace xsum {

// Non-owning row-major matrix view.
template <class T>
struct MatrixView {
    T* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<T> row(std::size_t r) const { return {data + r * cols, cols}; }
    std::size_t size() const { return rows * cols; }
    // Rows [first, first + count).
    MatrixView block_rows(std::size_t first, std::size_t count) const {
        assert(first + count <= rows);
        return {data + first * cols, count, cols};
    }
    operator MatrixView<const T>() const { return {data, rows, cols}; }
};

using MatView = MatrixView<double>;
using ConstMatView = MatrixView<const double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    MatView view() { return {data_.data(), rows_, cols_}; }
    ConstMatView view() const { return {data_.data(), rows_, cols_}; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

namespace la {

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return kernels::active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    kernels::active().axpy(alpha, x.data(), y.data(), x.size());
}

// y += A x
inline void gemv(ConstMatView a, std::span<const double> x, std::span<double> y) {
    assert(a.cols == x.size() && a.rows == y.size());
    kernels::active().gemv(a.data, a.rows, a.cols, x.data(), y.data());
}

// y += A^T x
inline void gemv_t(ConstMatView a, std::span<const double> x, std::span<double> y) {
    assert(a.rows == x.size() && a.cols == y.size());
    kernels::active().gemv_t(a.data, a.rows, a.cols, x.data(), y.data());
}

// A += alpha x y^T
inline void ger(MatView a, double alpha, std::span<const double> x, std::span<const double> y) {
    assert(a.rows == x.size() && a.cols == y.size());
    kernels::active().ger(a.data, a.rows, a.cols, alpha, x.data(), y.data());
}

}  // namespace la

}  // namespace xsum
