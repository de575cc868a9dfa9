#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

// Small dense containers for the handful of low-dimensional objects this
// library moves around: ambient points, chart Jacobians, metric blocks and
// their derivative stacks. Dimensions are tiny (1-3 per chart in practice),
// so everything is a flat std::vector<double> with inline indexing and no
// expression templates. resize() keeps capacity, which is what the solver's
// per-step workspace relies on to stay allocation-free.

namespace mindist {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Row-major rows x cols matrix.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    // No-op when the shape already matches, so per-step workspaces can
    // call this unconditionally without churn. Otherwise zero-fills.
    void resize(std::size_t rows, std::size_t cols) {
        if (rows == rows_ && cols == cols_) return;
        rows_ = rows;
        cols_ = cols;
        data_.assign(rows * cols, 0.0);
    }

    void zero() { std::fill(data_.begin(), data_.end(), 0.0); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool operator==(const Mat&) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// Rank-3 block, shape d0 x d1 x d2, row-major.
class Ten3 {
public:
    Ten3() = default;
    Ten3(std::size_t d0, std::size_t d1, std::size_t d2)
        : d0_(d0), d1_(d1), d2_(d2), data_(d0 * d1 * d2, 0.0) {}

    void resize(std::size_t d0, std::size_t d1, std::size_t d2) {
        if (d0 == d0_ && d1 == d1_ && d2 == d2_) return;
        d0_ = d0;
        d1_ = d1;
        d2_ = d2;
        data_.assign(d0 * d1 * d2, 0.0);
    }

    void zero() { std::fill(data_.begin(), data_.end(), 0.0); }

    // Contiguous innermost slice (i, j, ·).
    std::span<double> slice(std::size_t i, std::size_t j) {
        return {data_.data() + (i * d1_ + j) * d2_, d2_};
    }
    std::span<const double> slice(std::size_t i, std::size_t j) const {
        return {data_.data() + (i * d1_ + j) * d2_, d2_};
    }

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * d1_ + j) * d2_ + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * d1_ + j) * d2_ + k];
    }

    std::size_t dim0() const { return d0_; }
    std::size_t dim1() const { return d1_; }
    std::size_t dim2() const { return d2_; }

    bool operator==(const Ten3&) const = default;

private:
    std::size_t d0_ = 0, d1_ = 0, d2_ = 0;
    std::vector<double> data_;
};

// y = A x  (sizes must already agree).
inline void matvec(const Mat& a, std::span<const double> x, std::span<double> y) {
    assert(a.cols() == x.size() && a.rows() == y.size());
    for (std::size_t r = 0; r < a.rows(); ++r) y[r] = dot(a.row(r), x);
}

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace mindist
