#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "neta/error.hpp"

namespace neta {

// Dense row-major tensor. Rank 1 and 2 are all the model needs.
template <typename Real>
struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<Real> data;

    static Tensor vec(std::int64_t n) {
        Tensor t;
        t.shape = {n};
        t.data.assign(static_cast<size_t>(n), Real(0));
        return t;
    }

    static Tensor mat(std::int64_t rows, std::int64_t cols) {
        Tensor t;
        t.shape = {rows, cols};
        t.data.assign(static_cast<size_t>(rows * cols), Real(0));
        return t;
    }

    static Tensor scalar(Real v) {
        Tensor t;
        t.shape = {1};
        t.data = {v};
        return t;
    }

    std::int64_t numel() const {
        std::int64_t n = 1;
        for (auto d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

    std::int64_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::int64_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
    bool is_vector() const { return shape.size() == 1; }
    bool is_matrix() const { return shape.size() == 2; }

    Real& at(std::int64_t i) { return data[static_cast<size_t>(i)]; }
    Real at(std::int64_t i) const { return data[static_cast<size_t>(i)]; }
    Real& at(std::int64_t r, std::int64_t c) { return data[static_cast<size_t>(r * cols() + c)]; }
    Real at(std::int64_t r, std::int64_t c) const { return data[static_cast<size_t>(r * cols() + c)]; }

    const Real* row_ptr(std::int64_t r) const { return data.data() + r * cols(); }
    Real* row_ptr(std::int64_t r) { return data.data() + r * cols(); }

    void fill(Real v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }

    bool all_finite() const {
        for (Real v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

template <typename Real>
void check_shape(bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("shape mismatch in ") + what);
}

}  // namespace neta
