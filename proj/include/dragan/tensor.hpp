#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "dragan/errors.hpp"

namespace dragan {

// Dense row-major tensor. Rank is 1 or 2 everywhere in this project;
// sequences of embeddings are [rows, cols], scalars are [1,1].
template <typename Real>
struct Tensor {
    std::vector<int> shape;
    std::vector<Real> data;

    Tensor() = default;

    explicit Tensor(std::vector<int> shp, Real fill = Real(0)) : shape(std::move(shp)) {
        data.assign(static_cast<std::size_t>(numel_of(shape)), fill);
    }

    Tensor(std::vector<int> shp, std::vector<Real> values) : shape(std::move(shp)), data(std::move(values)) {
        if (numel_of(shape) != static_cast<long long>(data.size()))
            throw ContractError("tensor: shape/data size mismatch");
    }

    static long long numel_of(const std::vector<int>& s) {
        long long n = 1;
        for (int d : s) n *= d;
        return n;
    }

    long long numel() const { return static_cast<long long>(data.size()); }

    int rows() const { return shape.empty() ? 1 : shape[0]; }
    int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    Real& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols() + c]; }
    Real at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols() + c]; }

    Real& operator[](std::size_t i) { return data[i]; }
    Real operator[](std::size_t i) const { return data[i]; }

    Real* row_ptr(int r) { return data.data() + static_cast<std::size_t>(r) * cols(); }
    const Real* row_ptr(int r) const { return data.data() + static_cast<std::size_t>(r) * cols(); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (Real v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    void zero() { std::fill(data.begin(), data.end(), Real(0)); }
};

template <typename Real>
inline Tensor<Real> scalar_tensor(Real v) {
    return Tensor<Real>({1, 1}, std::vector<Real>{v});
}

template <typename Real>
inline std::string shape_str(const Tensor<Real>& t) {
    std::string s = "[";
    for (std::size_t i = 0; i < t.shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(t.shape[i]);
    }
    return s + "]";
}

template <typename Real>
inline void require_finite(const Tensor<Real>& t, const char* where) {
    if (!t.all_finite()) throw NumericError(std::string(where) + ": non-finite value");
}

}  // namespace dragan
