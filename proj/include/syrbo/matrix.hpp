#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace syrbo {

// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }

    // New matrix holding the given rows, in order.
    Matrix select_rows(std::span<const std::size_t> indices) const {
        Matrix out(indices.size(), cols);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (indices[i] >= rows) throw std::out_of_range("row index out of range");
            auto src = row(indices[i]);
            std::copy(src.begin(), src.end(), out.row(i).begin());
        }
        return out;
    }
};

inline std::vector<double> select(const std::vector<double>& v,
                                  std::span<const std::size_t> indices) {
    std::vector<double> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= v.size()) throw std::out_of_range("index out of range");
        out.push_back(v[i]);
    }
    return out;
}

}  // namespace syrbo
