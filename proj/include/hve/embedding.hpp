#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hve/tensor.hpp"

namespace hve {

// A set of n dense d-dimensional embeddings, optionally with ids and
// class labels. Row-major storage.
struct EmbeddingSet {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> data;         // n * d
    std::vector<std::string> ids;     // empty or length n
    std::vector<std::string> labels;  // empty or length n

    EmbeddingSet() = default;
    EmbeddingSet(std::size_t n_, std::size_t d_) : n(n_), d(d_), data(n_ * d_, 0.0) {}

    std::span<const double> row(std::size_t i) const { return {data.data() + i * d, d}; }
    std::span<double> row(std::size_t i) { return {data.data() + i * d, d}; }

    Vec row_vec(std::size_t i) const {
        return Vec(data.begin() + static_cast<std::ptrdiff_t>(i * d),
                   data.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    }

    bool has_labels() const { return !labels.empty(); }
};

}  // namespace hve
