#include "hve/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace hve {

void throw_shape_error(const std::string& op, std::size_t a, std::size_t b) {
    throw std::invalid_argument(op + ": dimension mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
}

std::size_t Rng::index(std::size_t n) {
    // rejection sampling keeps the distribution exact
    const std::uint64_t bound = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = gen_();
    } while (x >= bound);
    return static_cast<std::size_t>(x % n);
}

void Rng::shuffle(std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[index(i)]);
    }
}

Vec matvec(const Mat& m, const Vec& v) {
    if (m.cols != v.size()) throw_shape_error("matvec", m.cols, v.size());
    Vec out(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* row = m.data.data() + i * m.cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

Vec matvec_transposed(const Mat& m, const Vec& v) {
    if (m.rows != v.size()) throw_shape_error("matvec_transposed", m.rows, v.size());
    Vec out(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* row = m.data.data() + i * m.cols;
        const double vi = v[i];
        for (std::size_t j = 0; j < m.cols; ++j) out[j] += row[j] * vi;
    }
    return out;
}

Mat outer(const Vec& u, const Vec& v) {
    Mat out(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) out(i, j) = u[i] * v[j];
    return out;
}

double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double softplus_deriv(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double tanh_deriv(double x) {
    const double t = std::tanh(x);
    return 1.0 - t * t;
}

double apply_map(ScalarMap f, double x) {
    switch (f) {
        case ScalarMap::Tanh: return std::tanh(x);
        case ScalarMap::Softplus: return softplus(x);
        case ScalarMap::TanhDeriv: return tanh_deriv(x);
        case ScalarMap::SoftplusDeriv: return softplus_deriv(x);
    }
    throw std::logic_error("apply_map: unknown map");
}

Vec elementwise(const Vec& v, ScalarMap f) {
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = apply_map(f, v[i]);
    return out;
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw_shape_error("dot", a.size(), b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double squared_norm(const Vec& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

double norm2(const Vec& v) { return std::sqrt(squared_norm(v)); }

}  // namespace hve
