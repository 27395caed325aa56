#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

// Minimal dense linear algebra for the compressor and its trainer.
// All arithmetic is double precision; embeddings are stored as f32 on
// disk but promoted on load.

namespace hve {

using Vec = std::vector<double>;

struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Deterministic generator: mt19937_64 seeded directly with the 64-bit
// seed. The algorithm is pinned because tests and CLI runs rely on
// byte-identical streams for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on the open interval (0,1): (k + 0.5) / 2^53 with k the
    // top 53 bits of the next output. Never returns 0 or 1.
    double uniform01() {
        const std::uint64_t k = gen_() >> 11;
        return (static_cast<double>(k) + 0.5) * 0x1p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased index in [0, n).
    std::size_t index(std::size_t n);

    void shuffle(std::vector<std::size_t>& v);

private:
    std::mt19937_64 gen_;
};

Vec matvec(const Mat& m, const Vec& v);
Vec matvec_transposed(const Mat& m, const Vec& v);
Mat outer(const Vec& u, const Vec& v);

enum class ScalarMap { Tanh, Softplus, TanhDeriv, SoftplusDeriv };

double apply_map(ScalarMap f, double x);
Vec elementwise(const Vec& v, ScalarMap f);

// softplus(x) = ln(1+e^x), computed as max(x,0) + ln(1+e^-|x|).
double softplus(double x);
double softplus_deriv(double x);  // logistic sigmoid
double tanh_deriv(double x);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);        // Euclidean norm
double squared_norm(const Vec& v);

[[noreturn]] void throw_shape_error(const std::string& op, std::size_t a, std::size_t b);

}  // namespace hve
