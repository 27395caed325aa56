#pragma once

#include <cstddef>
#include <utility>

#include "hve/binary_index.hpp"
#include "hve/tensor.hpp"

// The forward model: a two-layer encoder whose 2b logits are squashed
// pairwise by a temperature-scaled (optionally Gumbel-noised) softmax,
// thresholded into b bits, and decoded as a linear combination of
// codebook columns.

namespace hve {

struct CompressorModel {
    std::size_t d = 0;  // input dimension
    std::size_t b = 0;  // number of bits / bottleneck pairs
    static constexpr std::size_t pair_size = 2;

    Mat A;      // b x d
    Vec bias1;  // b
    Mat A2;     // 2b x b
    Vec bias2;  // 2b
    Mat C;      // d x 2b codebook
    double tau = 1.0;

    CompressorModel() = default;
    CompressorModel(std::size_t d_, std::size_t b_)
        : d(d_), b(b_), A(b_, d_), bias1(b_, 0.0), A2(2 * b_, b_), bias2(2 * b_, 0.0),
          C(d_, 2 * b_) {}
};

// Bottleneck activation: 2b values, pair k at positions (2k, 2k+1),
// each pair summing to 1.
struct SoftAssignments {
    Vec values;

    std::size_t pairs() const { return values.size() / 2; }
    double first_of(std::size_t k) const { return values[2 * k]; }
    double second_of(std::size_t k) const { return values[2 * k + 1]; }
};

// Everything the backward pass needs to replay one forward evaluation.
struct ForwardTrace {
    Vec input;
    Vec hidden_pre;  // A*e + bias1
    Vec hidden;      // tanh of the above
    Vec logits;      // softplus(A2*hidden + bias2), length 2b
    Vec noise;       // Gumbel noise used (all zero in deterministic mode)
    SoftAssignments assignments;
    Vec reconstruction;
};

// Returns (hidden, logits).
std::pair<Vec, Vec> encode_logits(const CompressorModel& m, const Vec& e);

// Standard Gumbel(0,1) samples: -ln(-ln(u)), u uniform in (0,1).
Vec sample_gumbel(Rng& rng, std::size_t count);

// Pairwise two-class softmax of (logits + noise) / tau, computed in
// the logistic form of the scaled logit difference.
SoftAssignments gumbel_softmax(const Vec& logits, double tau, const Vec& noise);

// Full forward pass. rng == nullptr means deterministic inference
// (noise fixed to zero).
ForwardTrace encode(const CompressorModel& m, const Vec& e, Rng* rng);

// bit k = 1 iff first component of pair k >= 0.5 (ties map to 1).
BinaryCode binarize(const SoftAssignments& z);

// e' = C * x for a 2b-dimensional bottleneck vector x.
Vec decode(const CompressorModel& m, const Vec& x);

// bit 1 -> pair (1,0), bit 0 -> pair (0,1).
Vec expand_code(const BinaryCode& c);

}  // namespace hve
