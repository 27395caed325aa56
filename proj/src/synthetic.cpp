#include "hve/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hve {

double sample_normal(Rng& rng) {
    const double u1 = rng.uniform01();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

PlantedData gen_planted(std::size_t d, std::size_t b, std::size_t n, std::uint64_t seed) {
    if (d == 0 || b == 0 || n == 0) throw std::invalid_argument("gen_planted: positive sizes required");
    Rng rng(seed);

    PlantedData out;
    out.true_codebook = Mat(d, 2 * b);
    for (double& v : out.true_codebook.data) v = sample_normal(rng) / static_cast<double>(b);

    CompressorModel ghost(d, b);  // carries the codebook for decode()
    ghost.C = out.true_codebook;

    out.embeddings = EmbeddingSet(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        BinaryCode code(b);
        for (std::size_t k = 0; k < b; ++k)
            if (rng.uniform01() < 0.5) code.set(k, true);
        const Vec e = decode(ghost, expand_code(code));
        // stored at f32 precision, matching the on-disk format
        for (std::size_t j = 0; j < d; ++j)
            out.embeddings.row(i)[j] = static_cast<double>(static_cast<float>(e[j]));
        out.true_codes.codes.push_back(std::move(code));
    }
    return out;
}

CodeIndex gen_clusters(std::size_t nbits, std::size_t n, std::size_t nclusters,
                       double flip_prob, std::uint64_t seed) {
    if (nbits == 0 || n == 0 || nclusters == 0)
        throw std::invalid_argument("gen_clusters: positive sizes required");
    Rng rng(seed);

    // centers: each differs from the all-zero base in a random half of
    // the bits, sampled independently per cluster
    std::vector<BinaryCode> centers;
    for (std::size_t c = 0; c < nclusters; ++c) {
        BinaryCode center(nbits);
        std::vector<std::size_t> positions(nbits);
        for (std::size_t k = 0; k < nbits; ++k) positions[k] = k;
        rng.shuffle(positions);
        if (c > 0)
            for (std::size_t k = 0; k < nbits / 2; ++k) center.set(positions[k], true);
        centers.push_back(std::move(center));
    }

    CodeIndex index;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % nclusters;
        BinaryCode code = centers[c];
        for (std::size_t k = 0; k < nbits; ++k)
            if (rng.uniform01() < flip_prob) code.set(k, !code.get(k));
        index.push(std::move(code), "doc" + std::to_string(i), "class" + std::to_string(c));
    }
    return index;
}

EmbeddingSet gen_factors(std::size_t nfactors, std::size_t d, std::size_t n, double noise,
                         std::uint64_t seed) {
    if (nfactors == 0 || d < nfactors || n == 0)
        throw std::invalid_argument("gen_factors: need 0 < nfactors <= d and n > 0");
    Rng rng(seed);

    EmbeddingSet E(n, d);
    std::vector<double> factors(nfactors);
    for (std::size_t i = 0; i < n; ++i) {
        for (double& f : factors) f = sample_normal(rng);
        auto row = E.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            const double v = factors[j % nfactors] + noise * sample_normal(rng);
            row[j] = static_cast<double>(static_cast<float>(v));
        }
    }
    return E;
}

}  // namespace hve
