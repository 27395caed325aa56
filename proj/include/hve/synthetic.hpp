#pragma once

#include <cstdint>

#include "hve/binary_index.hpp"
#include "hve/compressor.hpp"
#include "hve/embedding.hpp"

// Seeded synthetic fixture generators used by tests and the
// gen-synthetic CLI command.

namespace hve {

struct PlantedData {
    EmbeddingSet embeddings;
    Mat true_codebook;  // d x 2b
    CodeIndex true_codes;
};

// Embeddings built as C_true * expand(random b-bit codes): exactly
// representable by a codebook, so recovery quality is measurable.
PlantedData gen_planted(std::size_t d, std::size_t b, std::size_t n, std::uint64_t seed);

// Labeled codes drawn around cluster centers that differ in half the
// bits, with independent per-bit flip noise.
CodeIndex gen_clusters(std::size_t nbits, std::size_t n, std::size_t nclusters,
                       double flip_prob, std::uint64_t seed);

// nfactors independent standard-normal factors duplicated to d
// dimensions plus additive noise: a heavily redundant embedding set.
EmbeddingSet gen_factors(std::size_t nfactors, std::size_t d, std::size_t n, double noise,
                         std::uint64_t seed);

// Box-Muller normal sample from the shared Rng stream.
double sample_normal(Rng& rng);

}  // namespace hve
