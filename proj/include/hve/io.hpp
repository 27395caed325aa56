#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hve/binary_index.hpp"
#include "hve/compressor.hpp"
#include "hve/embedding.hpp"
#include "hve/training.hpp"

// Little-endian binary file formats with magic + version, a text pair
// format, and PBM bitmap export. All formats round-trip bit-exactly.

namespace hve {

// "HVE1": u32 version, u32 n, u32 d, n*d f32 row-major, id/label block.
// The id/label block is a u8 flag (bit0 = ids, bit1 = labels) followed
// by n length-prefixed UTF-8 strings per present kind.
void save_embeddings(const std::string& path, const EmbeddingSet& E);
EmbeddingSet load_embeddings(const std::string& path);  // sniffs CSV fallback

// One embedding per line, comma or whitespace separated values,
// '#' comments allowed.
EmbeddingSet load_embeddings_csv(const std::string& path);

// "HVC1": u32 version, u32 n, u32 nbits, n records of ceil(nbits/64)
// u64 words (LSB-first bits), id/label block as above.
// nbits_when_empty declares the code width of an empty index.
void save_codes(const std::string& path, const CodeIndex& index,
                std::size_t nbits_when_empty = 0);
CodeIndex load_codes(const std::string& path);

struct TrainMeta {
    TrainConfig config;
    double final_loss = 0.0;      // last training-mode epoch loss
    double final_det_loss = 0.0;  // deterministic-mode mean loss on the training data
    StopReason stop_reason = StopReason::MaxEpochs;
    std::uint32_t epochs = 0;
};

// "HVM1": u32 version, u32 d, u32 b, f64 tau, then A, bias1, A2,
// bias2, C as f64, then the training metadata block.
void save_model(const std::string& path, const CompressorModel& m, const TrainMeta& meta);
std::pair<CompressorModel, TrainMeta> load_model(const std::string& path);

struct ScoredPair {
    std::string id_a;
    std::string id_b;
    double score = 0.0;
};

// Tab-separated id_a, id_b, score; '#' comment lines.
std::vector<ScoredPair> load_pairs(const std::string& path);
void save_pairs(const std::string& path, const std::vector<ScoredPair>& pairs);

// Plain PBM (P1): one row per code, one pixel per bit, bit 1 = black.
void export_pbm(const std::string& path, const std::vector<BinaryCode>& codes);

// Query codes given as hex of the packed bytes, byte 0 = bits 0..7.
BinaryCode parse_code_hex(const std::string& hex, std::size_t nbits);
std::string code_to_hex(const BinaryCode& code);

}  // namespace hve
