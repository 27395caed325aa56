#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

// Bit-packed code storage, Hamming distance via popcount, brute-force
// top-k retrieval, and memory-footprint arithmetic.

namespace hve {

// Bits are addressed LSB-first within little-endian 64-bit words:
// bit k lives at words[k/64] >> (k%64). Padding bits above nbits are
// always zero (canonical form, required by hamming and serialization).
struct BinaryCode {
    std::vector<std::uint64_t> words;
    std::size_t nbits = 0;

    BinaryCode() = default;
    explicit BinaryCode(std::size_t n) : words((n + 63) / 64, 0), nbits(n) {}

    bool get(std::size_t k) const { return (words[k / 64] >> (k % 64)) & 1u; }
    void set(std::size_t k, bool v) {
        const std::uint64_t mask = std::uint64_t{1} << (k % 64);
        if (v)
            words[k / 64] |= mask;
        else
            words[k / 64] &= ~mask;
    }

    bool operator==(const BinaryCode& o) const = default;
};

BinaryCode pack_bits(const std::vector<bool>& bits);
std::vector<bool> unpack_bits(const BinaryCode& code);

std::size_t hamming(const BinaryCode& a, const BinaryCode& b);

struct CodeIndex {
    std::vector<BinaryCode> codes;
    std::vector<std::string> ids;     // empty means "use positional ids"
    std::vector<std::string> labels;  // empty means unlabeled
    std::size_t declared_nbits = 0;   // code width when the index is empty

    std::size_t size() const { return codes.size(); }
    std::size_t nbits() const { return codes.empty() ? declared_nbits : codes.front().nbits; }
    bool has_labels() const { return !labels.empty(); }

    void push(BinaryCode code, std::string id = {}, std::string label = {});
};

struct Neighbor {
    std::size_t pos;       // position in the index
    std::size_t distance;  // Hamming distance
    std::size_t rank;      // 1-based
};

// Brute-force scan; ties broken by insertion position (stable).
std::vector<Neighbor> knn_search(const CodeIndex& index, const BinaryCode& query,
                                 std::size_t k);

struct MemoryReport {
    std::uint64_t n = 0;
    std::uint64_t original_bytes = 0;    // n * d * 4
    std::uint64_t compressed_bytes = 0;  // n * ceil(b/8)
    double ratio = 0.0;
};

MemoryReport memory_report(std::uint64_t n, std::uint64_t d, std::uint64_t b);

}  // namespace hve
