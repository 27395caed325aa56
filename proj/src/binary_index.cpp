#include "hve/binary_index.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "hve/tensor.hpp"

namespace hve {

BinaryCode pack_bits(const std::vector<bool>& bits) {
    BinaryCode code(bits.size());
    for (std::size_t k = 0; k < bits.size(); ++k)
        if (bits[k]) code.set(k, true);
    return code;
}

std::vector<bool> unpack_bits(const BinaryCode& code) {
    std::vector<bool> bits(code.nbits);
    for (std::size_t k = 0; k < code.nbits; ++k) bits[k] = code.get(k);
    return bits;
}

std::size_t hamming(const BinaryCode& a, const BinaryCode& b) {
    if (a.nbits != b.nbits) throw_shape_error("hamming", a.nbits, b.nbits);
    std::size_t count = 0;
    for (std::size_t w = 0; w < a.words.size(); ++w)
        count += static_cast<std::size_t>(std::popcount(a.words[w] ^ b.words[w]));
    return count;
}

void CodeIndex::push(BinaryCode code, std::string id, std::string label) {
    if (!codes.empty() && code.nbits != nbits())
        throw_shape_error("CodeIndex::push", code.nbits, nbits());
    codes.push_back(std::move(code));
    if (!id.empty() || !ids.empty()) {
        if (ids.size() + 1 != codes.size())
            throw std::invalid_argument("CodeIndex::push: inconsistent id usage");
        ids.push_back(std::move(id));
    }
    if (!label.empty() || !labels.empty()) {
        if (labels.size() + 1 != codes.size())
            throw std::invalid_argument("CodeIndex::push: inconsistent label usage");
        labels.push_back(std::move(label));
    }
}

std::vector<Neighbor> knn_search(const CodeIndex& index, const BinaryCode& query,
                                 std::size_t k) {
    if (k < 1) throw std::invalid_argument("knn_search: k must be >= 1");
    if (index.size() == 0) return {};
    if (query.nbits != index.nbits())
        throw_shape_error("knn_search", query.nbits, index.nbits());

    std::vector<Neighbor> all;
    all.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i)
        all.push_back({i, hamming(index.codes[i], query), 0});

    const std::size_t take = std::min(k, all.size());
    // stable sort keeps insertion order among equal distances
    std::stable_sort(all.begin(), all.end(),
                     [](const Neighbor& a, const Neighbor& b) { return a.distance < b.distance; });
    all.resize(take);
    for (std::size_t r = 0; r < take; ++r) all[r].rank = r + 1;
    return all;
}

MemoryReport memory_report(std::uint64_t n, std::uint64_t d, std::uint64_t b) {
    if (n == 0 || d == 0 || b == 0)
        throw std::invalid_argument("memory_report: arguments must be positive");
    MemoryReport r;
    r.n = n;
    r.original_bytes = n * d * 4;
    r.compressed_bytes = n * ((b + 7) / 8);
    r.ratio = static_cast<double>(r.original_bytes) / static_cast<double>(r.compressed_bytes);
    return r;
}

}  // namespace hve
