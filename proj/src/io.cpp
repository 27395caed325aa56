#include "hve/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hve {

namespace {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

[[noreturn]] void file_error(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

class Writer {
public:
    explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) file_error(path, "cannot open for writing");
    }
    void bytes(const void* p, std::size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        if (!out_) file_error(path_, "write failed");
    }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void f32(float v) { bytes(&v, 4); }
    void f64(double v) { bytes(&v, 8); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }

private:
    std::string path_;
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) file_error(path, "cannot open for reading");
    }
    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) file_error(path_, "truncated file");
    }
    std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
    std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
    float f32() { float v; bytes(&v, 4); return v; }
    double f64() { double v; bytes(&v, 8); return v; }
    std::string str() {
        const std::uint32_t len = u32();
        std::string s(len, '\0');
        if (len) bytes(s.data(), len);
        return s;
    }
    void expect_magic(const char magic[4]) {
        char got[4];
        bytes(got, 4);
        if (std::memcmp(got, magic, 4) != 0) file_error(path_, "bad magic (unrecognized format)");
    }
    void expect_version(std::uint32_t want) {
        const std::uint32_t got = u32();
        if (got != want)
            file_error(path_, "unsupported version " + std::to_string(got));
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ifstream in_;
};

void write_name_block(Writer& w, const std::vector<std::string>& ids,
                      const std::vector<std::string>& labels) {
    std::uint8_t flag = 0;
    if (!ids.empty()) flag |= 1;
    if (!labels.empty()) flag |= 2;
    w.u8(flag);
    for (const auto& s : ids) w.str(s);
    for (const auto& s : labels) w.str(s);
}

void read_name_block(Reader& r, std::size_t n, std::vector<std::string>& ids,
                     std::vector<std::string>& labels) {
    const std::uint8_t flag = r.u8();
    if (flag & 1) {
        ids.resize(n);
        for (auto& s : ids) s = r.str();
    }
    if (flag & 2) {
        labels.resize(n);
        for (auto& s : labels) s = r.str();
    }
}

}  // namespace

void save_embeddings(const std::string& path, const EmbeddingSet& E) {
    Writer w(path);
    w.bytes("HVE1", 4);
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(E.n));
    w.u32(static_cast<std::uint32_t>(E.d));
    for (double v : E.data) w.f32(static_cast<float>(v));
    write_name_block(w, E.ids, E.labels);
}

EmbeddingSet load_embeddings(const std::string& path) {
    {
        std::ifstream probe(path, std::ios::binary);
        if (!probe) file_error(path, "cannot open for reading");
        char magic[4] = {};
        probe.read(magic, 4);
        if (std::memcmp(magic, "HVE1", 4) != 0) return load_embeddings_csv(path);
    }
    Reader r(path);
    r.expect_magic("HVE1");
    r.expect_version(1);
    const std::uint32_t n = r.u32();
    const std::uint32_t d = r.u32();
    if (n > 0 && d == 0) file_error(path, "zero dimension with nonzero count");
    EmbeddingSet E(n, d);
    for (double& v : E.data) v = static_cast<double>(r.f32());
    read_name_block(r, n, E.ids, E.labels);
    return E;
}

EmbeddingSet load_embeddings_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) file_error(path, "cannot open for reading");
    EmbeddingSet E;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t') c = ' ';
        std::istringstream ss(line);
        std::vector<double> row;
        double v;
        while (ss >> v) row.push_back(v);
        if (row.empty()) continue;
        if (!ss.eof()) file_error(path, "line " + std::to_string(lineno) + ": not numeric");
        if (E.n == 0) E.d = row.size();
        if (row.size() != E.d)
            file_error(path, "line " + std::to_string(lineno) + ": inconsistent dimension");
        // match the binary format's f32 storage precision
        for (double x : row) E.data.push_back(static_cast<double>(static_cast<float>(x)));
        ++E.n;
    }
    if (E.n == 0) file_error(path, "no embeddings found");
    return E;
}

void save_codes(const std::string& path, const CodeIndex& index,
                std::size_t nbits_when_empty) {
    Writer w(path);
    w.bytes("HVC1", 4);
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(index.size()));
    w.u32(static_cast<std::uint32_t>(index.size() ? index.nbits() : nbits_when_empty));
    for (const BinaryCode& c : index.codes)
        for (std::uint64_t word : c.words) w.u64(word);
    write_name_block(w, index.ids, index.labels);
}

CodeIndex load_codes(const std::string& path) {
    Reader r(path);
    r.expect_magic("HVC1");
    r.expect_version(1);
    const std::uint32_t n = r.u32();
    const std::uint32_t nbits = r.u32();
    const std::size_t words = (nbits + 63) / 64;
    CodeIndex index;
    index.declared_nbits = nbits;
    index.codes.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        BinaryCode c(nbits);
        for (std::size_t w = 0; w < words; ++w) c.words[w] = r.u64();
        if (nbits % 64 != 0) {
            const std::uint64_t mask = (std::uint64_t{1} << (nbits % 64)) - 1;
            if (words > 0 && (c.words.back() & ~mask) != 0)
                file_error(path, "nonzero padding bits in record " + std::to_string(i));
        }
        index.codes.push_back(std::move(c));
    }
    read_name_block(r, n, index.ids, index.labels);
    return index;
}

void save_model(const std::string& path, const CompressorModel& m, const TrainMeta& meta) {
    Writer w(path);
    w.bytes("HVM1", 4);
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(m.d));
    w.u32(static_cast<std::uint32_t>(m.b));
    w.f64(m.tau);
    for (double v : m.A.data) w.f64(v);
    for (double v : m.bias1) w.f64(v);
    for (double v : m.A2.data) w.f64(v);
    for (double v : m.bias2) w.f64(v);
    for (double v : m.C.data) w.f64(v);

    const TrainConfig& c = meta.config;
    w.f64(c.learning_rate);
    w.u32(static_cast<std::uint32_t>(c.batch_size));
    w.u32(static_cast<std::uint32_t>(c.max_epochs));
    w.u32(static_cast<std::uint32_t>(c.patience_window));
    w.f64(c.delta_tolerance);
    w.f64(c.tau);
    w.u8(c.tau_final ? 1 : 0);
    w.f64(c.tau_final.value_or(0.0));
    w.u64(c.seed);
    w.f64(meta.final_loss);
    w.f64(meta.final_det_loss);
    w.u32(meta.stop_reason == StopReason::Converged ? 0u : 1u);
    w.u32(meta.epochs);
}

std::pair<CompressorModel, TrainMeta> load_model(const std::string& path) {
    Reader r(path);
    r.expect_magic("HVM1");
    r.expect_version(1);
    const std::uint32_t d = r.u32();
    const std::uint32_t b = r.u32();
    if (d == 0 || b == 0) file_error(path, "degenerate model dimensions");
    CompressorModel m(d, b);
    m.tau = r.f64();
    if (!(m.tau > 0.0)) file_error(path, "non-positive temperature");
    for (double& v : m.A.data) v = r.f64();
    for (double& v : m.bias1) v = r.f64();
    for (double& v : m.A2.data) v = r.f64();
    for (double& v : m.bias2) v = r.f64();
    for (double& v : m.C.data) v = r.f64();

    TrainMeta meta;
    meta.config.learning_rate = r.f64();
    meta.config.batch_size = r.u32();
    meta.config.max_epochs = r.u32();
    meta.config.patience_window = r.u32();
    meta.config.delta_tolerance = r.f64();
    meta.config.tau = r.f64();
    const bool has_final = r.u8() != 0;
    const double tau_final = r.f64();
    if (has_final) meta.config.tau_final = tau_final;
    meta.config.seed = r.u64();
    meta.final_loss = r.f64();
    meta.final_det_loss = r.f64();
    meta.stop_reason = r.u32() == 0 ? StopReason::Converged : StopReason::MaxEpochs;
    meta.epochs = r.u32();
    return {std::move(m), std::move(meta)};
}

std::vector<ScoredPair> load_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) file_error(path, "cannot open for reading");
    std::vector<ScoredPair> pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        ScoredPair p;
        std::string score_str;
        if (!std::getline(ss, p.id_a, '\t') || !std::getline(ss, p.id_b, '\t') ||
            !std::getline(ss, score_str))
            file_error(path, "line " + std::to_string(lineno) + ": expected id_a<TAB>id_b<TAB>score");
        try {
            p.score = std::stod(score_str);
        } catch (const std::exception&) {
            file_error(path, "line " + std::to_string(lineno) + ": bad score");
        }
        if (!std::isfinite(p.score))
            file_error(path, "line " + std::to_string(lineno) + ": non-finite score");
        pairs.push_back(std::move(p));
    }
    return pairs;
}

void save_pairs(const std::string& path, const std::vector<ScoredPair>& pairs) {
    std::ofstream out(path);
    if (!out) file_error(path, "cannot open for writing");
    for (const auto& p : pairs) out << p.id_a << '\t' << p.id_b << '\t' << p.score << '\n';
}

void export_pbm(const std::string& path, const std::vector<BinaryCode>& codes) {
    std::ofstream out(path);
    if (!out) file_error(path, "cannot open for writing");
    const std::size_t width = codes.empty() ? 0 : codes.front().nbits;
    out << "P1\n" << width << ' ' << codes.size() << '\n';
    for (const BinaryCode& c : codes) {
        for (std::size_t k = 0; k < c.nbits; ++k) {
            if (k) out << ' ';
            out << (c.get(k) ? '1' : '0');
        }
        out << '\n';
    }
    if (!out) file_error(path, "write failed");
}

BinaryCode parse_code_hex(const std::string& hex, std::size_t nbits) {
    const std::size_t nbytes = (nbits + 7) / 8;
    if (hex.size() != 2 * nbytes)
        throw std::invalid_argument("parse_code_hex: expected " + std::to_string(2 * nbytes) +
                                    " hex digits for " + std::to_string(nbits) + " bits");
    auto nibble = [](char c) -> std::uint64_t {
        if (c >= '0' && c <= '9') return static_cast<std::uint64_t>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<std::uint64_t>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<std::uint64_t>(c - 'A' + 10);
        throw std::invalid_argument("parse_code_hex: invalid hex digit");
    };
    BinaryCode code(nbits);
    for (std::size_t byte = 0; byte < nbytes; ++byte) {
        const std::uint64_t v = nibble(hex[2 * byte]) * 16 + nibble(hex[2 * byte + 1]);
        code.words[byte / 8] |= v << (8 * (byte % 8));
    }
    if (nbits % 64 != 0) {
        const std::uint64_t mask = (std::uint64_t{1} << (nbits % 64)) - 1;
        if ((code.words.back() & ~mask) != 0)
            throw std::invalid_argument("parse_code_hex: bits set beyond code width");
    }
    return code;
}

std::string code_to_hex(const BinaryCode& code) {
    static const char* digits = "0123456789abcdef";
    const std::size_t nbytes = (code.nbits + 7) / 8;
    std::string hex(2 * nbytes, '0');
    for (std::size_t byte = 0; byte < nbytes; ++byte) {
        const std::uint64_t v = (code.words[byte / 8] >> (8 * (byte % 8))) & 0xff;
        hex[2 * byte] = digits[v >> 4];
        hex[2 * byte + 1] = digits[v & 0xf];
    }
    return hex;
}

}  // namespace hve
