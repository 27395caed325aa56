#include "hve/compressor.hpp"

#include <cmath>
#include <stdexcept>

namespace hve {

std::pair<Vec, Vec> encode_logits(const CompressorModel& m, const Vec& e) {
    if (e.size() != m.d) throw_shape_error("encode_logits", e.size(), m.d);
    Vec hidden_pre = matvec(m.A, e);
    for (std::size_t i = 0; i < hidden_pre.size(); ++i) hidden_pre[i] += m.bias1[i];
    Vec hidden = elementwise(hidden_pre, ScalarMap::Tanh);
    Vec logits_pre = matvec(m.A2, hidden);
    for (std::size_t i = 0; i < logits_pre.size(); ++i) logits_pre[i] += m.bias2[i];
    return {std::move(hidden), elementwise(logits_pre, ScalarMap::Softplus)};
}

Vec sample_gumbel(Rng& rng, std::size_t count) {
    if (count < 1) throw std::invalid_argument("sample_gumbel: count must be >= 1");
    Vec g(count);
    for (std::size_t i = 0; i < count; ++i) g[i] = -std::log(-std::log(rng.uniform01()));
    return g;
}

SoftAssignments gumbel_softmax(const Vec& logits, double tau, const Vec& noise) {
    if (tau <= 0.0) throw std::invalid_argument("gumbel_softmax: tau must be positive");
    if (logits.size() != noise.size())
        throw_shape_error("gumbel_softmax", logits.size(), noise.size());
    if (logits.size() % 2 != 0)
        throw std::invalid_argument("gumbel_softmax: logit count must be even");

    SoftAssignments z;
    z.values.resize(logits.size());
    for (std::size_t k = 0; k < logits.size() / 2; ++k) {
        const double diff =
            (logits[2 * k] + noise[2 * k] - logits[2 * k + 1] - noise[2 * k + 1]) / tau;
        // two-class softmax == logistic of the scaled difference
        const double z1 = 1.0 / (1.0 + std::exp(-diff));
        z.values[2 * k] = z1;
        z.values[2 * k + 1] = 1.0 - z1;
    }
    return z;
}

ForwardTrace encode(const CompressorModel& m, const Vec& e, Rng* rng) {
    ForwardTrace t;
    t.input = e;

    if (e.size() != m.d) throw_shape_error("encode", e.size(), m.d);
    t.hidden_pre = matvec(m.A, e);
    for (std::size_t i = 0; i < t.hidden_pre.size(); ++i) t.hidden_pre[i] += m.bias1[i];
    t.hidden = elementwise(t.hidden_pre, ScalarMap::Tanh);

    Vec logits_pre = matvec(m.A2, t.hidden);
    for (std::size_t i = 0; i < logits_pre.size(); ++i) logits_pre[i] += m.bias2[i];
    t.logits = elementwise(logits_pre, ScalarMap::Softplus);

    t.noise = rng ? sample_gumbel(*rng, 2 * m.b) : Vec(2 * m.b, 0.0);
    t.assignments = gumbel_softmax(t.logits, m.tau, t.noise);
    t.reconstruction = decode(m, t.assignments.values);
    return t;
}

BinaryCode binarize(const SoftAssignments& z) {
    BinaryCode code(z.pairs());
    for (std::size_t k = 0; k < z.pairs(); ++k)
        if (z.first_of(k) >= 0.5) code.set(k, true);
    return code;
}

Vec decode(const CompressorModel& m, const Vec& x) {
    if (x.size() != 2 * m.b) throw_shape_error("decode", x.size(), 2 * m.b);
    return matvec(m.C, x);
}

Vec expand_code(const BinaryCode& c) {
    Vec x(2 * c.nbits, 0.0);
    for (std::size_t k = 0; k < c.nbits; ++k) {
        if (c.get(k))
            x[2 * k] = 1.0;
        else
            x[2 * k + 1] = 1.0;
    }
    return x;
}

}  // namespace hve
