#include "hve/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hve {

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be positive");
    if (delta_tolerance <= 0.0) throw std::invalid_argument("TrainConfig: delta_tolerance must be positive");
    if (patience_window < 1) throw std::invalid_argument("TrainConfig: patience_window must be >= 1");
    if (tau <= 0.0) throw std::invalid_argument("TrainConfig: tau must be positive");
    if (tau_final && *tau_final <= 0.0)
        throw std::invalid_argument("TrainConfig: tau_final must be positive");
    if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
}

Gradients::Gradients(const CompressorModel& m)
    : dA(m.b, m.d), dbias1(m.b, 0.0), dA2(2 * m.b, m.b), dbias2(2 * m.b, 0.0), dC(m.d, 2 * m.b) {}

void Gradients::add(const Gradients& other) {
    auto axpy = [](std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    axpy(dA.data, other.dA.data);
    axpy(dbias1, other.dbias1);
    axpy(dA2.data, other.dA2.data);
    axpy(dbias2, other.dbias2);
    axpy(dC.data, other.dC.data);
}

void Gradients::scale(double s) {
    for (double& x : dA.data) x *= s;
    for (double& x : dbias1) x *= s;
    for (double& x : dA2.data) x *= s;
    for (double& x : dbias2) x *= s;
    for (double& x : dC.data) x *= s;
}

AdamState::AdamState(const CompressorModel& m)
    : mA(m.b, m.d), vA(m.b, m.d), mb1(m.b, 0.0), vb1(m.b, 0.0), mA2(2 * m.b, m.b),
      vA2(2 * m.b, m.b), mb2(2 * m.b, 0.0), vb2(2 * m.b, 0.0), mC(m.d, 2 * m.b),
      vC(m.d, 2 * m.b) {}

double reconstruction_loss(const Vec& e, const Vec& e_prime) {
    if (e.size() != e_prime.size())
        throw_shape_error("reconstruction_loss", e.size(), e_prime.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double r = e[i] - e_prime[i];
        acc += r * r;
    }
    return acc;
}

void accumulate_backward(const CompressorModel& m, const ForwardTrace& trace, Gradients& accum) {
    if (trace.input.size() != m.d || trace.logits.size() != 2 * m.b)
        throw std::invalid_argument("backward: trace does not match model shapes");

    // dL/de' = 2 (e' - e)
    Vec d_recon(m.d);
    for (std::size_t i = 0; i < m.d; ++i)
        d_recon[i] = 2.0 * (trace.reconstruction[i] - trace.input[i]);

    // dC += dL/de' z^T, dz = C^T dL/de'
    for (std::size_t i = 0; i < m.d; ++i) {
        const double di = d_recon[i];
        double* row = accum.dC.data.data() + i * 2 * m.b;
        for (std::size_t j = 0; j < 2 * m.b; ++j) row[j] += di * trace.assignments.values[j];
    }
    Vec dz = matvec_transposed(m.C, d_recon);

    // two-class softmax Jacobian per pair
    Vec dy(2 * m.b);
    for (std::size_t k = 0; k < m.b; ++k) {
        const double z1 = trace.assignments.values[2 * k];
        const double z2 = trace.assignments.values[2 * k + 1];
        const double dy1 = (z1 * z2 / m.tau) * (dz[2 * k] - dz[2 * k + 1]);
        dy[2 * k] = dy1;
        dy[2 * k + 1] = -dy1;
    }

    // softplus'(pre) recovered from the post-activation: 1 - exp(-y)
    Vec d_logits_pre(2 * m.b);
    for (std::size_t i = 0; i < 2 * m.b; ++i)
        d_logits_pre[i] = dy[i] * (1.0 - std::exp(-trace.logits[i]));

    for (std::size_t i = 0; i < 2 * m.b; ++i) {
        const double di = d_logits_pre[i];
        double* row = accum.dA2.data.data() + i * m.b;
        for (std::size_t j = 0; j < m.b; ++j) row[j] += di * trace.hidden[j];
        accum.dbias2[i] += di;
    }

    Vec d_hidden = matvec_transposed(m.A2, d_logits_pre);
    Vec d_hidden_pre(m.b);
    for (std::size_t i = 0; i < m.b; ++i)
        d_hidden_pre[i] = d_hidden[i] * (1.0 - trace.hidden[i] * trace.hidden[i]);

    for (std::size_t i = 0; i < m.b; ++i) {
        const double di = d_hidden_pre[i];
        double* row = accum.dA.data.data() + i * m.d;
        for (std::size_t j = 0; j < m.d; ++j) row[j] += di * trace.input[j];
        accum.dbias1[i] += di;
    }
}

Gradients backward(const CompressorModel& m, const ForwardTrace& trace) {
    Gradients g(m);
    accumulate_backward(m, trace, g);
    return g;
}

namespace {

void adam_update(std::vector<double>& param, const std::vector<double>& grad,
                 std::vector<double>& m, std::vector<double>& v, double lr,
                 double bc1, double bc2) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = AdamState::beta1 * m[i] + (1.0 - AdamState::beta1) * grad[i];
        v[i] = AdamState::beta2 * v[i] + (1.0 - AdamState::beta2) * grad[i] * grad[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + AdamState::epsilon);
    }
}

}  // namespace

void adam_step(CompressorModel& params, const Gradients& grads, AdamState& state, double lr) {
    if (lr <= 0.0) throw std::invalid_argument("adam_step: lr must be positive");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(AdamState::beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(AdamState::beta2, static_cast<double>(state.t));
    adam_update(params.A.data, grads.dA.data, state.mA.data, state.vA.data, lr, bc1, bc2);
    adam_update(params.bias1, grads.dbias1, state.mb1, state.vb1, lr, bc1, bc2);
    adam_update(params.A2.data, grads.dA2.data, state.mA2.data, state.vA2.data, lr, bc1, bc2);
    adam_update(params.bias2, grads.dbias2, state.mb2, state.vb2, lr, bc1, bc2);
    adam_update(params.C.data, grads.dC.data, state.mC.data, state.vC.data, lr, bc1, bc2);
}

CompressorModel init_model(std::size_t d, std::size_t b, const EmbeddingSet& training_sample,
                           Rng& rng) {
    if (training_sample.n == 0) throw std::invalid_argument("init_model: empty training sample");
    if (training_sample.d != d) throw_shape_error("init_model", training_sample.d, d);
    if (b < 1 || d < 1) throw std::invalid_argument("init_model: d and b must be >= 1");

    CompressorModel m(d, b);

    const double bound1 = 1.0 / std::sqrt(static_cast<double>(d));
    for (double& w : m.A.data) w = rng.uniform(-bound1, bound1);
    const double bound2 = 1.0 / std::sqrt(static_cast<double>(b));
    for (double& w : m.A2.data) w = rng.uniform(-bound2, bound2);

    // each codebook column is a random training embedding scaled so the
    // sum of b selected columns lands near the data norm
    for (std::size_t col = 0; col < 2 * b; ++col) {
        const std::size_t pick = rng.index(training_sample.n);
        const double x = rng.uniform(1.0, 2.0);
        const double scale = 1.0 / (x * static_cast<double>(b));
        const auto e = training_sample.row(pick);
        for (std::size_t i = 0; i < d; ++i) m.C(i, col) = scale * e[i];
    }
    return m;
}

double mean_deterministic_loss(const CompressorModel& m, const EmbeddingSet& data) {
    if (data.n == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        const Vec e = data.row_vec(i);
        const ForwardTrace t = encode(m, e, nullptr);
        acc += reconstruction_loss(e, t.reconstruction);
    }
    return acc / static_cast<double>(data.n);
}

std::pair<CompressorModel, TrainHistory> train(const EmbeddingSet& data, std::size_t b,
                                               const TrainConfig& cfg,
                                               const EpochCallback& on_epoch) {
    cfg.validate();
    if (data.n == 0) throw std::invalid_argument("train: empty dataset");
    if (data.d == 0 || b == 0) throw std::invalid_argument("train: d and b must be positive");

    Rng rng(cfg.seed);
    CompressorModel model = init_model(data.d, b, data, rng);
    model.tau = cfg.tau;
    AdamState adam(model);
    TrainHistory history;

    const std::size_t batch = cfg.batch_size == 0 ? data.n : std::min(cfg.batch_size, data.n);
    std::vector<std::size_t> order(data.n);
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        if (cfg.tau_final) {
            const std::size_t half = std::max<std::size_t>(1, cfg.max_epochs / 2);
            const double frac = std::min(1.0, static_cast<double>(epoch) / static_cast<double>(half));
            model.tau = cfg.tau + frac * (*cfg.tau_final - cfg.tau);
        }

        rng.shuffle(order);
        double epoch_loss = 0.0;

        for (std::size_t start = 0; start < data.n; start += batch) {
            const std::size_t end = std::min(start + batch, data.n);
            Gradients batch_grad(model);
            for (std::size_t idx = start; idx < end; ++idx) {
                const Vec e = data.row_vec(order[idx]);
                const ForwardTrace trace = encode(model, e, &rng);
                epoch_loss += reconstruction_loss(e, trace.reconstruction);
                accumulate_backward(model, trace, batch_grad);
            }
            batch_grad.scale(1.0 / static_cast<double>(end - start));
            adam_step(model, batch_grad, adam, cfg.learning_rate);
        }

        epoch_loss /= static_cast<double>(data.n);
        if (!std::isfinite(epoch_loss))
            throw std::runtime_error("train: loss became non-finite at epoch " +
                                     std::to_string(epoch + 1));
        history.epoch_loss.push_back(epoch_loss);
        history.epochs = epoch + 1;
        if (on_epoch) on_epoch(epoch + 1, epoch_loss);

        if (history.epochs >= cfg.patience_window) {
            const auto first =
                history.epoch_loss.end() - static_cast<std::ptrdiff_t>(cfg.patience_window);
            const auto [lo, hi] = std::minmax_element(first, history.epoch_loss.end());
            if (*hi - *lo < cfg.delta_tolerance) {
                history.stop_reason = StopReason::Converged;
                return {std::move(model), std::move(history)};
            }
        }
    }
    history.stop_reason = StopReason::MaxEpochs;
    return {std::move(model), std::move(history)};
}

}  // namespace hve
