#include <doctest.h>

#include <cmath>
#include <limits>

#include "hve/synthetic.hpp"
#include "hve/training.hpp"

using namespace hve;

namespace {

CompressorModel random_model(std::size_t d, std::size_t b, Rng& rng) {
    CompressorModel m(d, b);
    for (double& x : m.A.data) x = rng.uniform(-1, 1);
    for (double& x : m.bias1) x = rng.uniform(-0.5, 0.5);
    for (double& x : m.A2.data) x = rng.uniform(-1, 1);
    for (double& x : m.bias2) x = rng.uniform(-0.5, 0.5);
    for (double& x : m.C.data) x = rng.uniform(-1, 1);
    return m;
}

double deterministic_loss(const CompressorModel& m, const Vec& e) {
    const ForwardTrace t = encode(m, e, nullptr);
    return reconstruction_loss(e, t.reconstruction);
}

// central finite differences over every parameter tensor, g = 0
bool gradients_match_fd(CompressorModel m, const Vec& e, double h, double rel_tol,
                        double abs_floor) {
    const ForwardTrace trace = encode(m, e, nullptr);
    const Gradients g = backward(m, trace);

    auto check_tensor = [&](std::vector<double>& param, const std::vector<double>& grad) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            const double orig = param[i];
            param[i] = orig + h;
            const double lp = deterministic_loss(m, e);
            param[i] = orig - h;
            const double lm = deterministic_loss(m, e);
            param[i] = orig;
            const double fd = (lp - lm) / (2 * h);
            const double err = std::abs(grad[i] - fd);
            if (err > abs_floor && err > rel_tol * std::max(std::abs(fd), std::abs(grad[i])))
                return false;
        }
        return true;
    };

    return check_tensor(m.A.data, g.dA.data) && check_tensor(m.bias1, g.dbias1) &&
           check_tensor(m.A2.data, g.dA2.data) && check_tensor(m.bias2, g.dbias2) &&
           check_tensor(m.C.data, g.dC.data);
}

}  // namespace

TEST_CASE("reconstruction_loss") {
    CHECK(reconstruction_loss(Vec{1, 2, 3}, Vec{1, 2, 3}) == 0.0);
    CHECK(reconstruction_loss(Vec{1, 0}, Vec{0, 0}) == 1.0);
    CHECK(reconstruction_loss(Vec{1, 2}, Vec{3, 5}) == 13.0);
    CHECK_THROWS(reconstruction_loss(Vec{1}, Vec{1, 2}));
}

TEST_CASE("backward matches central finite differences") {
    Rng rng(90210);
    for (int trial = 0; trial < 20; ++trial) {
        const CompressorModel m = random_model(8, 4, rng);
        Vec e(8);
        for (double& x : e) x = rng.uniform(-2, 2);
        CHECK(gradients_match_fd(m, e, 1e-5, 1e-4, 1e-7));
    }
}

TEST_CASE("perfect reconstruction zeroes the codebook gradient") {
    // force e' = e by feeding a trace whose reconstruction equals the input
    Rng rng(4);
    CompressorModel m = random_model(4, 2, rng);
    Vec e{0.5, -0.25, 1.0, 0.0};
    ForwardTrace t = encode(m, e, nullptr);
    t.reconstruction = e;  // stationary reconstruction term
    const Gradients g = backward(m, t);
    for (double x : g.dC.data) CHECK(x == 0.0);
    for (double x : g.dA.data) CHECK(x == 0.0);
    for (double x : g.dbias1) CHECK(x == 0.0);
    for (double x : g.dA2.data) CHECK(x == 0.0);
    for (double x : g.dbias2) CHECK(x == 0.0);
}

TEST_CASE("adam single step and zero-gradient fixpoint") {
    CompressorModel m(1, 1);  // all parameters zero
    AdamState state(m);
    Gradients g(m);
    g.dA(0, 0) = 1.0;
    adam_step(m, g, state, 1e-4);
    // bias correction makes the first step ~ lr * sign(grad)
    CHECK(m.A(0, 0) == doctest::Approx(-1e-4).epsilon(1e-3));
    CHECK(state.t == 1);

    CompressorModel m2(2, 2);
    Rng rng(1);
    for (double& x : m2.C.data) x = rng.uniform(-1, 1);
    const CompressorModel before = m2;
    AdamState s2(m2);
    const Gradients zero(m2);
    for (int i = 0; i < 10; ++i) adam_step(m2, zero, s2, 1e-2);
    CHECK(m2.C.data == before.C.data);
    CHECK(m2.A.data == before.A.data);
}

TEST_CASE("adam determinism") {
    Rng r1(6), r2(6);
    CompressorModel a = random_model(3, 2, r1);
    CompressorModel b = random_model(3, 2, r2);
    AdamState sa(a), sb(b);
    Rng g1(9), g2(9);
    for (int step = 0; step < 25; ++step) {
        Gradients ga(a), gb(b);
        for (double& x : ga.dC.data) x = g1.uniform(-1, 1);
        for (double& x : gb.dC.data) x = g2.uniform(-1, 1);
        adam_step(a, ga, sa, 1e-3);
        adam_step(b, gb, sb, 1e-3);
    }
    CHECK(a.C.data == b.C.data);
}

TEST_CASE("init_model scaling and determinism") {
    EmbeddingSet data(3, 4);
    // unit-norm first row
    data.row(0)[0] = 1.0;
    data.row(1)[1] = 2.0;
    data.row(2)[2] = 0.5;

    Rng r1(42), r2(42);
    const CompressorModel a = init_model(4, 4, data, r1);
    const CompressorModel b = init_model(4, 4, data, r2);
    CHECK(a.C.data == b.C.data);
    CHECK(a.A.data == b.A.data);

    // each column is some row scaled by 1/(x*b), x in [1,2], so its norm
    // lies in [norm/(2b), norm/b]
    for (std::size_t col = 0; col < 8; ++col) {
        double cn = 0.0;
        for (std::size_t i = 0; i < 4; ++i) cn += a.C(i, col) * a.C(i, col);
        cn = std::sqrt(cn);
        bool plausible = false;
        for (std::size_t row = 0; row < 3; ++row) {
            const double rn = norm2(data.row_vec(row));
            if (cn >= rn / 8.0 - 1e-12 && cn <= rn / 4.0 + 1e-12) plausible = true;
        }
        CHECK(plausible);
    }

    for (double x : a.bias1) CHECK(x == 0.0);
    for (double x : a.bias2) CHECK(x == 0.0);

    CHECK_THROWS(init_model(4, 4, EmbeddingSet(), r1));
}

TEST_CASE("init reconstruction norm is on the order of the data norm") {
    Rng data_rng(77);
    // unit-norm embeddings sharing a dominant direction, so the b
    // selected columns sum coherently to about |e| / x
    Vec base(16);
    for (double& x : base) x = sample_normal(data_rng);
    EmbeddingSet data(64, 16);
    for (std::size_t i = 0; i < data.n; ++i) {
        Vec e(16);
        for (std::size_t j = 0; j < 16; ++j) e[j] = base[j] + 0.3 * sample_normal(data_rng);
        const double n = norm2(e);
        for (std::size_t j = 0; j < 16; ++j) data.row(i)[j] = e[j] / n;
    }
    Rng rng(5);
    const CompressorModel m = init_model(16, 8, data, rng);
    double mean_norm = 0.0;
    const int trials = 50;
    for (int t = 0; t < trials; ++t) {
        BinaryCode code(8);
        for (std::size_t k = 0; k < 8; ++k)
            if (rng.uniform01() < 0.5) code.set(k, true);
        mean_norm += norm2(decode(m, expand_code(code)));
    }
    mean_norm /= trials;
    CHECK(mean_norm > 1.0 / 4.0);
    CHECK(mean_norm < 4.0);
}

TEST_CASE("stopping after exactly patience_window epochs when tolerance is infinite") {
    EmbeddingSet data(4, 4);
    Rng rng(3);
    for (double& x : data.data) x = rng.uniform(-1, 1);

    TrainConfig cfg;
    cfg.max_epochs = 500;
    cfg.patience_window = 7;
    cfg.delta_tolerance = std::numeric_limits<double>::infinity();
    cfg.seed = 1;
    const auto [model, history] = train(data, 2, cfg);
    CHECK(history.epochs == 7);
    CHECK(history.stop_reason == StopReason::Converged);
}

TEST_CASE("training is bit-reproducible") {
    EmbeddingSet data(16, 8);
    Rng rng(12);
    for (double& x : data.data) x = rng.uniform(-1, 1);

    TrainConfig cfg;
    cfg.max_epochs = 30;
    cfg.patience_window = 100;
    cfg.seed = 314;
    const auto [m1, h1] = train(data, 4, cfg);
    const auto [m2, h2] = train(data, 4, cfg);
    CHECK(m1.A.data == m2.A.data);
    CHECK(m1.C.data == m2.C.data);
    CHECK(h1.epoch_loss == h2.epoch_loss);
}

TEST_CASE("loss trace is finite and nonnegative; training makes progress") {
    const PlantedData planted = gen_planted(8, 4, 64, 99);

    TrainConfig cfg;
    cfg.max_epochs = 200;
    cfg.learning_rate = 3e-3;
    cfg.patience_window = 500;  // no early stop
    cfg.seed = 2;
    const auto [model, history] = train(planted.embeddings, 4, cfg);
    for (double l : history.epoch_loss) {
        CHECK(l >= 0.0);
        CHECK(std::isfinite(l));
    }
    double head = 0.0, tail = 0.0;
    for (int i = 0; i < 10; ++i) {
        head += history.epoch_loss[i];
        tail += history.epoch_loss[history.epochs - 1 - i];
    }
    CHECK(tail < head);
}

TEST_CASE("single-point convergence") {
    EmbeddingSet data(1, 16);
    Rng rng(808);
    for (double& x : data.data) x = sample_normal(rng);
    const double e_norm2 = squared_norm(data.row_vec(0));

    TrainConfig cfg;
    cfg.max_epochs = 5000;
    cfg.learning_rate = 3e-3;
    cfg.patience_window = 100;
    cfg.delta_tolerance = 1e-10;
    cfg.seed = 7;
    const auto [model, history] = train(data, 8, cfg);
    CHECK(mean_deterministic_loss(model, data) < 1e-3 * e_norm2);
}

TEST_CASE("train input validation") {
    TrainConfig cfg;
    CHECK_THROWS(train(EmbeddingSet(), 4, cfg));

    EmbeddingSet data(2, 2);
    CHECK_THROWS(train(data, 0, cfg));

    TrainConfig bad = cfg;
    bad.learning_rate = 0.0;
    CHECK_THROWS(train(data, 2, bad));
    bad = cfg;
    bad.delta_tolerance = -1.0;
    CHECK_THROWS(train(data, 2, bad));
}
