#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

#include "hve/compressor.hpp"
#include "hve/embedding.hpp"

// Reconstruction-error training: hand-derived backpropagation through
// the encoder-bottleneck-decoder pipeline, optimized with Adam.

namespace hve {

struct TrainConfig {
    double learning_rate = 1e-4;
    std::size_t batch_size = 64;  // 0 means full batch
    std::size_t max_epochs = 1000;
    std::size_t patience_window = 100;
    double delta_tolerance = 1e-5;
    double tau = 1.0;
    std::optional<double> tau_final;  // linear anneal over the first half of training
    std::uint64_t seed = 0;

    void validate() const;
};

struct Gradients {
    Mat dA;
    Vec dbias1;
    Mat dA2;
    Vec dbias2;
    Mat dC;

    explicit Gradients(const CompressorModel& m);
    void add(const Gradients& other);
    void scale(double s);
};

// Bias-corrected Adam with pinned constants.
struct AdamState {
    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double epsilon = 1e-8;

    Mat mA, vA;
    Vec mb1, vb1;
    Mat mA2, vA2;
    Vec mb2, vb2;
    Mat mC, vC;
    std::uint64_t t = 0;

    explicit AdamState(const CompressorModel& m);
};

enum class StopReason { Converged, MaxEpochs };

struct TrainHistory {
    std::vector<double> epoch_loss;  // mean per-example loss per epoch
    StopReason stop_reason = StopReason::MaxEpochs;
    std::size_t epochs = 0;
};

// Per-example squared Euclidean reconstruction error.
double reconstruction_loss(const Vec& e, const Vec& e_prime);

// Analytic gradient of the single-example loss with the trace's noise
// held fixed.
Gradients backward(const CompressorModel& m, const ForwardTrace& trace);

// Same gradient, added into an existing accumulator without allocating
// the parameter-sized tensors (the hot path of the training loop).
void accumulate_backward(const CompressorModel& m, const ForwardTrace& trace, Gradients& accum);

void adam_step(CompressorModel& params, const Gradients& grads, AdamState& state, double lr);

// Codebook columns are random training embeddings scaled by 1/(x*b)
// with x ~ U[1,2] per column; weights uniform in +-1/sqrt(fan_in),
// biases zero.
CompressorModel init_model(std::size_t d, std::size_t b, const EmbeddingSet& training_sample,
                           Rng& rng);

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

std::pair<CompressorModel, TrainHistory> train(const EmbeddingSet& data, std::size_t b,
                                               const TrainConfig& cfg,
                                               const EpochCallback& on_epoch = nullptr);

// Mean deterministic-mode (g=0) reconstruction loss over a dataset.
double mean_deterministic_loss(const CompressorModel& m, const EmbeddingSet& data);

}  // namespace hve
