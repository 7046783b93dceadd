#include "advbench/train.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace advbench {

namespace {

void check_config(const TrainConfig& cfg) {
    if (cfg.epochs <= 0) throw std::invalid_argument("TrainConfig: epochs must be positive");
    if (cfg.batch_size <= 0) throw std::invalid_argument("TrainConfig: batch size must be positive");
    if (cfg.decay_factor <= 0.0) throw std::invalid_argument("TrainConfig: decay factor must be positive");
    for (std::size_t i = 0; i < cfg.decay_epochs.size(); ++i) {
        if (cfg.decay_epochs[i] >= cfg.epochs)
            throw std::invalid_argument("TrainConfig: decay epochs must be < epochs");
        if (i > 0 && cfg.decay_epochs[i] <= cfg.decay_epochs[i - 1])
            throw std::invalid_argument("TrainConfig: decay epochs must be strictly increasing");
    }
}

// Fisher-Yates with the seeded shuffle stream.
void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.next_below(i)]);
}

}  // namespace

TrainLog train(Network& net, const Dataset& data, const TrainConfig& cfg) {
    check_config(cfg);
    data.check();
    if (data.empty()) throw std::invalid_argument("train: empty dataset");

    Rng shuffle_rng = Rng::for_stream(cfg.seed, Rng::kShuffle);
    Rng dropout_rng = Rng::for_stream(cfg.seed, Rng::kDropout);

    // Momentum buffers, one per parameter tensor.
    ParamGradients velocity = net.zero_gradients();

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    double lr = cfg.learning_rate;
    TrainLog log;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (std::find(cfg.decay_epochs.begin(), cfg.decay_epochs.end(), epoch) !=
            cfg.decay_epochs.end())
            lr /= cfg.decay_factor;

        shuffle_indices(order, shuffle_rng);

        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<Sample> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) batch.push_back(data.samples[order[i]]);

            ParamGradients grads = net.param_gradients(batch, true, &dropout_rng);

            auto& layers = net.mutable_layers();
            for (std::size_t li = 0; li < layers.size(); ++li) {
                auto& params = layers[li]->params();
                for (std::size_t pi = 0; pi < params.size(); ++pi) {
                    Tensor& v = velocity[li][pi];
                    const Tensor& g = grads[li][pi];
                    Tensor& p = params[pi];
                    for (std::size_t i = 0; i < p.size(); ++i) {
                        v[i] = cfg.momentum * v[i] - lr * g[i];
                        p[i] += v[i];
                    }
                }
            }

            for (const Sample& s : batch) {
                loss_sum += net.loss(s.image, s.label);
                ++loss_count;
            }
        }

        double mean_loss = loss_sum / static_cast<double>(loss_count);
        if (!std::isfinite(mean_loss))
            throw std::runtime_error("train: diverged (non-finite loss) at epoch " +
                                     std::to_string(epoch));
        log.epochs.push_back({epoch, mean_loss, evaluate_accuracy(net, data), lr});
    }
    return log;
}

double evaluate_accuracy(const Network& net, const Dataset& data) {
    if (data.empty()) throw std::invalid_argument("evaluate_accuracy: empty dataset");
    std::size_t correct = 0;
    for (const Sample& s : data.samples)
        if (net.predict(s.image) == s.label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace advbench
