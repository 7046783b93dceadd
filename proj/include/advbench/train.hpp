#ifndef ADVBENCH_TRAIN_HPP
#define ADVBENCH_TRAIN_HPP

#include <cstdint>
#include <vector>

#include "advbench/dataset.hpp"
#include "advbench/network.hpp"

namespace advbench {

struct TrainConfig {
    int epochs = 50;
    int batch_size = 128;
    double learning_rate = 0.1;
    double momentum = 0.9;
    std::vector<int> decay_epochs;  // strictly increasing, < epochs
    double decay_factor = 10.0;
    std::uint64_t seed = 1;
};

struct EpochStats {
    int epoch = 0;
    double mean_loss = 0.0;
    double train_accuracy = 0.0;
    double learning_rate = 0.0;
};

struct TrainLog {
    std::vector<EpochStats> epochs;
};

// SGD with momentum and stepped learning-rate decay. Deterministic given
// cfg.seed: shuffling and dropout masks come from seeded streams. Throws
// on non-finite loss.
TrainLog train(Network& net, const Dataset& data, const TrainConfig& cfg);

// Argmax accuracy; argmax ties resolve to the lowest class index.
double evaluate_accuracy(const Network& net, const Dataset& data);

}  // namespace advbench

#endif
