#include <doctest.h>

#include <cmath>

#include "advbench/synthetic.hpp"
#include "advbench/train.hpp"
#include "test_util.hpp"

using namespace advbench;
using namespace advbench::testutil;

namespace {

Dataset two_blob_dataset(std::uint64_t seed, int per_class = 100) {
    SyntheticSpec spec;
    spec.num_classes = 2;
    spec.samples_per_class = per_class;
    spec.dim = 2;
    spec.separation = 0.4;
    spec.noise = 0.06;
    spec.seed = seed;
    SyntheticData data = make_synthetic(spec);
    // merge: this test wants the full 200 samples for training
    for (auto& s : data.test.samples) data.train.samples.push_back(std::move(s));
    return std::move(data.train);
}

NetworkConfig blob_net(std::uint64_t seed) {
    NetworkConfig cfg;
    cfg.input_shape = {2};
    cfg.num_classes = 2;
    cfg.layers = {LayerSpec::dense(8), LayerSpec::relu(), LayerSpec::dense(2),
                  LayerSpec::softmax()};
    cfg.seed = seed;
    return cfg;
}

std::vector<double> flatten_params(const Network& net) {
    std::vector<double> out;
    for (const auto& layer : net.layers())
        for (const Tensor& p : layer->params())
            out.insert(out.end(), p.data().begin(), p.data().end());
    return out;
}

}  // namespace

TEST_CASE("train: separable 2-class blobs reach 99% train accuracy") {
    Dataset data = two_blob_dataset(3);
    Network net(blob_net(1));
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.batch_size = 16;
    cfg.learning_rate = 0.2;
    cfg.momentum = 0.9;
    cfg.seed = 5;
    train(net, data, cfg);
    CHECK(evaluate_accuracy(net, data) >= 0.99);
}

TEST_CASE("train: identical seeds give bitwise-identical parameters") {
    Dataset data = two_blob_dataset(3, 40);
    TrainConfig cfg;
    cfg.epochs = 8;
    cfg.batch_size = 8;
    cfg.seed = 9;

    Network a(blob_net(7)), b(blob_net(7));
    train(a, data, cfg);
    train(b, data, cfg);
    CHECK(flatten_params(a) == flatten_params(b));
}

TEST_CASE("train: different seeds give different initial weights") {
    Network a(blob_net(1)), b(blob_net(2));
    CHECK(flatten_params(a) != flatten_params(b));
}

TEST_CASE("train: learning rate decays by the factor at each decay epoch") {
    Dataset data = two_blob_dataset(3, 10);
    Network net(blob_net(1));
    TrainConfig cfg;
    cfg.epochs = 130;
    cfg.batch_size = 16;
    cfg.learning_rate = 0.1;
    cfg.decay_epochs = {50, 100};
    cfg.decay_factor = 10.0;
    cfg.seed = 2;
    TrainLog log = train(net, data, cfg);
    CHECK(log.epochs[40].learning_rate == doctest::Approx(0.1));
    CHECK(log.epochs[60].learning_rate == doctest::Approx(0.01));
    CHECK(log.epochs[120].learning_rate == doctest::Approx(0.001));
}

TEST_CASE("train: memorization loss falls from epoch 0 to epoch 50") {
    Rng rng(33);
    Dataset data;
    data.num_classes = 4;
    for (int i = 0; i < 32; ++i)
        data.samples.push_back({random_tensor({6}, rng), i % 4});
    NetworkConfig ncfg;
    ncfg.input_shape = {6};
    ncfg.num_classes = 4;
    ncfg.layers = {LayerSpec::dense(16), LayerSpec::relu(), LayerSpec::dense(4),
                   LayerSpec::softmax()};
    ncfg.seed = 3;
    Network net(ncfg);
    TrainConfig tcfg;
    tcfg.epochs = 51;
    tcfg.batch_size = 8;
    tcfg.learning_rate = 0.1;
    tcfg.seed = 4;
    TrainLog log = train(net, data, tcfg);
    CHECK(log.epochs[50].mean_loss < log.epochs[0].mean_loss);
}

TEST_CASE("train: invalid decay epochs rejected") {
    Dataset data = two_blob_dataset(3, 10);
    Network net(blob_net(1));
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.decay_epochs = {12};
    CHECK_THROWS(train(net, data, cfg));
    cfg.decay_epochs = {5, 5};
    CHECK_THROWS(train(net, data, cfg));
}

TEST_CASE("evaluate_accuracy: hand-built counts") {
    Network net(blob_net(1));
    // classify four fixed points, then relabel so exactly 3 are "correct"
    Rng rng(8);
    Dataset data;
    data.num_classes = 2;
    for (int i = 0; i < 4; ++i) data.samples.push_back({random_tensor({2}, rng), 0});
    for (int i = 0; i < 4; ++i)
        data.samples[static_cast<std::size_t>(i)].label =
            net.predict(data.samples[static_cast<std::size_t>(i)].image);
    data.samples[3].label = 1 - data.samples[3].label;
    CHECK(evaluate_accuracy(net, data) == doctest::Approx(0.75));

    Dataset one;
    one.num_classes = 2;
    one.samples.push_back(data.samples[0]);
    CHECK(evaluate_accuracy(net, one) == doctest::Approx(1.0));
    one.samples[0].label = 1 - one.samples[0].label;
    CHECK(evaluate_accuracy(net, one) == doctest::Approx(0.0));
}
