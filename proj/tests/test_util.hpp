#ifndef ADVBENCH_TEST_UTIL_HPP
#define ADVBENCH_TEST_UTIL_HPP

#include <cmath>
#include <vector>

#include "advbench/network.hpp"
#include "advbench/rng.hpp"
#include "advbench/train.hpp"

namespace advbench::testutil {

inline Tensor random_tensor(const Shape& shape, Rng& rng, double lo = 0.0, double hi = 1.0) {
    Tensor t(shape);
    for (double& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

inline double mean_batch_loss(const Network& net, const std::vector<Sample>& batch) {
    double sum = 0.0;
    for (const Sample& s : batch) sum += net.loss(s.image, s.label);
    return sum / static_cast<double>(batch.size());
}

// Central finite differences over every parameter of the network.
inline ParamGradients fd_param_gradients(Network& net, const std::vector<Sample>& batch,
                                         double step = 1e-5) {
    ParamGradients grads = net.zero_gradients();
    auto& layers = net.mutable_layers();
    for (std::size_t li = 0; li < layers.size(); ++li) {
        auto& params = layers[li]->params();
        for (std::size_t pi = 0; pi < params.size(); ++pi) {
            Tensor& p = params[pi];
            for (std::size_t i = 0; i < p.size(); ++i) {
                double saved = p[i];
                p[i] = saved + step;
                double up = mean_batch_loss(net, batch);
                p[i] = saved - step;
                double down = mean_batch_loss(net, batch);
                p[i] = saved;
                grads[li][pi][i] = (up - down) / (2.0 * step);
            }
        }
    }
    return grads;
}

inline Tensor fd_input_gradient(const Network& net, const Tensor& x, int y, double step = 1e-5) {
    Tensor grad(x.shape());
    Tensor probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double saved = probe[i];
        probe[i] = saved + step;
        double up = net.loss(probe, y);
        probe[i] = saved - step;
        double down = net.loss(probe, y);
        probe[i] = saved;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

// max relative error between analytic and numeric gradients, with an
// absolute floor so near-zero entries do not blow up the ratio.
inline double max_rel_error(const Tensor& a, const Tensor& b, double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

inline double max_rel_error(const ParamGradients& a, const ParamGradients& b,
                            double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t li = 0; li < a.size(); ++li)
        for (std::size_t pi = 0; pi < a[li].size(); ++pi)
            worst = std::max(worst, max_rel_error(a[li][pi], b[li][pi], floor));
    return worst;
}

// Small architectures cycled through by the gradient-fidelity checks; all
// stay under 500 parameters.
inline NetworkConfig tiny_net_config(int variant, std::uint64_t seed) {
    NetworkConfig cfg;
    cfg.seed = seed;
    switch (variant % 4) {
        case 0:  // dense-softmax
            cfg.input_shape = {5};
            cfg.num_classes = 3;
            cfg.layers = {LayerSpec::dense(3), LayerSpec::softmax()};
            break;
        case 1:  // dense-relu-dense
            cfg.input_shape = {6};
            cfg.num_classes = 4;
            cfg.layers = {LayerSpec::dense(8), LayerSpec::relu(), LayerSpec::dense(4),
                          LayerSpec::softmax()};
            break;
        case 2:  // conv + pool
            cfg.input_shape = {1, 6, 6};
            cfg.num_classes = 3;
            cfg.layers = {LayerSpec::conv2d(3, 3), LayerSpec::relu(), LayerSpec::maxpool2x2(),
                          LayerSpec::dense(3), LayerSpec::softmax()};
            break;
        case 3:  // conv + response-norm
            cfg.input_shape = {2, 4, 4};
            cfg.num_classes = 3;
            cfg.layers = {LayerSpec::conv2d(4, 3), LayerSpec::response_norm(), LayerSpec::relu(),
                          LayerSpec::dense(3), LayerSpec::softmax()};
            break;
    }
    return cfg;
}

}  // namespace advbench::testutil

#endif
