#ifndef ADVBENCH_NETWORK_HPP
#define ADVBENCH_NETWORK_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "advbench/dataset.hpp"
#include "advbench/layers.hpp"
#include "advbench/rng.hpp"
#include "advbench/tensor.hpp"

namespace advbench {

struct NetworkConfig {
    Shape input_shape;
    std::vector<LayerSpec> layers;  // final layer must be softmax over num_classes
    int num_classes = 0;
    std::uint64_t seed = 1;
};

// One gradient tensor list per layer, shapes matching the layer's parameters.
using ParamGradients = std::vector<std::vector<Tensor>>;

// Layer stack with parameters. A trained network is immutable and safe to
// share across threads for forward / gradient queries; training mutates a
// private instance through mutable_layers().
class Network {
public:
    explicit Network(NetworkConfig cfg);

    Network(const Network& o);
    Network& operator=(const Network& o);
    Network(Network&&) = default;
    Network& operator=(Network&&) = default;

    const NetworkConfig& config() const { return cfg_; }
    int num_classes() const { return cfg_.num_classes; }
    const Shape& input_shape() const { return cfg_.input_shape; }

    // Probability vector of length num_classes; sums to 1 within 1e-9.
    Tensor forward(const Tensor& x, bool train_mode = false, Rng* dropout_rng = nullptr) const;

    // Pre-softmax activations (needed by the multiclass linearization attack).
    Tensor logits(const Tensor& x) const;

    int predict(const Tensor& x) const;

    // Cross-entropy -log(h_y(x)); finite because probabilities are floored.
    double loss(const Tensor& x, int y) const;

    // Gradient of the mean batch loss w.r.t. every parameter tensor.
    ParamGradients param_gradients(const std::vector<Sample>& batch, bool train_mode = false,
                                   Rng* dropout_rng = nullptr) const;

    // d loss(x, y) / dx, dropout disabled.
    Tensor input_gradient(const Tensor& x, int y) const;

    // d (seed . logits(x)) / dx; seed has one entry per class.
    Tensor logit_input_gradient(const Tensor& x, const std::vector<double>& seed) const;

    ParamGradients zero_gradients() const;

    const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }
    std::vector<std::unique_ptr<Layer>>& mutable_layers() { return layers_; }

private:
    void build();
    void check_input(const Tensor& x) const;

    // Forward through every layer but the final softmax; fills caches.
    Tensor forward_to_logits(const Tensor& x, bool train_mode, Rng* dropout_rng,
                             std::vector<LayerCache>* caches) const;

    // Backward from d(loss)/d(logits) through all layers below the softmax.
    Tensor backward_from_logits(const Tensor& logit_grad, const std::vector<LayerCache>& caches,
                                ParamGradients* param_grads) const;

    Tensor softmax_of(const Tensor& logits) const;

    NetworkConfig cfg_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace advbench

#endif
