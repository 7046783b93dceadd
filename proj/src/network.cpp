#include "advbench/network.hpp"

#include <cmath>
#include <stdexcept>

namespace advbench {

Network::Network(NetworkConfig cfg) : cfg_(std::move(cfg)) { build(); }

Network::Network(const Network& o) : cfg_(o.cfg_) {
    build();
    for (std::size_t i = 0; i < layers_.size(); ++i)
        layers_[i]->params() = o.layers_[i]->params();
}

Network& Network::operator=(const Network& o) {
    if (this != &o) {
        cfg_ = o.cfg_;
        layers_.clear();
        build();
        for (std::size_t i = 0; i < layers_.size(); ++i)
            layers_[i]->params() = o.layers_[i]->params();
    }
    return *this;
}

void Network::build() {
    if (cfg_.layers.empty() || cfg_.layers.back().kind != LayerKind::Softmax)
        throw std::invalid_argument("NetworkConfig: final layer must be softmax");
    if (cfg_.num_classes <= 0)
        throw std::invalid_argument("NetworkConfig: num_classes must be positive");
    Rng init = Rng::for_stream(cfg_.seed, Rng::kInit);
    Shape shape = cfg_.input_shape;
    for (const LayerSpec& spec : cfg_.layers) {
        layers_.push_back(make_layer(spec, shape, init));
        shape = layers_.back()->output_shape();
    }
    if (shape != Shape{static_cast<std::size_t>(cfg_.num_classes)})
        throw std::invalid_argument("NetworkConfig: output length must equal num_classes");
}

void Network::check_input(const Tensor& x) const {
    if (x.shape() != cfg_.input_shape)
        throw std::invalid_argument("input shape " + shape_str(x.shape()) +
                                    " does not match network input " +
                                    shape_str(cfg_.input_shape));
}

Tensor Network::forward_to_logits(const Tensor& x, bool train_mode, Rng* dropout_rng,
                                  std::vector<LayerCache>* caches) const {
    check_input(x);
    if (caches) caches->resize(layers_.size() - 1);
    Tensor cur = x;
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i)
        cur = layers_[i]->forward(cur, train_mode, dropout_rng, caches ? &(*caches)[i] : nullptr);
    return cur;
}

Tensor Network::softmax_of(const Tensor& logits) const {
    return layers_.back()->forward(logits, false, nullptr, nullptr);
}

Tensor Network::forward(const Tensor& x, bool train_mode, Rng* dropout_rng) const {
    return softmax_of(forward_to_logits(x, train_mode, dropout_rng, nullptr));
}

Tensor Network::logits(const Tensor& x) const {
    return forward_to_logits(x, false, nullptr, nullptr);
}

int Network::predict(const Tensor& x) const {
    return static_cast<int>(forward(x).argmax());
}

double Network::loss(const Tensor& x, int y) const {
    if (y < 0 || y >= cfg_.num_classes) throw std::invalid_argument("loss: label out of range");
    return -std::log(forward(x)[static_cast<std::size_t>(y)]);
}

Tensor Network::backward_from_logits(const Tensor& logit_grad,
                                     const std::vector<LayerCache>& caches,
                                     ParamGradients* param_grads) const {
    Tensor grad = logit_grad;
    for (std::size_t i = layers_.size() - 1; i-- > 0;)
        grad = layers_[i]->backward(grad, caches[i], param_grads ? &(*param_grads)[i] : nullptr);
    return grad;
}

ParamGradients Network::zero_gradients() const {
    ParamGradients grads(layers_.size());
    for (std::size_t i = 0; i < layers_.size(); ++i)
        for (const Tensor& p : layers_[i]->params())
            grads[i].push_back(Tensor(p.shape()));
    return grads;
}

ParamGradients Network::param_gradients(const std::vector<Sample>& batch, bool train_mode,
                                        Rng* dropout_rng) const {
    if (batch.empty()) throw std::invalid_argument("param_gradients: empty batch");
    ParamGradients grads = zero_gradients();
    for (const Sample& s : batch) {
        if (s.label < 0 || s.label >= cfg_.num_classes)
            throw std::invalid_argument("param_gradients: label out of range");
        std::vector<LayerCache> caches;
        Tensor z = forward_to_logits(s.image, train_mode, dropout_rng, &caches);
        Tensor p = softmax_of(z);
        Tensor seed = p;  // d(-log p_y)/dz = p - onehot(y)
        seed[static_cast<std::size_t>(s.label)] -= 1.0;
        backward_from_logits(seed, caches, &grads);
    }
    double inv = 1.0 / static_cast<double>(batch.size());
    for (auto& layer_grads : grads)
        for (Tensor& g : layer_grads) g *= inv;
    return grads;
}

Tensor Network::input_gradient(const Tensor& x, int y) const {
    if (y < 0 || y >= cfg_.num_classes)
        throw std::invalid_argument("input_gradient: label out of range");
    std::vector<LayerCache> caches;
    Tensor z = forward_to_logits(x, false, nullptr, &caches);
    Tensor seed = softmax_of(z);
    seed[static_cast<std::size_t>(y)] -= 1.0;
    return backward_from_logits(seed, caches, nullptr);
}

Tensor Network::logit_input_gradient(const Tensor& x, const std::vector<double>& seed) const {
    if (seed.size() != static_cast<std::size_t>(cfg_.num_classes))
        throw std::invalid_argument("logit_input_gradient: seed length must equal num_classes");
    std::vector<LayerCache> caches;
    forward_to_logits(x, false, nullptr, &caches);
    return backward_from_logits(Tensor::vector(seed), caches, nullptr);
}

}  // namespace advbench
