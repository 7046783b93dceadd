#include "advbench/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advbench {

std::string layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Dense: return "dense";
        case LayerKind::Conv2d: return "conv2d";
        case LayerKind::Relu: return "relu";
        case LayerKind::MaxPool2x2: return "maxpool2x2";
        case LayerKind::ResponseNorm: return "response-norm";
        case LayerKind::Dropout: return "dropout";
        case LayerKind::Softmax: return "softmax";
    }
    throw std::logic_error("unknown LayerKind");
}

LayerKind layer_kind_from_name(const std::string& name) {
    if (name == "dense") return LayerKind::Dense;
    if (name == "conv2d") return LayerKind::Conv2d;
    if (name == "relu") return LayerKind::Relu;
    if (name == "maxpool2x2") return LayerKind::MaxPool2x2;
    if (name == "response-norm") return LayerKind::ResponseNorm;
    if (name == "dropout") return LayerKind::Dropout;
    if (name == "softmax") return LayerKind::Softmax;
    throw std::invalid_argument("unknown layer kind: " + name);
}

LayerSpec LayerSpec::dense(std::size_t units) {
    LayerSpec s;
    s.kind = LayerKind::Dense;
    s.units = units;
    return s;
}
LayerSpec LayerSpec::conv2d(std::size_t filters, std::size_t filter_size) {
    LayerSpec s;
    s.kind = LayerKind::Conv2d;
    s.filters = filters;
    s.filter_size = filter_size;
    return s;
}
LayerSpec LayerSpec::relu() { return LayerSpec{LayerKind::Relu}; }
LayerSpec LayerSpec::maxpool2x2() { return LayerSpec{LayerKind::MaxPool2x2}; }
LayerSpec LayerSpec::response_norm() { return LayerSpec{LayerKind::ResponseNorm}; }
LayerSpec LayerSpec::dropout(double p) {
    LayerSpec s;
    s.kind = LayerKind::Dropout;
    s.dropout_p = p;
    return s;
}
LayerSpec LayerSpec::softmax() { return LayerSpec{LayerKind::Softmax}; }

namespace {

void save_input(const Tensor& in, LayerCache* cache) {
    if (cache) cache->input = in;
}

class DenseLayer : public Layer {
public:
    DenseLayer(LayerSpec spec, Shape in_shape, Rng& rng) : Layer(spec, std::move(in_shape)) {
        if (spec_.units == 0) throw std::invalid_argument("dense: units must be positive");
        fan_in_ = shape_numel(in_shape_);
        double a = std::sqrt(6.0 / static_cast<double>(fan_in_ + spec_.units));
        Tensor w(Shape{spec_.units, fan_in_});
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-a, a);
        params_.push_back(std::move(w));
        params_.push_back(Tensor(Shape{spec_.units}));
    }

    Shape output_shape() const override { return Shape{spec_.units}; }

    Tensor forward(const Tensor& in, bool, Rng*, LayerCache* cache) const override {
        save_input(in, cache);
        const Tensor& w = params_[0];
        const Tensor& b = params_[1];
        Tensor out(Shape{spec_.units});
        for (std::size_t u = 0; u < spec_.units; ++u) {
            double acc = b[u];
            const double* wr = w.data().data() + u * fan_in_;
            for (std::size_t i = 0; i < fan_in_; ++i) acc += wr[i] * in[i];
            out[u] = acc;
        }
        return out;
    }

    Tensor backward(const Tensor& grad_out, const LayerCache& cache,
                    std::vector<Tensor>* param_grads) const override {
        const Tensor& w = params_[0];
        const Tensor& in = cache.input;
        Tensor grad_in(in.shape());
        for (std::size_t u = 0; u < spec_.units; ++u) {
            double g = grad_out[u];
            const double* wr = w.data().data() + u * fan_in_;
            for (std::size_t i = 0; i < fan_in_; ++i) grad_in[i] += g * wr[i];
        }
        if (param_grads) {
            Tensor& gw = (*param_grads)[0];
            Tensor& gb = (*param_grads)[1];
            for (std::size_t u = 0; u < spec_.units; ++u) {
                double g = grad_out[u];
                double* gwr = gw.data().data() + u * fan_in_;
                for (std::size_t i = 0; i < fan_in_; ++i) gwr[i] += g * in[i];
                gb[u] += g;
            }
        }
        return grad_in;
    }

private:
    std::size_t fan_in_;
};

// Stride-1, same-padding convolution over (channels, height, width) input.
class Conv2dLayer : public Layer {
public:
    Conv2dLayer(LayerSpec spec, Shape in_shape, Rng& rng) : Layer(spec, std::move(in_shape)) {
        if (in_shape_.size() != 3)
            throw std::invalid_argument("conv2d: input must be (channels, height, width)");
        if (spec_.filters == 0) throw std::invalid_argument("conv2d: filters must be positive");
        if (spec_.filter_size == 0 || spec_.filter_size % 2 == 0)
            throw std::invalid_argument("conv2d: filter size must be odd and positive");
        c_ = in_shape_[0];
        h_ = in_shape_[1];
        w_ = in_shape_[2];
        k_ = spec_.filter_size;
        std::size_t fan_in = c_ * k_ * k_;
        std::size_t fan_out = spec_.filters * k_ * k_;
        double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Tensor weights(Shape{spec_.filters, c_, k_, k_});
        for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = rng.uniform(-a, a);
        params_.push_back(std::move(weights));
        params_.push_back(Tensor(Shape{spec_.filters}));
    }

    Shape output_shape() const override { return Shape{spec_.filters, h_, w_}; }

    Tensor forward(const Tensor& in, bool, Rng*, LayerCache* cache) const override {
        save_input(in, cache);
        const Tensor& weights = params_[0];
        const Tensor& bias = params_[1];
        Tensor out(output_shape());
        long pad = static_cast<long>(k_ / 2);
        for (std::size_t f = 0; f < spec_.filters; ++f)
            for (std::size_t y = 0; y < h_; ++y)
                for (std::size_t x = 0; x < w_; ++x) {
                    double acc = bias[f];
                    for (std::size_t c = 0; c < c_; ++c)
                        for (std::size_t ky = 0; ky < k_; ++ky) {
                            long sy = static_cast<long>(y) + static_cast<long>(ky) - pad;
                            if (sy < 0 || sy >= static_cast<long>(h_)) continue;
                            for (std::size_t kx = 0; kx < k_; ++kx) {
                                long sx = static_cast<long>(x) + static_cast<long>(kx) - pad;
                                if (sx < 0 || sx >= static_cast<long>(w_)) continue;
                                acc += weights[((f * c_ + c) * k_ + ky) * k_ + kx] *
                                       in[(c * h_ + static_cast<std::size_t>(sy)) * w_ +
                                          static_cast<std::size_t>(sx)];
                            }
                        }
                    out[(f * h_ + y) * w_ + x] = acc;
                }
        return out;
    }

    Tensor backward(const Tensor& grad_out, const LayerCache& cache,
                    std::vector<Tensor>* param_grads) const override {
        const Tensor& weights = params_[0];
        const Tensor& in = cache.input;
        Tensor grad_in(in.shape());
        long pad = static_cast<long>(k_ / 2);
        for (std::size_t f = 0; f < spec_.filters; ++f)
            for (std::size_t y = 0; y < h_; ++y)
                for (std::size_t x = 0; x < w_; ++x) {
                    double g = grad_out[(f * h_ + y) * w_ + x];
                    if (param_grads) (*param_grads)[1][f] += g;
                    for (std::size_t c = 0; c < c_; ++c)
                        for (std::size_t ky = 0; ky < k_; ++ky) {
                            long sy = static_cast<long>(y) + static_cast<long>(ky) - pad;
                            if (sy < 0 || sy >= static_cast<long>(h_)) continue;
                            for (std::size_t kx = 0; kx < k_; ++kx) {
                                long sx = static_cast<long>(x) + static_cast<long>(kx) - pad;
                                if (sx < 0 || sx >= static_cast<long>(w_)) continue;
                                std::size_t wi = ((f * c_ + c) * k_ + ky) * k_ + kx;
                                std::size_t ii = (c * h_ + static_cast<std::size_t>(sy)) * w_ +
                                                 static_cast<std::size_t>(sx);
                                grad_in[ii] += g * weights[wi];
                                if (param_grads) (*param_grads)[0][wi] += g * in[ii];
                            }
                        }
                }
        return grad_in;
    }

private:
    std::size_t c_, h_, w_, k_;
};

class ReluLayer : public Layer {
public:
    ReluLayer(LayerSpec spec, Shape in_shape) : Layer(spec, std::move(in_shape)) {}

    Shape output_shape() const override { return in_shape_; }

    Tensor forward(const Tensor& in, bool, Rng*, LayerCache* cache) const override {
        save_input(in, cache);
        Tensor out = in;
        for (double& v : out.data()) v = std::max(v, 0.0);
        return out;
    }

    Tensor backward(const Tensor& grad_out, const LayerCache& cache,
                    std::vector<Tensor>*) const override {
        Tensor grad_in = grad_out;
        for (std::size_t i = 0; i < grad_in.size(); ++i)
            if (cache.input[i] <= 0.0) grad_in[i] = 0.0;
        return grad_in;
    }
};

// 2x2 max pooling, stride 2; odd trailing rows/columns are dropped.
class MaxPoolLayer : public Layer {
public:
    MaxPoolLayer(LayerSpec spec, Shape in_shape) : Layer(spec, std::move(in_shape)) {
        if (in_shape_.size() != 3)
            throw std::invalid_argument("maxpool2x2: input must be (channels, height, width)");
        c_ = in_shape_[0];
        h_ = in_shape_[1];
        w_ = in_shape_[2];
        oh_ = h_ / 2;
        ow_ = w_ / 2;
        if (oh_ == 0 || ow_ == 0) throw std::invalid_argument("maxpool2x2: input too small");
    }

    Shape output_shape() const override { return Shape{c_, oh_, ow_}; }

    Tensor forward(const Tensor& in, bool, Rng*, LayerCache* cache) const override {
        Tensor out(output_shape());
        std::vector<std::size_t> idx(out.size());
        for (std::size_t c = 0; c < c_; ++c)
            for (std::size_t y = 0; y < oh_; ++y)
                for (std::size_t x = 0; x < ow_; ++x) {
                    std::size_t best = (c * h_ + 2 * y) * w_ + 2 * x;
                    double bv = in[best];
                    for (std::size_t dy = 0; dy < 2; ++dy)
                        for (std::size_t dx = 0; dx < 2; ++dx) {
                            std::size_t i = (c * h_ + 2 * y + dy) * w_ + 2 * x + dx;
                            if (in[i] > bv) {
                                bv = in[i];
                                best = i;
                            }
                        }
                    std::size_t o = (c * oh_ + y) * ow_ + x;
                    out[o] = bv;
                    idx[o] = best;
                }
        if (cache) cache->indices = std::move(idx);
        return out;
    }

    Tensor backward(const Tensor& grad_out, const LayerCache& cache,
                    std::vector<Tensor>*) const override {
        Tensor grad_in(in_shape_);
        for (std::size_t o = 0; o < grad_out.size(); ++o)
            grad_in[cache.indices[o]] += grad_out[o];
        return grad_in;
    }

private:
    std::size_t c_, h_, w_, oh_, ow_;
};

// Cross-channel response normalization:
//   y_c = x_c / (k + alpha * sum_{c' in window(c)} x_{c'}^2)^beta
class ResponseNormLayer : public Layer {
public:
    ResponseNormLayer(LayerSpec spec, Shape in_shape) : Layer(spec, std::move(in_shape)) {
        if (in_shape_.size() != 3)
            throw std::invalid_argument("response-norm: input must be (channels, height, width)");
        c_ = in_shape_[0];
        hw_ = in_shape_[1] * in_shape_[2];
    }

    Shape output_shape() const override { return in_shape_; }

    Tensor forward(const Tensor& in, bool, Rng*, LayerCache* cache) const override {
        save_input(in, cache);
        Tensor scale(in.shape());  // s_c = k + alpha * window sum of squares
        long half = static_cast<long>(kRespNormWindow / 2);
        for (std::size_t p = 0; p < hw_; ++p)
            for (std::size_t c = 0; c < c_; ++c) {
                double ss = 0.0;
                for (long d = -half; d <= half; ++d) {
                    long cc = static_cast<long>(c) + d;
                    if (cc < 0 || cc >= static_cast<long>(c_)) continue;
                    double v = in[static_cast<std::size_t>(cc) * hw_ + p];
                    ss += v * v;
                }
                scale[c * hw_ + p] = kRespNormK + kRespNormAlpha * ss;
            }
        Tensor out(in.shape());
        for (std::size_t i = 0; i < in.size(); ++i)
            out[i] = in[i] * std::pow(scale[i], -kRespNormBeta);
        if (cache) cache->aux = std::move(scale);
        return out;
    }

    Tensor backward(const Tensor& grad_out, const LayerCache& cache,
                    std::vector<Tensor>*) const override {
        const Tensor& in = cache.input;
        const Tensor& scale = cache.aux;
        Tensor grad_in(in.shape());
        long half = static_cast<long>(kRespNormWindow / 2);
        for (std::size_t p = 0; p < hw_; ++p)
            for (std::size_t m = 0; m < c_; ++m) {
                std::size_t mi = m * hw_ + p;
                double acc = grad_out[mi] * std::pow(scale[mi], -kRespNormBeta);
                // channels c whose window contains m
                double cross = 0.0;
                for (long d = -half; d <= half; ++d) {
                    long c = static_cast<long>(m) + d;
                    if (c < 0 || c >= static_cast<long>(c_)) continue;
                    std::size_t ci = static_cast<std::size_t>(c) * hw_ + p;
                    cross += grad_out[ci] * in[ci] * std::pow(scale[ci], -kRespNormBeta - 1.0);
                }
                grad_in[mi] = acc - 2.0 * kRespNormAlpha * kRespNormBeta * in[mi] * cross;
            }
        return grad_in;
    }

private:
    std::size_t c_, hw_;
};

// Inverted dropout: train mode masks and scales by 1/(1-p); inference is
// the identity.
class DropoutLayer : public Layer {
public:
    DropoutLayer(LayerSpec spec, Shape in_shape) : Layer(spec, std::move(in_shape)) {
        if (!(spec_.dropout_p > 0.0 && spec_.dropout_p < 1.0))
            throw std::invalid_argument("dropout: p must be in (0,1)");
    }

    Shape output_shape() const override { return in_shape_; }

    Tensor forward(const Tensor& in, bool train_mode, Rng* dropout_rng,
                   LayerCache* cache) const override {
        if (!train_mode) {
            if (cache) cache->aux = Tensor();
            return in;
        }
        if (!dropout_rng)
            throw std::invalid_argument("dropout: train-mode forward needs an rng");
        double keep = 1.0 - spec_.dropout_p;
        Tensor mask(in.shape());
        for (double& v : mask.data()) v = (dropout_rng->next_double() < keep) ? 1.0 / keep : 0.0;
        Tensor out(in.shape());
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * mask[i];
        if (cache) cache->aux = std::move(mask);
        return out;
    }

    Tensor backward(const Tensor& grad_out, const LayerCache& cache,
                    std::vector<Tensor>*) const override {
        if (cache.aux.empty()) return grad_out;  // inference-mode forward
        Tensor grad_in(grad_out.shape());
        for (std::size_t i = 0; i < grad_in.size(); ++i)
            grad_in[i] = grad_out[i] * cache.aux[i];
        return grad_in;
    }
};

class SoftmaxLayer : public Layer {
public:
    SoftmaxLayer(LayerSpec spec, Shape in_shape) : Layer(spec, std::move(in_shape)) {
         if (in_shape_.size() != 1)
            throw std::invalid_argument("softmax: input must be a vector of logits");
    }

    Shape output_shape() const override { return in_shape_; }

    Tensor forward(const Tensor& in, bool, Rng*, LayerCache* cache) const override {
        save_input(in, cache);
        double mx = *std::max_element(in.data().begin(), in.data().end());
        Tensor out(in.shape());
        double sum = 0.0;
        for (std::size_t i = 0; i < in.size(); ++i) {
            out[i] = std::exp(in[i] - mx);
            sum += out[i];
        }
        for (double& v : out.data()) v = std::max(v / sum, kProbFloor);
        return out;
    }

    // The network backpropagates losses from the logits directly; a generic
    // softmax Jacobian is still provided for completeness.
    Tensor backward(const Tensor& grad_out, const LayerCache& cache,
                    std::vector<Tensor>*) const override {
        Tensor p = const_cast<SoftmaxLayer*>(this)->forward(cache.input, false, nullptr, nullptr);
        double dot = grad_out.dot(p);
        Tensor grad_in(p.shape());
        for (std::size_t i = 0; i < p.size(); ++i) grad_in[i] = p[i] * (grad_out[i] - dot);
        return grad_in;
    }
};

}  // namespace

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& in_shape, Rng& init_rng) {
    switch (spec.kind) {
        case LayerKind::Dense: return std::make_unique<DenseLayer>(spec, in_shape, init_rng);
        case LayerKind::Conv2d: return std::make_unique<Conv2dLayer>(spec, in_shape, init_rng);
        case LayerKind::Relu: return std::make_unique<ReluLayer>(spec, in_shape);
        case LayerKind::MaxPool2x2: return std::make_unique<MaxPoolLayer>(spec, in_shape);
        case LayerKind::ResponseNorm: return std::make_unique<ResponseNormLayer>(spec, in_shape);
        case LayerKind::Dropout: return std::make_unique<DropoutLayer>(spec, in_shape);
        case LayerKind::Softmax: return std::make_unique<SoftmaxLayer>(spec, in_shape);
    }
    throw std::logic_error("unknown LayerKind");
}

}  // namespace advbench
