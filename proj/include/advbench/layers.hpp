#ifndef ADVBENCH_LAYERS_HPP
#define ADVBENCH_LAYERS_HPP

#include <memory>
#include <string>
#include <vector>

#include "advbench/rng.hpp"
#include "advbench/tensor.hpp"

namespace advbench {

enum class LayerKind { Dense, Conv2d, Relu, MaxPool2x2, ResponseNorm, Dropout, Softmax };

std::string layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

struct LayerSpec {
    LayerKind kind = LayerKind::Relu;
    std::size_t units = 0;        // dense
    std::size_t filters = 0;      // conv2d
    std::size_t filter_size = 0;  // conv2d, odd
    double dropout_p = 0.5;       // dropout, in (0,1)

    static LayerSpec dense(std::size_t units);
    static LayerSpec conv2d(std::size_t filters, std::size_t filter_size);
    static LayerSpec relu();
    static LayerSpec maxpool2x2();
    static LayerSpec response_norm();
    static LayerSpec dropout(double p);
    static LayerSpec softmax();
};

// Per-sample forward state a backward pass needs.
struct LayerCache {
    Tensor input;
    Tensor aux;                        // dropout mask, response-norm scale, ...
    std::vector<std::size_t> indices;  // maxpool argmax positions
};

class Layer {
public:
    Layer(LayerSpec spec, Shape in_shape) : spec_(spec), in_shape_(std::move(in_shape)) {}
    virtual ~Layer() = default;

    const LayerSpec& spec() const { return spec_; }
    const Shape& input_shape() const { return in_shape_; }
    virtual Shape output_shape() const = 0;

    // cache may be null when no backward pass will follow.
    virtual Tensor forward(const Tensor& in, bool train_mode, Rng* dropout_rng,
                           LayerCache* cache) const = 0;

    // grad_out is d(loss)/d(output); returns d(loss)/d(input). When
    // param_grads is non-null it receives one gradient tensor per parameter
    // tensor (accumulated: callers pre-size and the layer adds in place).
    virtual Tensor backward(const Tensor& grad_out, const LayerCache& cache,
                            std::vector<Tensor>* param_grads) const = 0;

    std::vector<Tensor>& params() { return params_; }
    const std::vector<Tensor>& params() const { return params_; }

protected:
    LayerSpec spec_;
    Shape in_shape_;
    std::vector<Tensor> params_;
};

// Builds a layer, initializing weights uniform in [-a, a] with
// a = sqrt(6 / (fan_in + fan_out)) and zero biases.
std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& in_shape, Rng& init_rng);

// Response-norm fixed constants (window is cross-channel).
constexpr double kRespNormK = 1.0;
constexpr double kRespNormAlpha = 1e-4;
constexpr double kRespNormBeta = 0.75;
constexpr std::size_t kRespNormWindow = 5;

constexpr double kProbFloor = 1e-12;

}  // namespace advbench

#endif
