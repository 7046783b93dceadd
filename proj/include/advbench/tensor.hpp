#ifndef ADVBENCH_TENSOR_HPP
#define ADVBENCH_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace advbench {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + ")";
}

// Dense row-major array of doubles. The one value type for images,
// activations, gradients and probability vectors.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape, double fill = 0.0)
        : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

    Tensor(Shape shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (shape_numel(shape_) != data_.size())
            throw std::invalid_argument("Tensor: shape " + shape_str(shape_) +
                                        " does not match data length " +
                                        std::to_string(data_.size()));
    }

    static Tensor vector(std::vector<double> v) {
        Shape s{v.size()};
        return Tensor(std::move(s), std::move(v));
    }

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    Tensor& operator+=(const Tensor& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

    Tensor& operator-=(const Tensor& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }

    Tensor& operator*=(double c) {
        for (double& v : data_) v *= c;
        return *this;
    }

    double dot(const Tensor& o) const {
        require_same_shape(o);
        return std::inner_product(data_.begin(), data_.end(), o.data_.begin(), 0.0);
    }

    double squared_norm() const { return dot(*this); }

    std::size_t argmax() const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < data_.size(); ++i)
            if (data_[i] > data_[best]) best = i;  // ties keep the lowest index
        return best;
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void require_same_shape(const Tensor& o) const {
        if (shape_ != o.shape_)
            throw std::invalid_argument("Tensor shape mismatch: " + shape_str(shape_) +
                                        " vs " + shape_str(o.shape_));
    }

private:
    Shape shape_;
    std::vector<double> data_;
};

inline Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
inline Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
inline Tensor operator*(Tensor a, double c) { return a *= c; }
inline Tensor operator*(double c, Tensor a) { return a *= c; }

}  // namespace advbench

#endif
