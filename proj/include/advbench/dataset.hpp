#ifndef ADVBENCH_DATASET_HPP
#define ADVBENCH_DATASET_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "advbench/tensor.hpp"

namespace advbench {

struct Sample {
    Tensor image;  // pixels in [0,1]
    int label = 0; // in [0, K)
};

struct Dataset {
    std::vector<Sample> samples;
    int num_classes = 0;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }

    void check() const {
        if (num_classes <= 0) throw std::invalid_argument("Dataset: num_classes must be positive");
        for (const auto& s : samples) {
            if (s.label < 0 || s.label >= num_classes)
                throw std::invalid_argument("Dataset: label out of range");
            if (!samples.empty() && !(s.image.shape() == samples.front().image.shape()))
                throw std::invalid_argument("Dataset: images must share one shape");
        }
    }
};

}  // namespace advbench

#endif
