#ifndef ADVBENCH_SYNTHETIC_HPP
#define ADVBENCH_SYNTHETIC_HPP

#include <cstdint>

#include "advbench/dataset.hpp"

namespace advbench {

// Gaussian-blob classification problem in [0,1]^dim.
struct SyntheticSpec {
    int num_classes = 4;
    int samples_per_class = 150;
    int dim = 16;
    double separation = 0.5;   // distance scale between class centers
    double noise = 0.12;       // per-component Gaussian noise
    std::uint64_t seed = 7;
};

struct SyntheticData {
    Dataset train;
    Dataset test;  // 80/20 split
};

// Deterministic under spec.seed: class centers drawn once, then samples as
// center + noise, clipped to [0,1].
SyntheticData make_synthetic(const SyntheticSpec& spec);

}  // namespace advbench

#endif
