#ifndef ADVBENCH_IDX_HPP
#define ADVBENCH_IDX_HPP

#include <string>

#include "advbench/dataset.hpp"

namespace advbench {

// IDX container format: big-endian 32-bit magic (2051 images, 2049 labels),
// big-endian 32-bit dimension sizes, unsigned-byte payload. Pixels are
// scaled to [0,1]. Image shape is (1, rows, cols).
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Average-pools each image down by an integer factor (28x28 -> 14x14 with
// factor 2) and optionally truncates to the first max_samples entries.
Dataset downsample(const Dataset& data, int factor, std::size_t max_samples = 0);

}  // namespace advbench

#endif
