#include "advbench/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "advbench/rng.hpp"

namespace advbench {

SyntheticData make_synthetic(const SyntheticSpec& spec) {
    if (spec.num_classes <= 1) throw std::invalid_argument("synthetic: need at least 2 classes");
    if (spec.dim <= 0) throw std::invalid_argument("synthetic: dim must be positive");
    if (spec.samples_per_class <= 0)
        throw std::invalid_argument("synthetic: samples_per_class must be positive");
    if (spec.separation <= 0.0) throw std::invalid_argument("synthetic: separation must be positive");

    Rng rng = Rng::for_stream(spec.seed, Rng::kData);
    const std::size_t dim = static_cast<std::size_t>(spec.dim);

    // Class centers: uniform in the inner box, resampled until pairwise
    // distances reach the separation (best candidate kept after 200 tries).
    std::vector<std::vector<double>> centers;
    for (int c = 0; c < spec.num_classes; ++c) {
        std::vector<double> best;
        double best_min = -1.0;
        for (int attempt = 0; attempt < 200; ++attempt) {
            std::vector<double> cand(dim);
            for (double& v : cand) v = rng.uniform(0.2, 0.8);
            double min_d = 1e300;
            for (const auto& other : centers) {
                double ss = 0.0;
                for (std::size_t i = 0; i < dim; ++i) {
                    double d = cand[i] - other[i];
                    ss += d * d;
                }
                min_d = std::min(min_d, std::sqrt(ss));
            }
            if (min_d > best_min) {
                best_min = min_d;
                best = std::move(cand);
            }
            if (centers.empty() || best_min >= spec.separation) break;
        }
        centers.push_back(std::move(best));
    }

    SyntheticData data;
    data.train.num_classes = spec.num_classes;
    data.test.num_classes = spec.num_classes;
    int train_per_class = (spec.samples_per_class * 4) / 5;  // 80/20 split

    for (int c = 0; c < spec.num_classes; ++c) {
        for (int i = 0; i < spec.samples_per_class; ++i) {
            Tensor x(Shape{dim});
            for (std::size_t d = 0; d < dim; ++d) {
                double v = centers[static_cast<std::size_t>(c)][d] +
                           spec.noise * rng.next_gaussian();
                x[d] = std::min(1.0, std::max(0.0, v));
            }
            Sample s{std::move(x), c};
            if (i < train_per_class)
                data.train.samples.push_back(std::move(s));
            else
                data.test.samples.push_back(std::move(s));
        }
    }
    return data;
}

}  // namespace advbench
