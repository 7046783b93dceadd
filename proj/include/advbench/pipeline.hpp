#ifndef ADVBENCH_PIPELINE_HPP
#define ADVBENCH_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "advbench/attacks.hpp"
#include "advbench/dataset.hpp"
#include "advbench/ensemble.hpp"
#include "advbench/evaluation.hpp"
#include "advbench/network.hpp"
#include "advbench/synthetic.hpp"
#include "advbench/train.hpp"

namespace advbench {

struct IdxSourceConfig {
    std::string train_images, train_labels, test_images, test_labels;
    int downsample_factor = 1;
    std::size_t train_limit = 0;  // 0 = all
    std::size_t test_limit = 0;
};

struct ExperimentConfig {
    // dataset source: exactly one of the two is set
    std::optional<SyntheticSpec> synthetic;
    std::optional<IdxSourceConfig> idx;

    std::string network_id = "desk";  // desk | deep-mnist | deep-cifar
    TrainConfig train;

    AttackConfig attacks;
    bool tune_fgs = true;  // grid-search epsilon to the target fool rate

    double ensemble_coverage = 0.8;
    int confusion_per_class = 50;
    std::uint64_t confusion_seed = 99;

    std::vector<double> tau_grid;

    std::uint64_t seed_ga = 1;
    std::uint64_t seed_naive = 2;
    std::vector<std::uint64_t> seeds_pure{11, 12, 13, 14, 15};
    std::uint64_t seed_specialist_base = 100;

    std::string output_dir = "run";
};

// Strict parse: unknown keys are rejected. load_experiment_config also
// checks that referenced paths exist.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

// The built-in desk-scale preset (synthetic K=4, nine ensemble members).
ExperimentConfig desk_preset();

// Named architecture for a given input shape and class count.
NetworkConfig network_for_id(const std::string& id, const Shape& input_shape, int num_classes,
                             std::uint64_t seed);

enum class Stage {
    TrainGa = 1,
    GenAdv = 2,
    TrainBaselines = 3,
    BuildEnsemble = 4,
    Evaluate = 5,
    Report = 6,
};

// Runs stages [first, last]. Completed stages whose artifacts already exist
// under the (hash-matched) output directory are skipped unless force is set.
// Returns the output directory. Stage failures throw with the stage name.
std::string run_pipeline(const ExperimentConfig& cfg, Stage first = Stage::TrainGa,
                         Stage last = Stage::Report, bool force = false);

}  // namespace advbench

#endif
