#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "advbench/pipeline.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    bool force = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config JSON (default: desk preset)");
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_flag("--force", opts.force, "rebuild artifacts even if present");
}

advbench::ExperimentConfig resolve_config(const CommonOpts& opts) {
    advbench::ExperimentConfig cfg = opts.config_path.empty()
                                         ? advbench::desk_preset()
                                         : advbench::load_experiment_config(opts.config_path);
    if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
    return cfg;
}

int run_stages(const CommonOpts& opts, advbench::Stage first, advbench::Stage last) {
    try {
        advbench::ExperimentConfig cfg = resolve_config(opts);
        std::string dir = advbench::run_pipeline(cfg, first, last, opts.force);
        std::cout << dir << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adversarial-robustness workbench: train, attack, ensemble, evaluate"};
    app.require_subcommand(1);

    using advbench::Stage;
    struct SubDef {
        const char* name;
        const char* help;
        Stage first, last;
    };
    const SubDef defs[] = {
        {"train-ga", "train the adversary-generating network", Stage::TrainGa, Stage::TrainGa},
        {"gen-adv", "tune FGS and generate the three adversary sets", Stage::GenAdv, Stage::GenAdv},
        {"train-baselines", "train naive CNN* and the pure ensemble", Stage::TrainBaselines,
         Stage::TrainBaselines},
        {"build-ensemble", "confusion matrix, subsets, specialist training", Stage::BuildEnsemble,
         Stage::BuildEnsemble},
        {"evaluate", "threshold sweeps, densities, rejection curves (CSV)", Stage::Evaluate,
         Stage::Evaluate},
        {"report", "manifest and SVG charts", Stage::Report, Stage::Report},
        {"run-all", "run every stage in order", Stage::TrainGa, Stage::Report},
    };

    CommonOpts opts;
    int stage_override = 0;
    for (const SubDef& d : defs) {
        CLI::App* cmd = app.add_subcommand(d.name, d.help);
        add_common(cmd, opts);
        if (std::string(d.name) == "run-all")
            cmd->add_option("--stage", stage_override, "run only this stage number (1-6)");
        cmd->callback([&opts, &stage_override, d]() {
            Stage first = d.first, last = d.last;
            if (std::string(d.name) == "run-all" && stage_override != 0) {
                if (stage_override < 1 || stage_override > 6)
                    throw CLI::ValidationError("--stage must be in 1..6");
                first = last = static_cast<Stage>(stage_override);
            }
            std::exit(run_stages(opts, first, last));
        });
    }

    CLI11_PARSE(app, argc, argv);
    return 0;
}
