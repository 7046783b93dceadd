#include "advbench/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "advbench/adversary_io.hpp"
#include "advbench/idx.hpp"
#include "advbench/model_io.hpp"

namespace advbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& context) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("config: unknown key \"" + it.key() + "\" in " + context);
}

template <typename T>
void maybe_get(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void require_file(const std::string& path, const std::string& what) {
    if (!fs::exists(path))
        throw std::invalid_argument("config: " + what + " path does not exist: " + path);
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
    reject_unknown_keys(j, {"dataset", "network", "train", "attacks", "ensemble", "tau_grid",
                            "seeds", "output_dir"},
                        "top level");
    ExperimentConfig cfg = desk_preset();
    cfg.tau_grid = default_tau_grid();

    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        std::string type = d.at("type").get<std::string>();
        if (type == "synthetic") {
            reject_unknown_keys(d, {"type", "num_classes", "samples_per_class", "dim",
                                    "separation", "noise", "seed"},
                                "dataset");
            SyntheticSpec s;
            maybe_get(d, "num_classes", s.num_classes);
            maybe_get(d, "samples_per_class", s.samples_per_class);
            maybe_get(d, "dim", s.dim);
            maybe_get(d, "separation", s.separation);
            maybe_get(d, "noise", s.noise);
            maybe_get(d, "seed", s.seed);
            cfg.synthetic = s;
            cfg.idx.reset();
        } else if (type == "idx") {
            reject_unknown_keys(d, {"type", "train_images", "train_labels", "test_images",
                                    "test_labels", "downsample_factor", "train_limit",
                                    "test_limit"},
                                "dataset");
            IdxSourceConfig s;
            s.train_images = d.at("train_images").get<std::string>();
            s.train_labels = d.at("train_labels").get<std::string>();
            s.test_images = d.at("test_images").get<std::string>();
            s.test_labels = d.at("test_labels").get<std::string>();
            maybe_get(d, "downsample_factor", s.downsample_factor);
            maybe_get(d, "train_limit", s.train_limit);
            maybe_get(d, "test_limit", s.test_limit);
            cfg.idx = s;
            cfg.synthetic.reset();
        } else {
            throw std::invalid_argument("config: unknown dataset type \"" + type + "\"");
        }
    }

    maybe_get(j, "network", cfg.network_id);

    if (j.contains("train")) {
        const json& t = j.at("train");
        reject_unknown_keys(t, {"epochs", "batch_size", "learning_rate", "momentum",
                                "decay_epochs", "decay_factor", "seed"},
                            "train");
        maybe_get(t, "epochs", cfg.train.epochs);
        maybe_get(t, "batch_size", cfg.train.batch_size);
        maybe_get(t, "learning_rate", cfg.train.learning_rate);
        maybe_get(t, "momentum", cfg.train.momentum);
        maybe_get(t, "decay_epochs", cfg.train.decay_epochs);
        maybe_get(t, "decay_factor", cfg.train.decay_factor);
    }

    if (j.contains("attacks")) {
        const json& a = j.at("attacks");
        reject_unknown_keys(a, {"fgs_epsilon", "target_fool_rate", "deepfool", "boxmin"},
                            "attacks");
        if (a.contains("fgs_epsilon")) {
            cfg.attacks.fgs_epsilon = a.at("fgs_epsilon").get<double>();
            cfg.tune_fgs = false;
        }
        maybe_get(a, "target_fool_rate", cfg.attacks.target_fool_rate);
        if (a.contains("deepfool")) {
            const json& df = a.at("deepfool");
            reject_unknown_keys(df, {"max_iterations", "overshoot"}, "attacks.deepfool");
            maybe_get(df, "max_iterations", cfg.attacks.deepfool.max_iterations);
            maybe_get(df, "overshoot", cfg.attacks.deepfool.overshoot);
        }
        if (a.contains("boxmin")) {
            const json& bm = a.at("boxmin");
            reject_unknown_keys(bm, {"penalty_lo", "penalty_hi", "bisection_steps",
                                     "descent_iterations", "step_size"},
                                "attacks.boxmin");
            maybe_get(bm, "penalty_lo", cfg.attacks.boxmin.penalty_lo);
            maybe_get(bm, "penalty_hi", cfg.attacks.boxmin.penalty_hi);
            maybe_get(bm, "bisection_steps", cfg.attacks.boxmin.bisection_steps);
            maybe_get(bm, "descent_iterations", cfg.attacks.boxmin.descent_iterations);
            maybe_get(bm, "step_size", cfg.attacks.boxmin.step_size);
        }
    }

    if (j.contains("ensemble")) {
        const json& e = j.at("ensemble");
        reject_unknown_keys(e, {"coverage", "per_class_count", "confusion_seed"}, "ensemble");
        maybe_get(e, "coverage", cfg.ensemble_coverage);
        maybe_get(e, "per_class_count", cfg.confusion_per_class);
        maybe_get(e, "confusion_seed", cfg.confusion_seed);
    }

    if (j.contains("tau_grid")) cfg.tau_grid = j.at("tau_grid").get<std::vector<double>>();

    if (j.contains("seeds")) {
        const json& s = j.at("seeds");
        reject_unknown_keys(s, {"ga", "naive", "pure", "specialist_base"}, "seeds");
        maybe_get(s, "ga", cfg.seed_ga);
        maybe_get(s, "naive", cfg.seed_naive);
        maybe_get(s, "pure", cfg.seeds_pure);
        maybe_get(s, "specialist_base", cfg.seed_specialist_base);
    }
    if (cfg.seed_naive == cfg.seed_ga)
        throw std::invalid_argument("config: naive seed must differ from ga seed");

    maybe_get(j, "output_dir", cfg.output_dir);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    json j;
    in >> j;
    ExperimentConfig cfg = parse_experiment_config(j);
    if (cfg.idx) {
        require_file(cfg.idx->train_images, "train images");
        require_file(cfg.idx->train_labels, "train labels");
        require_file(cfg.idx->test_images, "test images");
        require_file(cfg.idx->test_labels, "test labels");
    }
    return cfg;
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
    json j;
    if (cfg.synthetic) {
        const SyntheticSpec& s = *cfg.synthetic;
        j["dataset"] = {{"type", "synthetic"},
                        {"num_classes", s.num_classes},
                        {"samples_per_class", s.samples_per_class},
                        {"dim", s.dim},
                        {"separation", s.separation},
                        {"noise", s.noise},
                        {"seed", s.seed}};
    } else if (cfg.idx) {
        const IdxSourceConfig& s = *cfg.idx;
        j["dataset"] = {{"type", "idx"},
                        {"train_images", s.train_images},
                        {"train_labels", s.train_labels},
                        {"test_images", s.test_images},
                        {"test_labels", s.test_labels},
                        {"downsample_factor", s.downsample_factor},
                        {"train_limit", s.train_limit},
                        {"test_limit", s.test_limit}};
    }
    j["network"] = cfg.network_id;
    j["train"] = {{"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"learning_rate", cfg.train.learning_rate},
                  {"momentum", cfg.train.momentum},
                  {"decay_epochs", cfg.train.decay_epochs},
                  {"decay_factor", cfg.train.decay_factor}};
    json attacks = {{"target_fool_rate", cfg.attacks.target_fool_rate},
                    {"deepfool",
                     {{"max_iterations", cfg.attacks.deepfool.max_iterations},
                      {"overshoot", cfg.attacks.deepfool.overshoot}}},
                    {"boxmin",
                     {{"penalty_lo", cfg.attacks.boxmin.penalty_lo},
                      {"penalty_hi", cfg.attacks.boxmin.penalty_hi},
                      {"bisection_steps", cfg.attacks.boxmin.bisection_steps},
                      {"descent_iterations", cfg.attacks.boxmin.descent_iterations},
                      {"step_size", cfg.attacks.boxmin.step_size}}}};
    if (!cfg.tune_fgs) attacks["fgs_epsilon"] = cfg.attacks.fgs_epsilon;
    j["attacks"] = std::move(attacks);
    j["ensemble"] = {{"coverage", cfg.ensemble_coverage},
                     {"per_class_count", cfg.confusion_per_class},
                     {"confusion_seed", cfg.confusion_seed}};
    j["tau_grid"] = cfg.tau_grid;
    j["seeds"] = {{"ga", cfg.seed_ga},
                  {"naive", cfg.seed_naive},
                  {"pure", cfg.seeds_pure},
                  {"specialist_base", cfg.seed_specialist_base}};
    j["output_dir"] = cfg.output_dir;
    return j;
}

ExperimentConfig desk_preset() {
    ExperimentConfig cfg;
    cfg.synthetic = SyntheticSpec{};
    cfg.network_id = "desk";
    cfg.train.epochs = 40;
    cfg.train.batch_size = 32;
    cfg.train.learning_rate = 0.1;
    cfg.train.momentum = 0.9;
    cfg.train.decay_epochs = {20, 30};
    cfg.train.decay_factor = 10.0;
    cfg.attacks.target_fool_rate = 0.99;
    cfg.confusion_per_class = 60;
    cfg.tau_grid = default_tau_grid();
    cfg.output_dir = "run";
    return cfg;
}

NetworkConfig network_for_id(const std::string& id, const Shape& input_shape, int num_classes,
                             std::uint64_t seed) {
    NetworkConfig cfg;
    cfg.input_shape = input_shape;
    cfg.num_classes = num_classes;
    cfg.seed = seed;
    std::size_t k = static_cast<std::size_t>(num_classes);
    if (id == "desk") {
        cfg.layers = {LayerSpec::dense(32), LayerSpec::relu(), LayerSpec::dropout(0.5),
                      LayerSpec::dense(k), LayerSpec::softmax()};
    } else if (id == "desk-conv") {
        cfg.layers = {LayerSpec::conv2d(8, 3),  LayerSpec::relu(),
                      LayerSpec::maxpool2x2(),  LayerSpec::dropout(0.5),
                      LayerSpec::dense(k),      LayerSpec::softmax()};
    } else if (id == "deep-mnist" || id == "deep-cifar") {
        cfg.layers = {LayerSpec::conv2d(32, 5), LayerSpec::relu(), LayerSpec::response_norm(),
                      LayerSpec::maxpool2x2(),
                      LayerSpec::conv2d(32, 5), LayerSpec::relu(), LayerSpec::response_norm(),
                      LayerSpec::maxpool2x2(),
                      LayerSpec::conv2d(64, 5), LayerSpec::relu(), LayerSpec::response_norm(),
                      LayerSpec::maxpool2x2(),
                      LayerSpec::dropout(0.5), LayerSpec::dense(k), LayerSpec::softmax()};
    } else {
        throw std::invalid_argument("unknown network id: " + id);
    }
    return cfg;
}

namespace {

struct PipelineContext {
    ExperimentConfig cfg;
    std::string dir;
    Dataset train_set;
    Dataset test_set;
    Shape input_shape;
    int num_classes = 0;

    std::string path(const std::string& name) const { return dir + "/" + name; }
};

PipelineContext make_context(const ExperimentConfig& cfg) {
    PipelineContext ctx;
    ctx.cfg = cfg;
    ctx.dir = cfg.output_dir;
    if (cfg.synthetic) {
        SyntheticData data = make_synthetic(*cfg.synthetic);
        ctx.train_set = std::move(data.train);
        ctx.test_set = std::move(data.test);
    } else if (cfg.idx) {
        const IdxSourceConfig& s = *cfg.idx;
        Dataset train = load_idx(s.train_images, s.train_labels);
        Dataset test = load_idx(s.test_images, s.test_labels);
        if (s.downsample_factor > 1 || s.train_limit || s.test_limit) {
            train = downsample(train, s.downsample_factor, s.train_limit);
            test = downsample(test, s.downsample_factor, s.test_limit);
        }
        ctx.train_set = std::move(train);
        ctx.test_set = std::move(test);
    } else {
        throw std::invalid_argument("config: no dataset source");
    }
    ctx.train_set.check();
    ctx.test_set.check();
    ctx.input_shape = ctx.train_set.samples.front().image.shape();
    ctx.num_classes = ctx.train_set.num_classes;
    return ctx;
}

bool all_exist(const std::vector<std::string>& paths) {
    return std::all_of(paths.begin(), paths.end(),
                       [](const std::string& p) { return fs::exists(p); });
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

TrainConfig with_seed(TrainConfig cfg, std::uint64_t seed) {
    cfg.seed = seed;
    return cfg;
}

// ---- stage 1: GA network ----

void stage_train_ga(PipelineContext& ctx, bool force) {
    std::string model = ctx.path("ga.json");
    if (!force && all_exist({model})) {
        std::cerr << "[train-ga] artifacts present, skipping\n";
        return;
    }
    NetworkConfig ncfg =
        network_for_id(ctx.cfg.network_id, ctx.input_shape, ctx.num_classes, ctx.cfg.seed_ga);
    Network net(ncfg);
    TrainLog log = train(net, ctx.train_set, with_seed(ctx.cfg.train, ctx.cfg.seed_ga));
    save_network(net, model);
    std::string csv = "epoch,mean_loss,train_accuracy,learning_rate\n";
    for (const EpochStats& e : log.epochs) {
        std::ostringstream row;
        row << e.epoch << "," << e.mean_loss << "," << e.train_accuracy << ","
            << e.learning_rate << "\n";
        csv += row.str();
    }
    write_text(ctx.path("ga_train_log.csv"), csv);
    std::cerr << "[train-ga] test accuracy " << evaluate_accuracy(net, ctx.test_set) << "\n";
}

// ---- stage 2: adversary generation ----

void stage_gen_adv(PipelineContext& ctx, bool force) {
    std::vector<std::string> artifacts = {ctx.path("attack.json"),
                                          ctx.path("adv_fgs/manifest.json"),
                                          ctx.path("adv_deepfool/manifest.json"),
                                          ctx.path("adv_boxmin/manifest.json")};
    if (!force && all_exist(artifacts)) {
        std::cerr << "[gen-adv] artifacts present, skipping\n";
        return;
    }
    Network ga = load_network(ctx.path("ga.json"));
    std::uint64_t ga_hash = hash_file(ctx.path("ga.json"));

    AttackConfig attacks = ctx.cfg.attacks;
    json attack_doc;
    if (ctx.cfg.tune_fgs) {
        std::vector<Sample> eligible;
        for (const Sample& s : ctx.test_set.samples)
            if (ga.predict(s.image) == s.label) eligible.push_back(s);
        if (eligible.empty()) throw std::runtime_error("gen-adv: GA net classifies nothing correctly");
        TunedEpsilon tuned = tune_epsilon(ga, eligible, attacks.target_fool_rate);
        attacks.fgs_epsilon = tuned.epsilon;
        attack_doc["tuned"] = true;
        attack_doc["fool_rate"] = tuned.fool_rate;
        attack_doc["target_reached"] = tuned.target_reached;
        if (!tuned.target_reached)
            std::cerr << "[gen-adv] warning: fool-rate target unreachable on the epsilon grid\n";
    } else {
        attack_doc["tuned"] = false;
    }
    attack_doc["fgs_epsilon"] = attacks.fgs_epsilon;

    for (AttackKind kind : {AttackKind::FGS, AttackKind::DeepFool, AttackKind::BoxMin}) {
        auto set = generate_adversary_set(ga, ctx.test_set, kind, attacks, false);
        save_adversary_set(set, kind, ctx.path("adv_" + attack_kind_name(kind)), ga_hash);
        double mean_dist = 0.0;
        std::size_t fooled = 0;
        for (const auto& ex : set) {
            mean_dist += ex.distortion;
            if (ex.fooled) ++fooled;
        }
        if (!set.empty()) mean_dist /= static_cast<double>(set.size());
        std::cerr << "[gen-adv] " << attack_kind_name(kind) << ": " << set.size()
                  << " adversaries, " << fooled << " fooling, mean distortion " << mean_dist
                  << "\n";
    }
    write_text(ctx.path("attack.json"), attack_doc.dump(2) + "\n");
}

// ---- stage 3: naive CNN* and pure ensemble ----

void stage_train_baselines(PipelineContext& ctx, bool force) {
    std::vector<std::string> artifacts = {ctx.path("naive.json")};
    for (std::size_t i = 0; i < ctx.cfg.seeds_pure.size(); ++i)
        artifacts.push_back(ctx.path("pure_" + std::to_string(i) + ".json"));
    if (!force && all_exist(artifacts)) {
        std::cerr << "[train-baselines] artifacts present, skipping\n";
        return;
    }
    NetworkConfig ncfg =
        network_for_id(ctx.cfg.network_id, ctx.input_shape, ctx.num_classes, ctx.cfg.seed_naive);
    Network naive(ncfg);
    train(naive, ctx.train_set, with_seed(ctx.cfg.train, ctx.cfg.seed_naive));
    save_network(naive, ctx.path("naive.json"));

    PureEnsemble pure = build_pure_ensemble(
        ctx.train_set,
        network_for_id(ctx.cfg.network_id, ctx.input_shape, ctx.num_classes, 0),
        ctx.cfg.train, ctx.cfg.seeds_pure);
    for (std::size_t i = 0; i < pure.members.size(); ++i)
        save_network(pure.members[i], ctx.path("pure_" + std::to_string(i) + ".json"));
    std::cerr << "[train-baselines] done\n";
}

// ---- stage 4: confusion matrix, subsets, specialists ----

void stage_build_ensemble(PipelineContext& ctx, bool force) {
    std::vector<std::string> artifacts = {ctx.path("confusion.json"),
                                          ctx.path("ensemble_spec.json")};
    if (!force && all_exist(artifacts) && fs::exists(ctx.path("member_0.json"))) {
        std::cerr << "[build-ensemble] artifacts present, skipping\n";
        return;
    }
    Network ga = load_network(ctx.path("ga.json"));

    std::ifstream af(ctx.path("attack.json"));
    if (!af) throw std::runtime_error("build-ensemble: missing attack.json (run gen-adv first)");
    json attack_doc;
    af >> attack_doc;
    double epsilon = attack_doc.at("fgs_epsilon").get<double>();

    ConfusionMatrix cm = build_confusion_matrix(ga, ctx.train_set, ctx.cfg.confusion_per_class,
                                                epsilon, ctx.cfg.confusion_seed);
    json cm_doc;
    cm_doc["num_classes"] = cm.num_classes;
    cm_doc["counts"] = cm.counts;
    write_text(ctx.path("confusion.json"), cm_doc.dump(2) + "\n");

    EnsembleSpec spec = derive_subsets(cm, ctx.cfg.ensemble_coverage);
    json spec_doc;
    spec_doc["K"] = spec.num_classes;
    spec_doc["coverage"] = spec.coverage;
    spec_doc["subsets"] = json::array();
    for (const ClassSubset& u : spec.subsets) {
        json sj;
        sj["origin"] = subset_origin_name(u.origin);
        sj["row"] = u.source_row;
        sj["classes"] = u.classes;
        spec_doc["subsets"].push_back(sj);
    }
    spec_doc["expected_votes"] = spec.expected_votes;
    write_text(ctx.path("ensemble_spec.json"), spec_doc.dump(2) + "\n");

    NetworkConfig ncfg = network_for_id(ctx.cfg.network_id, ctx.input_shape, ctx.num_classes, 0);
    SpecialistsEnsemble ens = build_specialists_ensemble(spec, ctx.train_set, ncfg, ctx.cfg.train,
                                                         ctx.cfg.seed_specialist_base);
    for (std::size_t j = 0; j < ens.members.size(); ++j)
        save_network(ens.members[j].net, ctx.path("member_" + std::to_string(j) + ".json"));
    std::cerr << "[build-ensemble] " << ens.members.size() << " members trained\n";
}

EnsembleSpec load_ensemble_spec(const PipelineContext& ctx) {
    std::ifstream in(ctx.path("ensemble_spec.json"));
    if (!in) throw std::runtime_error("missing ensemble_spec.json (run build-ensemble first)");
    json doc;
    in >> doc;
    EnsembleSpec spec;
    spec.num_classes = doc.at("K").get<int>();
    spec.coverage = doc.at("coverage").get<double>();
    for (const json& sj : doc.at("subsets")) {
        ClassSubset u;
        u.origin = subset_origin_from_name(sj.at("origin").get<std::string>());
        u.source_row = sj.at("row").get<int>();
        u.classes = sj.at("classes").get<std::vector<int>>();
        spec.subsets.push_back(std::move(u));
    }
    spec.expected_votes = doc.at("expected_votes").get<std::vector<int>>();
    return spec;
}

SpecialistsEnsemble load_specialists(const PipelineContext& ctx) {
    SpecialistsEnsemble ens;
    ens.spec = load_ensemble_spec(ctx);
    for (std::size_t j = 0; j < ens.spec.subsets.size(); ++j)
        ens.members.push_back({ens.spec.subsets[j], ens.spec.num_classes,
                               load_network(ctx.path("member_" + std::to_string(j) + ".json"))});
    return ens;
}

// ---- stage 5: evaluation ----

struct NamedFramework {
    std::string id;
    Framework fn;
};

std::vector<NamedFramework> build_frameworks(const PipelineContext& ctx,
                                             std::vector<Network>& storage_nets,
                                             PureEnsemble& pure, SpecialistsEnsemble& ens) {
    storage_nets.push_back(load_network(ctx.path("naive.json")));
    const Network& naive = storage_nets.back();

    pure.members.clear();
    for (std::size_t i = 0; i < ctx.cfg.seeds_pure.size(); ++i)
        pure.members.push_back(load_network(ctx.path("pure_" + std::to_string(i) + ".json")));

    ens = load_specialists(ctx);

    std::vector<NamedFramework> fws;
    fws.push_back({"naive", [&naive](const Tensor& x) { return naive.forward(x); }});
    fws.push_back({"pure", [&pure](const Tensor& x) { return pure.predict_mean(x); }});
    fws.push_back({"specialists1", [&ens](const Tensor& x) { return vote(ens, x).fused; }});
    return fws;
}

void stage_evaluate(PipelineContext& ctx, bool force) {
    std::vector<std::string> artifacts = {ctx.path("errors.csv"), ctx.path("densities.csv"),
                                          ctx.path("rejection_rates.csv"),
                                          ctx.path("decisions.csv")};
    if (!force && all_exist(artifacts)) {
        std::cerr << "[evaluate] artifacts present, skipping\n";
        return;
    }

    std::vector<Network> storage;
    PureEnsemble pure;
    SpecialistsEnsemble ens;
    auto frameworks = build_frameworks(ctx, storage, pure, ens);

    std::vector<std::pair<std::string, std::vector<AdversarialExample>>> adv_sets;
    for (const char* kind : {"fgs", "deepfool", "boxmin"})
        adv_sets.push_back({kind, load_adversary_set(ctx.path(std::string("adv_") + kind))});

    std::string errors = "framework,sample_set,metric,tau,error,rejection_rate\n";
    std::string curves = "framework,sample_set,tau,rejection_rate\n";
    std::string decisions = "framework,sample_set,index,true_label,raw_argmax,confidence\n";
    std::vector<DensityHistogram> densities;

    auto fmt_row = [](std::ostringstream& os) {
        std::string s = os.str();
        os.str("");
        return s;
    };

    for (const NamedFramework& fw : frameworks) {
        // clean set: capped and literal clean error modes
        for (auto mode : {CleanErrorMode::Capped, CleanErrorMode::Literal}) {
            ErrorReport rep = sweep_clean(fw.fn, fw.id, ctx.test_set, ctx.cfg.tau_grid, mode);
            const char* metric = (mode == CleanErrorMode::Capped) ? "ED_capped" : "ED_literal";
            for (const SweepRow& r : rep.rows) {
                std::ostringstream os;
                os << fw.id << ",clean," << metric << "," << r.tau << "," << r.value << ","
                   << r.rejection_rate << "\n";
                errors += fmt_row(os);
            }
        }
        densities.push_back(confidence_density_clean(fw.fn, fw.id, ctx.test_set));

        std::vector<Tensor> clean_inputs;
        for (const Sample& s : ctx.test_set.samples) clean_inputs.push_back(s.image);
        for (const CurveRow& r : rejection_rate_curve(fw.fn, clean_inputs, ctx.cfg.tau_grid)) {
            std::ostringstream os;
            os << fw.id << ",clean," << r.tau << "," << r.rate << "\n";
            curves += fmt_row(os);
        }
        for (std::size_t i = 0; i < ctx.test_set.size(); ++i) {
            ThresholdedDecision d = decide(fw.fn(ctx.test_set.samples[i].image), 0.0);
            std::ostringstream os;
            os << fw.id << ",clean," << i << "," << ctx.test_set.samples[i].label << ","
               << d.raw_argmax << "," << d.confidence << "\n";
            decisions += fmt_row(os);
        }

        for (const auto& [set_id, adv_set] : adv_sets) {
            ErrorReport rep = sweep_adv(fw.fn, fw.id, set_id, adv_set, ctx.cfg.tau_grid);
            for (const SweepRow& r : rep.rows) {
                std::ostringstream os;
                os << fw.id << "," << set_id << ",EA," << r.tau << "," << r.value << ","
                   << r.rejection_rate << "\n";
                errors += fmt_row(os);
            }
            densities.push_back(confidence_density_adv(fw.fn, fw.id, set_id, adv_set));

            std::vector<Tensor> inputs;
            for (const AdversarialExample& ex : adv_set) inputs.push_back(ex.perturbed);
            for (const CurveRow& r : rejection_rate_curve(fw.fn, inputs, ctx.cfg.tau_grid)) {
                std::ostringstream os;
                os << fw.id << "," << set_id << "," << r.tau << "," << r.rate << "\n";
                curves += fmt_row(os);
            }
            for (std::size_t i = 0; i < adv_set.size(); ++i) {
                ThresholdedDecision d = decide(fw.fn(adv_set[i].perturbed), 0.0);
                std::ostringstream os;
                os << fw.id << "," << set_id << "," << i << "," << adv_set[i].true_label << ","
                   << d.raw_argmax << "," << d.confidence << "\n";
                decisions += fmt_row(os);
            }
        }
    }

    write_text(ctx.path("errors.csv"), errors);
    write_text(ctx.path("densities.csv"), density_csv(densities));
    write_text(ctx.path("rejection_rates.csv"), curves);
    write_text(ctx.path("decisions.csv"), decisions);
    std::cerr << "[evaluate] reports written\n";
}

// ---- stage 6: report (manifest + charts) ----

struct CsvTable {
    std::vector<std::vector<std::string>> rows;  // without header
};

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("report: missing " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        t.rows.push_back(std::move(fields));
    }
    return t;
}

void stage_report(PipelineContext& ctx, bool force) {
    if (!force && all_exist({ctx.path("manifest.json")})) {
        std::cerr << "[report] artifacts present, skipping\n";
        return;
    }

    CsvTable errors = read_csv(ctx.path("errors.csv"));
    // E_A vs tau per adversary set, one series per framework
    for (const std::string set_id : {"fgs", "deepfool", "boxmin", "clean"}) {
        std::vector<SvgSeries> series;
        for (const std::string fw : {"naive", "pure", "specialists1"}) {
            SvgSeries s;
            s.label = fw;
            for (const auto& row : errors.rows) {
                if (row[0] != fw || row[1] != set_id) continue;
                if (set_id == "clean" && row[2] != "ED_capped") continue;
                s.xs.push_back(std::stod(row[3]));
                s.ys.push_back(std::stod(row[4]));
            }
            series.push_back(std::move(s));
        }
        std::string title = (set_id == "clean") ? "E_D vs threshold (clean)"
                                                : "E_A vs threshold (" + set_id + ")";
        write_text(ctx.path("chart_" + set_id + ".svg"), render_line_chart_svg(title, series));
    }

    CsvTable curves = read_csv(ctx.path("rejection_rates.csv"));
    for (const std::string fw : {"naive", "pure", "specialists1"}) {
        std::vector<SvgSeries> series;
        for (const std::string set_id : {"clean", "fgs", "deepfool", "boxmin"}) {
            SvgSeries s;
            s.label = set_id;
            for (const auto& row : curves.rows) {
                if (row[0] != fw || row[1] != set_id) continue;
                s.xs.push_back(std::stod(row[2]));
                s.ys.push_back(std::stod(row[3]));
            }
            series.push_back(std::move(s));
        }
        write_text(ctx.path("chart_rejection_" + fw + ".svg"),
                   render_line_chart_svg("Rejection rate vs threshold (" + fw + ")", series));
    }

    json manifest;
    manifest["config"] = experiment_config_to_json(ctx.cfg);
    {
        std::ifstream af(ctx.path("attack.json"));
        if (af) {
            json attack_doc;
            af >> attack_doc;
            manifest["attack"] = attack_doc;
        }
    }
    manifest["ensemble_spec"] = json::parse(std::ifstream(ctx.path("ensemble_spec.json")));
    manifest["seeds"] = {{"ga", ctx.cfg.seed_ga},
                         {"naive", ctx.cfg.seed_naive},
                         {"pure", ctx.cfg.seeds_pure},
                         {"specialist_base", ctx.cfg.seed_specialist_base}};
    json hashes;
    for (const auto& entry : fs::directory_iterator(ctx.dir)) {
        if (!entry.is_regular_file()) continue;
        std::string name = entry.path().filename().string();
        if (name == "manifest.json") continue;
        hashes[name] = hash_file(entry.path().string());
    }
    for (const char* kind : {"fgs", "deepfool", "boxmin"}) {
        std::string sub = std::string("adv_") + kind;
        hashes[sub + "/manifest.json"] = hash_file(ctx.path(sub + "/manifest.json"));
        hashes[sub + "/tensors.bin"] = hash_file(ctx.path(sub + "/tensors.bin"));
    }
    manifest["file_hashes"] = std::move(hashes);
    write_text(ctx.path("manifest.json"), manifest.dump(2) + "\n");
    std::cerr << "[report] manifest and charts written\n";
}

}  // namespace

std::string run_pipeline(const ExperimentConfig& cfg, Stage first, Stage last, bool force) {
    PipelineContext ctx = make_context(cfg);
    fs::create_directories(ctx.dir);

    // stale-artifact guard: artifacts are only reused under an identical config
    std::string cfg_dump = experiment_config_to_json(cfg).dump(2) + "\n";
    std::string hash_path = ctx.path("config.json");
    if (fs::exists(hash_path)) {
        std::ifstream in(hash_path);
        std::string existing((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
        if (existing != cfg_dump) {
            if (!force)
                throw std::runtime_error(
                    "output directory holds artifacts from a different config; "
                    "pass force or use a fresh directory");
            force = true;
        }
    }
    write_text(hash_path, cfg_dump);

    for (int s = static_cast<int>(first); s <= static_cast<int>(last); ++s) {
        Stage stage = static_cast<Stage>(s);
        const char* name = "?";
        try {
            switch (stage) {
                case Stage::TrainGa: name = "train-ga"; stage_train_ga(ctx, force); break;
                case Stage::GenAdv: name = "gen-adv"; stage_gen_adv(ctx, force); break;
                case Stage::TrainBaselines:
                    name = "train-baselines";
                    stage_train_baselines(ctx, force);
                    break;
                case Stage::BuildEnsemble:
                    name = "build-ensemble";
                    stage_build_ensemble(ctx, force);
                    break;
                case Stage::Evaluate: name = "evaluate"; stage_evaluate(ctx, force); break;
                case Stage::Report: name = "report"; stage_report(ctx, force); break;
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("stage " + std::string(name) + " failed: " + e.what());
        }
    }
    return ctx.dir;
}

}  // namespace advbench
