// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failed criteria. Oracles here are independent transcriptions of the rules
// the library implements, not calls back into it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "advbench/adversary_io.hpp"
#include "advbench/idx.hpp"
#include "advbench/model_io.hpp"
#include "advbench/pipeline.hpp"
#include "test_util.hpp"

using namespace advbench;
using namespace advbench::testutil;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int id;
    std::string title;
    bool (*run)(std::string& detail);
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

bool check(bool ok, const std::string& what, std::string& detail) {
    if (!ok && detail.empty()) detail = what;
    return ok;
}

// ---------------------------------------------------------------- criterion 1

bool criterion_gradients(std::string& detail) {
    double worst = 0.0;
    int nets = 0;
    for (int seed = 1; seed <= 6; ++seed) {
        for (int variant = 0; variant < 4; ++variant) {
            Network net(tiny_net_config(variant, static_cast<std::uint64_t>(seed * 17 + variant)));
            Rng rng(static_cast<std::uint64_t>(seed * 1000 + variant));
            std::vector<Sample> batch;
            for (int b = 0; b < 3; ++b)
                batch.push_back({random_tensor(net.input_shape(), rng),
                                 static_cast<int>(rng.next_below(
                                     static_cast<std::uint64_t>(net.num_classes())))});

            ParamGradients analytic = net.param_gradients(batch);
            ParamGradients numeric = fd_param_gradients(net, batch);
            worst = std::max(worst, max_rel_error(analytic, numeric));

            Tensor gi = net.input_gradient(batch[0].image, batch[0].label);
            Tensor gi_fd = fd_input_gradient(net, batch[0].image, batch[0].label);
            worst = std::max(worst, max_rel_error(gi, gi_fd));
            ++nets;
        }
    }
    std::ostringstream os;
    os << nets << " nets, worst relative error " << worst;
    detail = os.str();
    return nets >= 20 && worst < 1e-4;
}

// ---------------------------------------------------------------- criterion 2

// Independent transcription of the subset rule: per row, repeatedly pick the
// highest remaining off-diagonal count (ties to the lower index) until the
// running sum reaches coverage * row total; complement; generalist; keep-first
// dedup.
std::vector<std::vector<int>> oracle_subsets(const ConfusionMatrix& cm, double coverage,
                                             std::vector<std::vector<int>>* pre_dedup) {
    int K = cm.num_classes;
    std::vector<std::vector<int>> family;
    std::vector<std::vector<int>> complements;
    for (int i = 0; i < K; ++i) {
        double total = 0.0;
        for (int j = 0; j < K; ++j)
            if (j != i) total += static_cast<double>(cm.at(i, j));
        std::vector<bool> picked(static_cast<std::size_t>(K), false);
        std::vector<int> subset;
        double acc = 0.0;
        while (acc < coverage * total) {
            int best = -1;
            for (int j = 0; j < K; ++j) {
                if (j == i || picked[static_cast<std::size_t>(j)]) continue;
                if (best < 0 || cm.at(i, j) > cm.at(i, best)) best = j;
            }
            picked[static_cast<std::size_t>(best)] = true;
            subset.push_back(best);
            acc += static_cast<double>(cm.at(i, best));
        }
        std::sort(subset.begin(), subset.end());
        std::vector<int> comp;
        for (int j = 0; j < K; ++j)
            if (!picked[static_cast<std::size_t>(j)]) comp.push_back(j);
        family.push_back(subset);
        complements.push_back(comp);
    }
    for (auto& c : complements) family.push_back(c);
    std::vector<int> all;
    for (int j = 0; j < K; ++j) all.push_back(j);
    family.push_back(all);
    if (pre_dedup) *pre_dedup = family;

    std::vector<std::vector<int>> dedup;
    for (const auto& u : family) {
        bool seen = false;
        for (const auto& kept : dedup)
            if (kept == u) seen = true;
        if (!seen) dedup.push_back(u);
    }
    return dedup;
}

bool criterion_subset_rule(std::string& detail) {
    Rng rng(4242);
    int cases = 0;
    for (int t = 0; t < 100; ++t) {
        int K = std::vector<int>{3, 4, 10}[t % 3];
        ConfusionMatrix cm(K);
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j)
                if (j != i) cm.at(i, j) = static_cast<std::int64_t>(rng.next_below(40));
        // guarantee nonzero off-diagonal rows
        for (int i = 0; i < K; ++i) cm.at(i, (i + 1) % K) += 1;

        std::vector<std::vector<int>> pre;
        std::vector<std::vector<int>> want = oracle_subsets(cm, 0.8, &pre);
        EnsembleSpec got = derive_subsets(cm, 0.8);

        if (got.subsets.size() != want.size()) {
            detail = "subset count mismatch on case " + std::to_string(t);
            return false;
        }
        for (std::size_t s = 0; s < want.size(); ++s)
            if (got.subsets[s].classes != want[s]) {
                detail = "subset content mismatch on case " + std::to_string(t);
                return false;
            }

        // pre-dedup family: 2K+1 subsets, each class appears K+1 times,
        // U_i and U_{i+K} partition the class set
        if (pre.size() != static_cast<std::size_t>(2 * K + 1)) {
            detail = "pre-dedup family size wrong on case " + std::to_string(t);
            return false;
        }
        std::vector<int> appearances(static_cast<std::size_t>(K), 0);
        for (const auto& u : pre)
            for (int c : u) appearances[static_cast<std::size_t>(c)] += 1;
        for (int c = 0; c < K; ++c)
            if (appearances[static_cast<std::size_t>(c)] != K + 1) {
                detail = "class appearance count != K+1 on case " + std::to_string(t);
                return false;
            }
        for (int i = 0; i < K; ++i) {
            std::vector<int> merged = pre[static_cast<std::size_t>(i)];
            merged.insert(merged.end(), pre[static_cast<std::size_t>(i + K)].begin(),
                          pre[static_cast<std::size_t>(i + K)].end());
            std::sort(merged.begin(), merged.end());
            std::vector<int> all;
            for (int j = 0; j < K; ++j) all.push_back(j);
            if (merged != all) {
                detail = "U_i / complement do not partition classes on case " + std::to_string(t);
                return false;
            }
        }
        ++cases;
    }
    detail = std::to_string(cases) + " random matrices matched the brute-force rule";
    return true;
}

// ---------------------------------------------------------------- criterion 3

// Ensemble whose member outputs are directly programmable through the input:
// member j reads input block [j*K, (j+1)*K) as its pre-softmax logits for
// the classes of its subset.
SpecialistsEnsemble programmable_ensemble(const EnsembleSpec& spec) {
    int K = spec.num_classes;
    std::size_t M = spec.subsets.size();
    SpecialistsEnsemble ens;
    ens.spec = spec;
    for (std::size_t j = 0; j < M; ++j) {
        const ClassSubset& u = spec.subsets[j];
        NetworkConfig cfg;
        cfg.input_shape = {M * static_cast<std::size_t>(K)};
        cfg.num_classes = static_cast<int>(u.classes.size());
        cfg.seed = 1;
        cfg.layers = {LayerSpec::dense(u.classes.size()), LayerSpec::softmax()};
        Network net(cfg);
        Tensor& w = net.mutable_layers()[0]->params()[0];
        Tensor& b = net.mutable_layers()[0]->params()[1];
        for (double& v : w.data()) v = 0.0;
        for (double& v : b.data()) v = 0.0;
        for (std::size_t t = 0; t < u.classes.size(); ++t)
            w[t * (M * static_cast<std::size_t>(K)) + j * static_cast<std::size_t>(K) +
              static_cast<std::size_t>(u.classes[t])] = 1.0;
        ens.members.push_back({u, K, std::move(net)});
    }
    return ens;
}

// Direct transcription of the voting procedure, computing member outputs
// from first principles (softmax of the programmed logits).
struct OracleVote {
    std::vector<int> votes;
    int winner = 0;
    bool agreement = false;
    std::vector<double> fused;
};

OracleVote oracle_vote(const EnsembleSpec& spec, const std::vector<std::vector<double>>& logits) {
    int K = spec.num_classes;
    std::size_t M = spec.subsets.size();
    std::vector<std::vector<double>> outputs;  // K-embedded
    OracleVote r;
    r.votes.assign(static_cast<std::size_t>(K), 0);
    for (std::size_t j = 0; j < M; ++j) {
        const std::vector<int>& cls = spec.subsets[j].classes;
        double denom = 0.0;
        for (std::size_t t = 0; t < cls.size(); ++t) denom += std::exp(logits[j][t]);
        std::vector<double> full(static_cast<std::size_t>(K), 0.0);
        for (std::size_t t = 0; t < cls.size(); ++t)
            full[static_cast<std::size_t>(cls[t])] = std::exp(logits[j][t]) / denom;
        int arg = 0;
        for (int k = 1; k < K; ++k)
            if (full[static_cast<std::size_t>(k)] > full[static_cast<std::size_t>(arg)]) arg = k;
        r.votes[static_cast<std::size_t>(arg)] += 1;
        outputs.push_back(std::move(full));
    }
    for (int k = 1; k < K; ++k)
        if (r.votes[static_cast<std::size_t>(k)] > r.votes[static_cast<std::size_t>(r.winner)])
            r.winner = k;
    r.agreement =
        r.votes[static_cast<std::size_t>(r.winner)] ==
        spec.expected_votes[static_cast<std::size_t>(r.winner)];
    std::vector<std::size_t> used;
    for (std::size_t j = 0; j < M; ++j) {
        bool in = false;
        for (int c : spec.subsets[j].classes)
            if (c == r.winner) in = true;
        if (!r.agreement || in) used.push_back(j);
    }
    r.fused.assign(static_cast<std::size_t>(K), 0.0);
    for (std::size_t j : used)
        for (int k = 0; k < K; ++k)
            r.fused[static_cast<std::size_t>(k)] += outputs[j][static_cast<std::size_t>(k)];
    for (double& v : r.fused) v /= static_cast<double>(used.size());
    return r;
}

bool criterion_voting(std::string& detail) {
    // K = 3, seven distinct subsets (three confusing, three complements,
    // generalist), every class expected in four of them
    ConfusionMatrix cm(3);
    cm.at(0, 1) = 10; cm.at(0, 2) = 1;
    cm.at(1, 2) = 10; cm.at(1, 0) = 1;
    cm.at(2, 0) = 10; cm.at(2, 1) = 1;
    EnsembleSpec spec = derive_subsets(cm, 0.8);
    if (spec.subsets.size() != 7) {
        detail = "fixture spec does not have 7 members";
        return false;
    }
    SpecialistsEnsemble ens = programmable_ensemble(spec);

    const int K = 3;
    const std::size_t M = 7;
    const double peaks[3] = {0.5, 1.5, 4.0};

    // enumerate winner choice per member (prod of subset sizes) x peak grid
    std::size_t winner_combos = 1;
    for (const ClassSubset& u : spec.subsets) winner_combos *= u.classes.size();
    std::size_t peak_combos = 1;
    for (std::size_t j = 0; j < M; ++j) peak_combos *= 3;
    std::size_t cases = winner_combos * peak_combos;
    if (cases < 10000) {
        detail = "grid too small: " + std::to_string(cases);
        return false;
    }

    double worst = 0.0;
    for (std::size_t c = 0; c < cases; ++c) {
        std::size_t code = c;
        std::vector<std::vector<double>> logits;
        Tensor x(Shape{M * static_cast<std::size_t>(K)});
        for (std::size_t j = 0; j < M; ++j) {
            const ClassSubset& u = spec.subsets[j];
            std::size_t wi = code % u.classes.size();
            code /= u.classes.size();
            double peak = peaks[code % 3];
            code /= 3;
            std::vector<double> lj(u.classes.size(), 0.0);
            lj[wi] = peak;
            x[j * static_cast<std::size_t>(K) + static_cast<std::size_t>(u.classes[wi])] = peak;
            logits.push_back(std::move(lj));
        }

        VoteResult got = vote(ens, x);
        OracleVote want = oracle_vote(spec, logits);

        if (got.votes != want.votes || got.winner != want.winner ||
            got.agreement != want.agreement) {
            detail = "branch/vote mismatch on case " + std::to_string(c);
            return false;
        }
        for (int k = 0; k < K; ++k)
            worst = std::max(worst,
                             std::abs(got.fused[static_cast<std::size_t>(k)] -
                                      want.fused[static_cast<std::size_t>(k)]));
        int reached = 0;
        for (int k = 0; k < K; ++k)
            if (got.votes[static_cast<std::size_t>(k)] ==
                spec.expected_votes[static_cast<std::size_t>(k)])
                ++reached;
        if (reached > 1) {
            detail = "more than one class reached its expected vote count";
            return false;
        }
    }
    std::ostringstream os;
    os << cases << " grid cases, max fused deviation " << worst;
    detail = os.str();
    return worst < 1e-9;
}

// ---------------------------------------------------------------- criterion 4

bool criterion_attacks(std::string& detail) {
    ExperimentConfig cfg = desk_preset();
    SyntheticData data = make_synthetic(*cfg.synthetic);
    Network ga(network_for_id("desk", data.train.samples.front().image.shape(),
                              data.train.num_classes, cfg.seed_ga));
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed_ga;
    train(ga, data.train, tc);

    std::vector<Sample> eligible;
    for (const Sample& s : data.test.samples)
        if (ga.predict(s.image) == s.label) eligible.push_back(s);
    if (eligible.size() < 20) {
        detail = "source net too weak: only " + std::to_string(eligible.size()) +
                 " correctly classified test samples";
        return false;
    }

    TunedEpsilon tuned = tune_epsilon(ga, eligible, 0.99);
    double fgs_dist = 0.0, df_dist = 0.0, df_iters = 0.0;
    double bm_dist = 0.0;
    int bm_success = 0;
    for (const Sample& s : eligible) {
        fgs_dist += distortion(s.image, fgs(ga, s.image, s.label, tuned.epsilon));
        DeepFoolResult df = deepfool(ga, s.image, cfg.attacks.deepfool);
        df_dist += distortion(s.image, df.perturbed);
        df_iters += static_cast<double>(df.iterations);
        BoxMinResult bm = box_min_perturbation(ga, s.image, s.label, -1, cfg.attacks.boxmin);
        if (bm.success) {
            ++bm_success;
            bm_dist += distortion(s.image, bm.perturbed);
        }
    }
    double n = static_cast<double>(eligible.size());
    fgs_dist /= n;
    df_dist /= n;
    df_iters /= n;
    double bm_rate = static_cast<double>(bm_success) / n;
    if (bm_success > 0) bm_dist /= static_cast<double>(bm_success);

    std::ostringstream os;
    os << "fgs fool rate " << tuned.fool_rate << " (eps " << tuned.epsilon << "), df iters "
       << df_iters << ", distortions fgs/df/boxmin " << fgs_dist << "/" << df_dist << "/"
       << bm_dist << ", boxmin success " << bm_rate;
    detail = os.str();
    bool ok = true;
    ok &= tuned.fool_rate >= 0.99;
    ok &= df_iters <= 5.0;
    ok &= df_dist < fgs_dist;
    ok &= bm_rate >= 0.9;
    ok &= bm_dist <= 1.5 * df_dist;
    return ok;
}

// ---------------------------------------------------------------- criterion 5

// shared with criteria 6/7: the desk-scale pipeline run
std::string g_run_dir;

struct ErrorRow {
    std::string framework, set, metric;
    double tau = 0.0, value = 0.0, rejection = 0.0;
};

std::vector<ErrorRow> read_errors_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing " + path);
    std::vector<ErrorRow> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        ErrorRow r;
        std::string tau, value, rej;
        std::getline(ss, r.framework, ',');
        std::getline(ss, r.set, ',');
        std::getline(ss, r.metric, ',');
        std::getline(ss, tau, ',');
        std::getline(ss, value, ',');
        std::getline(ss, rej, ',');
        r.tau = std::stod(tau);
        r.value = std::stod(value);
        r.rejection = std::stod(rej);
        rows.push_back(std::move(r));
    }
    return rows;
}

double lookup(const std::vector<ErrorRow>& rows, const std::string& fw, const std::string& set,
              const std::string& metric, double tau) {
    for (const ErrorRow& r : rows)
        if (r.framework == fw && r.set == set && r.metric == metric &&
            std::abs(r.tau - tau) < 1e-9)
            return r.value;
    throw std::runtime_error("errors.csv row not found: " + fw + "/" + set + "/" + metric);
}

bool criterion_rejection_trend(std::string& detail) {
    double t0 = now_seconds();
    g_run_dir = (fs::temp_directory_path() / "advbench_acceptance_run").string();
    fs::remove_all(g_run_dir);
    ExperimentConfig cfg = desk_preset();
    cfg.output_dir = g_run_dir;
    run_pipeline(cfg);
    double elapsed = now_seconds() - t0;

    auto rows = read_errors_csv(g_run_dir + "/errors.csv");
    double ea_spec = lookup(rows, "specialists1", "fgs", "EA", 0.5);
    double ea_naive = lookup(rows, "naive", "fgs", "EA", 0.5);
    double ea_pure = lookup(rows, "pure", "fgs", "EA", 0.5);
    double ed_0 = lookup(rows, "specialists1", "clean", "ED_capped", 0.0);
    double ed_05 = lookup(rows, "specialists1", "clean", "ED_capped", 0.5);

    std::ostringstream os;
    os << "E_A(0.5) specialists " << ea_spec << " vs naive " << ea_naive << ", pure " << ea_pure
       << "; E_D 0->0.5 rise " << (ed_05 - ed_0) << "; run " << elapsed << " s";
    detail = os.str();
    return ea_spec < ea_naive && ea_spec < ea_pure && (ed_05 - ed_0) <= 0.10 + 1e-12 &&
           elapsed < 600.0;
}

// ---------------------------------------------------------------- criterion 6

EnsembleSpec spec_from_json_file(const std::string& path) {
    std::ifstream in(path);
    nlohmann::json doc;
    in >> doc;
    EnsembleSpec spec;
    spec.num_classes = doc.at("K").get<int>();
    spec.coverage = doc.at("coverage").get<double>();
    for (const auto& sj : doc.at("subsets")) {
        ClassSubset u;
        u.origin = subset_origin_from_name(sj.at("origin").get<std::string>());
        u.source_row = sj.at("row").get<int>();
        u.classes = sj.at("classes").get<std::vector<int>>();
        spec.subsets.push_back(std::move(u));
    }
    spec.expected_votes = doc.at("expected_votes").get<std::vector<int>>();
    return spec;
}

bool criterion_metric_identities(std::string& detail) {
    if (g_run_dir.empty() || !fs::exists(g_run_dir + "/errors.csv")) {
        detail = "no pipeline run available (criterion 5 did not produce one)";
        return false;
    }
    ExperimentConfig cfg = desk_preset();
    SyntheticData data = make_synthetic(*cfg.synthetic);

    Network naive = load_network(g_run_dir + "/naive.json");
    PureEnsemble pure;
    for (std::size_t i = 0; i < cfg.seeds_pure.size(); ++i)
        pure.members.push_back(load_network(g_run_dir + "/pure_" + std::to_string(i) + ".json"));
    SpecialistsEnsemble ens;
    ens.spec = spec_from_json_file(g_run_dir + "/ensemble_spec.json");
    for (std::size_t j = 0; j < ens.spec.subsets.size(); ++j)
        ens.members.push_back({ens.spec.subsets[j], ens.spec.num_classes,
                               load_network(g_run_dir + "/member_" + std::to_string(j) + ".json")});

    std::vector<std::pair<std::string, Framework>> fws = {
        {"naive", [&](const Tensor& x) { return naive.forward(x); }},
        {"pure", [&](const Tensor& x) { return pure.predict_mean(x); }},
        {"specialists1", [&](const Tensor& x) { return vote(ens, x).fused; }},
    };

    std::vector<double> grid = default_tau_grid();
    grid.push_back(1.05);

    for (const auto& [id, fw] : fws) {
        // plain error: argmax disagreement at tau 0
        double plain = 0.0;
        for (const Sample& s : data.test.samples)
            if (decide(fw(s.image), 0.0).decision != s.label) plain += 1.0;
        plain /= static_cast<double>(data.test.size());
        for (auto mode : {CleanErrorMode::Capped, CleanErrorMode::Literal})
            if (!check(std::abs(error_clean(fw, data.test, 0.0, mode) - plain) < 1e-12,
                       id + ": E_D(0) != plain error", detail))
                return false;

        std::vector<Tensor> clean_inputs;
        for (const Sample& s : data.test.samples) clean_inputs.push_back(s.image);
        double prev_rate = -1.0;
        for (const CurveRow& r : rejection_rate_curve(fw, clean_inputs, grid)) {
            if (!check(r.rate >= prev_rate - 1e-12, id + ": rejection rate decreased", detail))
                return false;
            prev_rate = r.rate;
        }

        for (const char* set_id : {"fgs", "deepfool", "boxmin"}) {
            auto adv = load_adversary_set(g_run_dir + "/adv_" + std::string(set_id));
            ErrorReport rep = sweep_adv(fw, id, set_id, adv, grid);
            double prev = 2.0;
            for (const SweepRow& r : rep.rows) {
                if (!check(r.value <= prev + 1e-12, id + ": E_A increased with tau", detail))
                    return false;
                prev = r.value;
            }
            if (!check(std::abs(rep.rows.back().value) < 1e-15, id + ": E_A(tau>1) != 0",
                       detail))
                return false;
            std::vector<Tensor> inputs;
            for (const auto& ex : adv) inputs.push_back(ex.perturbed);
            double prev_r = -1.0;
            for (const CurveRow& r : rejection_rate_curve(fw, inputs, grid)) {
                if (!check(r.rate >= prev_r - 1e-12,
                           id + ": adversary rejection rate decreased", detail))
                    return false;
                prev_r = r.rate;
            }
        }
    }
    detail = "all identities hold over the full sweep grid for 3 frameworks and 4 sample sets";
    return true;
}

// ---------------------------------------------------------------- criterion 7

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("missing " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

bool criterion_round_trips(std::string& detail) {
    if (g_run_dir.empty() || !fs::exists(g_run_dir + "/naive.json")) {
        detail = "no pipeline run available (criterion 5 did not produce one)";
        return false;
    }
    std::string tmp = (fs::temp_directory_path() / "advbench_acceptance_rt").string();
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    // model JSON: load -> save reproduces the original file byte for byte
    Network net = load_network(g_run_dir + "/naive.json");
    save_network(net, tmp + "/naive.json");
    if (!check(slurp(tmp + "/naive.json") == slurp(g_run_dir + "/naive.json"),
               "model JSON round-trip altered bytes", detail))
        return false;

    // adversary set: load -> save reproduces tensors.bin byte for byte
    auto adv = load_adversary_set(g_run_dir + "/adv_deepfool");
    save_adversary_set(adv, AttackKind::DeepFool, tmp + "/adv", 0);
    if (!check(slurp(tmp + "/adv/tensors.bin") == slurp(g_run_dir + "/adv_deepfool/tensors.bin"),
               "adversary tensor round-trip altered bytes", detail))
        return false;
    auto reloaded = load_adversary_set(tmp + "/adv");
    if (!check(reloaded.size() == adv.size(), "adversary set size changed", detail)) return false;
    for (std::size_t i = 0; i < adv.size(); ++i)
        if (!check(reloaded[i].perturbed.data() == adv[i].perturbed.data() &&
                       reloaded[i].original.data() == adv[i].original.data() &&
                       reloaded[i].true_label == adv[i].true_label,
                   "adversary example changed in round-trip", detail))
            return false;

    // hand-built IDX fixture with known pixels
    {
        std::ofstream img(tmp + "/img.idx", std::ios::binary);
        std::ofstream lab(tmp + "/lab.idx", std::ios::binary);
        auto be32 = [](std::ofstream& out, std::uint32_t v) {
            char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
            out.write(b, 4);
        };
        be32(img, 2051);
        be32(img, 1);
        be32(img, 2);
        be32(img, 2);
        for (unsigned char px : {0, 128, 64, 255}) img.put(static_cast<char>(px));
        be32(lab, 2049);
        be32(lab, 1);
        lab.put(2);
    }
    Dataset idx = load_idx(tmp + "/img.idx", tmp + "/lab.idx");
    bool pixels_ok = idx.size() == 1 && idx.samples[0].label == 2 &&
                     idx.samples[0].image[0] == 0.0 &&
                     std::abs(idx.samples[0].image[1] - 128.0 / 255) < 1e-15 &&
                     std::abs(idx.samples[0].image[2] - 64.0 / 255) < 1e-15 &&
                     idx.samples[0].image[3] == 1.0;
    if (!check(pixels_ok, "IDX fixture pixels wrong", detail)) return false;

    // identical configs yield byte-identical CSV reports
    ExperimentConfig mini = desk_preset();
    SyntheticSpec s;
    s.num_classes = 3;
    s.samples_per_class = 40;
    s.dim = 8;
    s.seed = 5;
    mini.synthetic = s;
    mini.train.epochs = 10;
    mini.train.decay_epochs = {6, 8};
    mini.confusion_per_class = 20;
    mini.seeds_pure = {11, 12};
    mini.attacks.boxmin.bisection_steps = 6;
    mini.tau_grid = {0.0, 0.5, 1.0};

    ExperimentConfig a = mini, b = mini;
    a.output_dir = tmp + "/rep_a";
    b.output_dir = tmp + "/rep_b";
    run_pipeline(a);
    run_pipeline(b);
    for (const char* name : {"errors.csv", "densities.csv", "rejection_rates.csv",
                             "decisions.csv", "ga_train_log.csv"})
        if (!check(slurp(a.output_dir + "/" + std::string(name)) ==
                       slurp(b.output_dir + "/" + std::string(name)),
                   std::string(name) + " differs between identical runs", detail))
            return false;

    detail = "model/adversary/IDX round-trips exact; twin runs byte-identical";
    return true;
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "gradient fidelity vs central finite differences", criterion_gradients},
        {2, "subset rule matches brute-force oracle", criterion_subset_rule},
        {3, "voting matches direct transcription over grid", criterion_voting},
        {4, "attack sanity on a trained source network", criterion_attacks},
        {5, "rejection-trend reproduction on the desk preset", criterion_rejection_trend},
        {6, "metric identities across the sweep grid", criterion_metric_identities},
        {7, "format round-trips and byte-stable reports", criterion_round_trips},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        double t0 = now_seconds();
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double dt = now_seconds() - t0;
        std::printf("[criterion %d] %s — %s (%s; %.1f s)\n", c.id, ok ? "PASS" : "FAIL",
                    c.title.c_str(), detail.c_str(), dt);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
