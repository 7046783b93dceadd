#include "advbench/ensemble.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <stdexcept>

namespace advbench {

std::string subset_origin_name(SubsetOrigin o) {
    switch (o) {
        case SubsetOrigin::Confusing: return "confusing";
        case SubsetOrigin::Complement: return "complement";
        case SubsetOrigin::Generalist: return "generalist";
    }
    throw std::logic_error("unknown SubsetOrigin");
}

SubsetOrigin subset_origin_from_name(const std::string& name) {
    if (name == "confusing") return SubsetOrigin::Confusing;
    if (name == "complement") return SubsetOrigin::Complement;
    if (name == "generalist") return SubsetOrigin::Generalist;
    throw std::invalid_argument("unknown subset origin: " + name);
}

bool ClassSubset::contains(int c) const {
    return std::binary_search(classes.begin(), classes.end(), c);
}

ConfusionMatrix build_confusion_matrix(const Network& source_net, const Dataset& train_data,
                                       int per_class_count, double epsilon,
                                       std::uint64_t draw_seed) {
    const int K = train_data.num_classes;
    if (per_class_count <= 0)
        throw std::invalid_argument("build_confusion_matrix: per_class_count must be positive");

    // correctly classified training samples, bucketed by true class
    std::vector<std::vector<std::size_t>> eligible(static_cast<std::size_t>(K));
    for (std::size_t i = 0; i < train_data.size(); ++i) {
        const Sample& s = train_data.samples[i];
        if (source_net.predict(s.image) == s.label)
            eligible[static_cast<std::size_t>(s.label)].push_back(i);
    }

    Rng rng = Rng::for_stream(draw_seed, Rng::kData);
    ConfusionMatrix cm(K);
    for (int c = 0; c < K; ++c) {
        auto& pool = eligible[static_cast<std::size_t>(c)];
        if (pool.empty())
            throw std::runtime_error("build_confusion_matrix: no correctly classified samples of class " +
                                     std::to_string(c));
        if (pool.size() < static_cast<std::size_t>(per_class_count))
            std::cerr << "warning: class " << c << " has only " << pool.size()
                      << " eligible samples (requested " << per_class_count << ")\n";
        // uniform draw without replacement
        for (std::size_t i = pool.size(); i > 1; --i)
            std::swap(pool[i - 1], pool[rng.next_below(i)]);
        std::size_t take = std::min(pool.size(), static_cast<std::size_t>(per_class_count));
        for (std::size_t i = 0; i < take; ++i) {
            const Sample& s = train_data.samples[pool[i]];
            Tensor adv = fgs(source_net, s.image, s.label, epsilon);
            int pred = source_net.predict(adv);
            if (pred != s.label) cm.at(s.label, pred) += 1;
        }
    }
    return cm;
}

EnsembleSpec derive_subsets(const ConfusionMatrix& cm, double coverage) {
    const int K = cm.num_classes;
    if (K <= 0) throw std::invalid_argument("derive_subsets: empty confusion matrix");

    EnsembleSpec spec;
    spec.num_classes = K;
    spec.coverage = coverage;

    std::vector<ClassSubset> family;  // pre-dedup, order: U_1..U_K, U_{K+1}..U_{2K}, generalist
    std::vector<ClassSubset> complements;
    for (int i = 0; i < K; ++i) {
        std::int64_t off_sum = 0;
        for (int j = 0; j < K; ++j)
            if (j != i) off_sum += cm.at(i, j);
        if (off_sum <= 0)
            throw std::runtime_error("derive_subsets: row " + std::to_string(i) +
                                     " has zero off-diagonal confusion");

        std::vector<int> order;
        for (int j = 0; j < K; ++j)
            if (j != i) order.push_back(j);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (cm.at(i, a) != cm.at(i, b)) return cm.at(i, a) > cm.at(i, b);
            return a < b;
        });

        ClassSubset confusing;
        confusing.origin = SubsetOrigin::Confusing;
        confusing.source_row = i;
        std::int64_t acc = 0;
        for (int j : order) {
            confusing.classes.push_back(j);
            acc += cm.at(i, j);
            if (static_cast<double>(acc) >= coverage * static_cast<double>(off_sum)) break;
        }
        std::sort(confusing.classes.begin(), confusing.classes.end());

        ClassSubset complement;
        complement.origin = SubsetOrigin::Complement;
        complement.source_row = i;
        for (int j = 0; j < K; ++j)
            if (!std::binary_search(confusing.classes.begin(), confusing.classes.end(), j))
                complement.classes.push_back(j);

        family.push_back(std::move(confusing));
        complements.push_back(std::move(complement));
    }
    for (auto& c : complements) family.push_back(std::move(c));

    ClassSubset generalist;
    generalist.origin = SubsetOrigin::Generalist;
    for (int j = 0; j < K; ++j) generalist.classes.push_back(j);
    family.push_back(std::move(generalist));

    // duplicate subsets ignored, first occurrence kept
    for (const ClassSubset& u : family) {
        bool dup = false;
        for (const ClassSubset& kept : spec.subsets)
            if (kept.same_classes(u)) {
                dup = true;
                break;
            }
        if (!dup) spec.subsets.push_back(u);
    }

    spec.expected_votes.assign(static_cast<std::size_t>(K), 0);
    for (const ClassSubset& u : spec.subsets)
        for (int c : u.classes) spec.expected_votes[static_cast<std::size_t>(c)] += 1;
    return spec;
}

Tensor SpecialistMember::predict_full(const Tensor& x) const {
    Tensor local = net.forward(x);
    Tensor full(Shape{static_cast<std::size_t>(num_classes)});
    for (std::size_t i = 0; i < subset.classes.size(); ++i)
        full[static_cast<std::size_t>(subset.classes[i])] = local[i];
    return full;
}

SpecialistMember train_specialist(const ClassSubset& subset, const Dataset& data,
                                  const NetworkConfig& net_cfg, const TrainConfig& train_cfg) {
    if (subset.classes.empty()) throw std::invalid_argument("train_specialist: empty subset");

    // filter to subset classes, relabel to local indices
    Dataset local;
    local.num_classes = static_cast<int>(subset.classes.size());
    for (const Sample& s : data.samples) {
        auto it = std::lower_bound(subset.classes.begin(), subset.classes.end(), s.label);
        if (it == subset.classes.end() || *it != s.label) continue;
        local.samples.push_back(
            {s.image, static_cast<int>(std::distance(subset.classes.begin(), it))});
    }
    for (int c = 0; c < local.num_classes; ++c) {
        bool seen = false;
        for (const Sample& s : local.samples)
            if (s.label == c) {
                seen = true;
                break;
            }
        if (!seen)
            throw std::runtime_error("train_specialist: no training samples for class " +
                                     std::to_string(subset.classes[static_cast<std::size_t>(c)]));
    }

    // softmax spans only the subset: shrink the final dense layer
    NetworkConfig cfg = net_cfg;
    cfg.num_classes = local.num_classes;
    for (auto it = cfg.layers.rbegin(); it != cfg.layers.rend(); ++it)
        if (it->kind == LayerKind::Dense) {
            it->units = static_cast<std::size_t>(local.num_classes);
            break;
        }

    SpecialistMember member{subset, data.num_classes, Network(cfg)};
    train(member.net, local, train_cfg);
    return member;
}

SpecialistsEnsemble build_specialists_ensemble(const EnsembleSpec& spec, const Dataset& data,
                                               const NetworkConfig& net_cfg,
                                               const TrainConfig& train_cfg,
                                               std::uint64_t member_base_seed) {
    SpecialistsEnsemble ens;
    ens.spec = spec;
    for (std::size_t j = 0; j < spec.subsets.size(); ++j) {
        NetworkConfig ncfg = net_cfg;
        ncfg.seed = member_base_seed + j;
        TrainConfig tcfg = train_cfg;
        tcfg.seed = member_base_seed + j;
        ens.members.push_back(train_specialist(spec.subsets[j], data, ncfg, tcfg));
    }
    return ens;
}

VoteResult vote(const SpecialistsEnsemble& ens, const Tensor& x) {
    const int K = ens.spec.num_classes;
    const std::size_t M = ens.members.size();

    std::vector<Tensor> outputs;
    outputs.reserve(M);
    VoteResult result;
    result.votes.assign(static_cast<std::size_t>(K), 0);
    for (const SpecialistMember& m : ens.members) {
        outputs.push_back(m.predict_full(x));
        result.votes[outputs.back().argmax()] += 1;
    }

    result.winner = 0;
    for (int k = 1; k < K; ++k)
        if (result.votes[static_cast<std::size_t>(k)] >
            result.votes[static_cast<std::size_t>(result.winner)])
            result.winner = k;

    int expected = ens.spec.expected_votes[static_cast<std::size_t>(result.winner)];
    result.agreement = result.votes[static_cast<std::size_t>(result.winner)] == expected;

    if (result.agreement) {
        for (std::size_t j = 0; j < M; ++j)
            if (ens.members[j].subset.contains(result.winner)) result.activated.push_back(j);
    } else {
        for (std::size_t j = 0; j < M; ++j) result.activated.push_back(j);
    }

    Tensor fused(Shape{static_cast<std::size_t>(K)});
    for (std::size_t j : result.activated) fused += outputs[j];
    fused *= 1.0 / static_cast<double>(result.activated.size());
    result.confidence = fused[fused.argmax()];
    result.fused = std::move(fused);
    return result;
}

Tensor PureEnsemble::predict_mean(const Tensor& x) const {
    if (members.empty()) throw std::logic_error("PureEnsemble: no members");
    Tensor mean(Shape{static_cast<std::size_t>(members.front().num_classes())});
    for (const Network& net : members) mean += net.forward(x);
    mean *= 1.0 / static_cast<double>(members.size());
    return mean;
}

PureEnsemble build_pure_ensemble(const Dataset& data, const NetworkConfig& net_cfg,
                                 const TrainConfig& train_cfg,
                                 const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw std::invalid_argument("build_pure_ensemble: no seeds");
    for (std::size_t i = 0; i < seeds.size(); ++i)
        for (std::size_t j = i + 1; j < seeds.size(); ++j)
            if (seeds[i] == seeds[j])
                std::cerr << "warning: pure-ensemble seeds " << i << " and " << j
                          << " are identical\n";

    PureEnsemble ens;
    for (std::uint64_t seed : seeds) {
        NetworkConfig ncfg = net_cfg;
        ncfg.seed = seed;
        TrainConfig tcfg = train_cfg;
        tcfg.seed = seed;
        Network net(ncfg);
        train(net, data, tcfg);
        ens.members.push_back(std::move(net));
    }
    return ens;
}

}  // namespace advbench
