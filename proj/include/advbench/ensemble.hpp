#ifndef ADVBENCH_ENSEMBLE_HPP
#define ADVBENCH_ENSEMBLE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "advbench/attacks.hpp"
#include "advbench/network.hpp"
#include "advbench/train.hpp"

namespace advbench {

// Rows are the true class of an adversary, columns the fooled-into class.
struct ConfusionMatrix {
    int num_classes = 0;
    std::vector<std::vector<std::int64_t>> counts;  // K x K

    explicit ConfusionMatrix(int k = 0)
        : num_classes(k),
          counts(static_cast<std::size_t>(k),
                 std::vector<std::int64_t>(static_cast<std::size_t>(k), 0)) {}

    std::int64_t& at(int row, int col) {
        return counts[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
    }
    std::int64_t at(int row, int col) const {
        return counts[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
    }
};

enum class SubsetOrigin { Confusing, Complement, Generalist };

std::string subset_origin_name(SubsetOrigin o);
SubsetOrigin subset_origin_from_name(const std::string& name);

struct ClassSubset {
    std::vector<int> classes;  // ascending, nonempty
    SubsetOrigin origin = SubsetOrigin::Generalist;
    int source_row = -1;  // confusion-matrix row for confusing/complement subsets

    bool contains(int c) const;
    bool same_classes(const ClassSubset& o) const { return classes == o.classes; }
};

struct EnsembleSpec {
    int num_classes = 0;
    double coverage = 0.8;
    std::vector<ClassSubset> subsets;        // deduplicated, M <= 2K+1
    std::vector<int> expected_votes;         // m_k = |{U containing c_k}| after dedup

    std::size_t size() const { return subsets.size(); }
};

// Builds the adversarial confusion matrix from per-class FGS adversaries of
// correctly classified training samples. Samples are drawn uniformly without
// replacement per class; only successful fools are counted.
ConfusionMatrix build_confusion_matrix(const Network& source_net, const Dataset& train_data,
                                       int per_class_count, double epsilon,
                                       std::uint64_t draw_seed = 1);

// The subset rule: per row, classes in descending off-diagonal confusion
// order (ties to the lower class index) until at least coverage of the
// off-diagonal row sum is reached -> U_i; complement U_{i+K}; generalist
// appended last; duplicate subsets removed keeping the first occurrence.
EnsembleSpec derive_subsets(const ConfusionMatrix& cm, double coverage = 0.8);

// A specialist wraps a network whose softmax spans only its subset classes;
// predictions embed into a K-vector with zeros outside the subset.
struct SpecialistMember {
    ClassSubset subset;
    int num_classes = 0;  // full K of the original problem
    Network net;

    // K-length vector: zero outside the subset, sums to 1 over it.
    Tensor predict_full(const Tensor& x) const;
};

// Trains one member on the dataset filtered to subset classes. The network
// config's final dense+softmax width is adjusted to |subset|.
SpecialistMember train_specialist(const ClassSubset& subset, const Dataset& data,
                                  const NetworkConfig& net_cfg, const TrainConfig& train_cfg);

struct SpecialistsEnsemble {
    EnsembleSpec spec;
    std::vector<SpecialistMember> members;  // one per subset, same order
};

SpecialistsEnsemble build_specialists_ensemble(const EnsembleSpec& spec, const Dataset& data,
                                               const NetworkConfig& net_cfg,
                                               const TrainConfig& train_cfg,
                                               std::uint64_t member_base_seed);

struct VoteResult {
    std::vector<int> votes;          // per class, sums to M
    int winner = 0;                  // argmax votes, ties to lowest index
    bool agreement = false;          // winner reached its expected vote count
    std::vector<std::size_t> activated;  // member indices used for fusion
    Tensor fused;                    // final prediction, sums to 1
    double confidence = 0.0;         // max of fused
};

// The voting mechanism: each member votes its argmax class; if the winner
// collects every expected vote m_{k*}, only members whose subset contains the
// winner are averaged, else all members are.
VoteResult vote(const SpecialistsEnsemble& ens, const Tensor& x);

// Generalists differing only by seed, fused by uniform probability averaging.
struct PureEnsemble {
    std::vector<Network> members;

    Tensor predict_mean(const Tensor& x) const;
};

PureEnsemble build_pure_ensemble(const Dataset& data, const NetworkConfig& net_cfg,
                                 const TrainConfig& train_cfg,
                                 const std::vector<std::uint64_t>& seeds);

}  // namespace advbench

#endif
