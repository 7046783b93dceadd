#ifndef ADVBENCH_ATTACKS_HPP
#define ADVBENCH_ATTACKS_HPP

#include <string>
#include <vector>

#include "advbench/dataset.hpp"
#include "advbench/network.hpp"

namespace advbench {

enum class AttackKind { FGS, DeepFool, BoxMin };

std::string attack_kind_name(AttackKind k);
AttackKind attack_kind_from_name(const std::string& name);

struct AdversarialExample {
    Tensor original;
    Tensor perturbed;
    int true_label = 0;      // label of the clean sample
    int source_prediction = 0;  // source net argmax on perturbed
    AttackKind kind = AttackKind::FGS;
    double distortion = 0.0;
    bool fooled = false;     // source prediction differs from true label
};

struct DeepFoolConfig {
    int max_iterations = 50;
    double overshoot = 0.02;
};

struct BoxMinConfig {
    double penalty_lo = 1e-3;     // search range for the distortion penalty c
    double penalty_hi = 1e3;
    int bisection_steps = 10;
    int descent_iterations = 60;  // projected gradient steps per penalty value
    double step_size = 0.1;
};

struct AttackConfig {
    double fgs_epsilon = 0.25;
    DeepFoolConfig deepfool;
    BoxMinConfig boxmin;
    double target_fool_rate = 1.0;  // tuning criterion
};

// Root-mean-square per-component difference between clean and perturbed.
double distortion(const Tensor& x, const Tensor& x_adv);

// clip(x + eps * sign(grad loss), 0, 1); sign(0) == 0.
Tensor fgs(const Network& net, const Tensor& x, int y, double epsilon);

struct TunedEpsilon {
    double epsilon = 0.0;
    double fool_rate = 0.0;
    bool target_reached = false;
};

// Smallest epsilon on the geometric grid 0.005 * 2^j, j = 0..8, whose FGS
// adversaries reach the target fool rate on the given correctly classified
// samples. Returns the largest grid value (target_reached false) when no
// grid point suffices.
TunedEpsilon tune_epsilon(const Network& net, const std::vector<Sample>& samples,
                          double target_fool_rate);

struct DeepFoolResult {
    Tensor perturbed;
    int iterations = 0;
    bool success = false;  // argmax changed within max_iterations
};

// Iterative multiclass linearization over the pre-softmax logits. The final
// perturbation is scaled by (1 + overshoot) and clipped to [0,1].
DeepFoolResult deepfool(const Network& net, const Tensor& x, const DeepFoolConfig& cfg);

struct BoxMinResult {
    Tensor perturbed;
    bool success = false;  // misclassified as the target
    double penalty = 0.0;  // c that produced the returned adversary
};

// Approximate minimum-perturbation targeted attack: projected gradient
// descent on c*|r|^2 + loss(x + r, target) inside [0,1], with bisection over
// c for the largest penalty that still misclassifies. A target of -1 selects
// the runner-up class of net(x).
BoxMinResult box_min_perturbation(const Network& net, const Tensor& x, int y, int target,
                                  const BoxMinConfig& cfg);

// Filters the dataset to correctly classified samples, attacks each one and
// records distortion plus the source prediction. With fooling_only, keeps
// only successful fools (confusion-matrix use); otherwise keeps every
// generated example (evaluation use).
std::vector<AdversarialExample> generate_adversary_set(const Network& net, const Dataset& data,
                                                       AttackKind kind, const AttackConfig& cfg,
                                                       bool fooling_only = false);

}  // namespace advbench

#endif
