#include "advbench/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace advbench {

std::string attack_kind_name(AttackKind k) {
    switch (k) {
        case AttackKind::FGS: return "fgs";
        case AttackKind::DeepFool: return "deepfool";
        case AttackKind::BoxMin: return "boxmin";
    }
    throw std::logic_error("unknown AttackKind");
}

AttackKind attack_kind_from_name(const std::string& name) {
    if (name == "fgs") return AttackKind::FGS;
    if (name == "deepfool") return AttackKind::DeepFool;
    if (name == "boxmin") return AttackKind::BoxMin;
    throw std::invalid_argument("unknown attack kind: " + name);
}

namespace {

double clip01(double v) { return std::min(1.0, std::max(0.0, v)); }

int runner_up_class(const Tensor& probs) {
    std::size_t best = probs.argmax();
    int second = -1;
    double sv = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < probs.size(); ++i)
        if (i != best && probs[i] > sv) {
            sv = probs[i];
            second = static_cast<int>(i);
        }
    return second;
}

}  // namespace

double distortion(const Tensor& x, const Tensor& x_adv) {
    x.require_same_shape(x_adv);
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - x_adv[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(x.size()));
}

Tensor fgs(const Network& net, const Tensor& x, int y, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("fgs: epsilon must be nonnegative");
    Tensor grad = net.input_gradient(x, y);
    Tensor out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = (grad[i] > 0.0) ? 1.0 : (grad[i] < 0.0 ? -1.0 : 0.0);
        out[i] = clip01(out[i] + epsilon * s);
    }
    return out;
}

TunedEpsilon tune_epsilon(const Network& net, const std::vector<Sample>& samples,
                          double target_fool_rate) {
    if (samples.empty()) throw std::invalid_argument("tune_epsilon: empty sample set");
    TunedEpsilon result;
    for (int j = 0; j <= 8; ++j) {
        double eps = 0.005 * std::pow(2.0, j);
        std::size_t fooled = 0;
        for (const Sample& s : samples)
            if (net.predict(fgs(net, s.image, s.label, eps)) != s.label) ++fooled;
        double rate = static_cast<double>(fooled) / static_cast<double>(samples.size());
        result.epsilon = eps;
        result.fool_rate = rate;
        if (rate >= target_fool_rate) {
            result.target_reached = true;
            return result;
        }
    }
    result.target_reached = false;  // largest grid value, with warning flag
    return result;
}

DeepFoolResult deepfool(const Network& net, const Tensor& x, const DeepFoolConfig& cfg) {
    if (cfg.max_iterations < 1) throw std::invalid_argument("deepfool: max_iterations >= 1");
    const int K = net.num_classes();
    const int k0 = net.predict(x);

    Tensor cur = x;
    Tensor total(x.shape());  // accumulated perturbation before overshoot
    DeepFoolResult result;
    result.perturbed = x;

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        Tensor logits = net.logits(cur);
        if (static_cast<int>(logits.argmax()) != k0) {
            result.success = true;
            break;
        }
        ++result.iterations;

        std::vector<double> seed(static_cast<std::size_t>(K), 0.0);
        seed[static_cast<std::size_t>(k0)] = 1.0;
        Tensor grad_k0 = net.logit_input_gradient(cur, seed);

        double best_ratio = std::numeric_limits<double>::infinity();
        Tensor best_w;
        double best_fdiff = 0.0;
        for (int k = 0; k < K; ++k) {
            if (k == k0) continue;
            std::fill(seed.begin(), seed.end(), 0.0);
            seed[static_cast<std::size_t>(k)] = 1.0;
            Tensor w = net.logit_input_gradient(cur, seed) - grad_k0;
            double wnorm = std::sqrt(w.squared_norm());
            if (wnorm < 1e-12) continue;
            double fdiff = std::abs(logits[static_cast<std::size_t>(k)] -
                                    logits[static_cast<std::size_t>(k0)]);
            double ratio = fdiff / wnorm;
            if (ratio < best_ratio) {
                best_ratio = ratio;
                best_w = std::move(w);
                best_fdiff = fdiff;
            }
        }
        if (best_w.empty()) break;  // all boundary gradients vanish

        double scale = (best_fdiff + 1e-4) / best_w.squared_norm();
        Tensor step = best_w * scale;
        total += step;
        cur += step;
    }

    if (!result.success && result.iterations == cfg.max_iterations &&
        static_cast<int>(net.logits(cur).argmax()) != k0)
        result.success = true;

    Tensor out = x + total * (1.0 + cfg.overshoot);
    for (double& v : out.data()) v = clip01(v);
    result.perturbed = std::move(out);
    return result;
}

BoxMinResult box_min_perturbation(const Network& net, const Tensor& x, int y, int target,
                                  const BoxMinConfig& cfg) {
    if (target == -1) target = runner_up_class(net.forward(x));
    if (target == y) throw std::invalid_argument("box_min_perturbation: target equals true label");
    if (target < 0 || target >= net.num_classes())
        throw std::invalid_argument("box_min_perturbation: target out of range");

    auto attempt = [&](double c) -> std::pair<bool, Tensor> {
        Tensor cur = x;
        for (int it = 0; it < cfg.descent_iterations; ++it) {
            // gradient of c*|cur-x|^2 + loss(cur, target)
            Tensor grad = net.input_gradient(cur, target);
            for (std::size_t i = 0; i < grad.size(); ++i)
                grad[i] += 2.0 * c * (cur[i] - x[i]);
            for (std::size_t i = 0; i < cur.size(); ++i)
                cur[i] = clip01(cur[i] - cfg.step_size * grad[i]);
        }
        return {net.predict(cur) == target, cur};
    };

    BoxMinResult best;
    double best_dist = std::numeric_limits<double>::infinity();
    auto consider = [&](double c, const std::pair<bool, Tensor>& r) {
        if (!r.first) return;
        double d = distortion(x, r.second);
        if (d < best_dist) {
            best_dist = d;
            best.perturbed = r.second;
            best.success = true;
            best.penalty = c;
        }
    };

    // Bisect in log space for the largest penalty that still misclassifies.
    double lo = cfg.penalty_lo, hi = cfg.penalty_hi;
    auto r_lo = attempt(lo);
    consider(lo, r_lo);
    if (!r_lo.first) {
        best.perturbed = r_lo.second;
        return best;  // even the weakest penalty fails; flagged failure
    }
    auto r_hi = attempt(hi);
    consider(hi, r_hi);
    if (!r_hi.first) {
        for (int step = 0; step < cfg.bisection_steps; ++step) {
            double mid = std::sqrt(lo * hi);
            auto r = attempt(mid);
            consider(mid, r);
            if (r.first)
                lo = mid;
            else
                hi = mid;
        }
    }
    return best;
}

std::vector<AdversarialExample> generate_adversary_set(const Network& net, const Dataset& data,
                                                       AttackKind kind, const AttackConfig& cfg,
                                                       bool fooling_only) {
    std::vector<AdversarialExample> out;
    for (const Sample& s : data.samples) {
        if (net.predict(s.image) != s.label) continue;

        Tensor adv;
        switch (kind) {
            case AttackKind::FGS:
                adv = fgs(net, s.image, s.label, cfg.fgs_epsilon);
                break;
            case AttackKind::DeepFool:
                adv = deepfool(net, s.image, cfg.deepfool).perturbed;
                break;
            case AttackKind::BoxMin: {
                BoxMinResult r = box_min_perturbation(net, s.image, s.label, -1, cfg.boxmin);
                if (!r.success) continue;
                adv = std::move(r.perturbed);
                break;
            }
        }

        AdversarialExample ex;
        ex.original = s.image;
        ex.true_label = s.label;
        ex.source_prediction = net.predict(adv);
        ex.kind = kind;
        ex.distortion = distortion(s.image, adv);
        ex.perturbed = std::move(adv);
        ex.fooled = ex.source_prediction != ex.true_label;
        if (fooling_only && !ex.fooled) continue;
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace advbench
