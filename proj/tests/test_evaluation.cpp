#include <doctest.h>

#include <cmath>

#include "advbench/evaluation.hpp"
#include "test_util.hpp"

using namespace advbench;

namespace {

// frameworks in these tests are lookup tables keyed by a marker pixel
Framework table_framework(std::vector<Tensor> outputs) {
    return [outputs = std::move(outputs)](const Tensor& x) {
        return outputs[static_cast<std::size_t>(x[0])];
    };
}

Tensor probs(std::vector<double> v) { return Tensor::vector(std::move(v)); }

Sample keyed_sample(int key, int label) {
    Tensor x(Shape{1});
    x[0] = key;
    return {x, label};
}

AdversarialExample keyed_adv(int key, int true_label) {
    AdversarialExample ex;
    ex.perturbed = Tensor(Shape{1});
    ex.perturbed[0] = key;
    ex.original = ex.perturbed;
    ex.true_label = true_label;
    return ex;
}

}  // namespace

TEST_CASE("decide: threshold edge cases and hand case") {
    Tensor h = probs({0.6, 0.4});
    ThresholdedDecision d = decide(h, 0.5);
    CHECK(d.decision == 0);
    CHECK(d.confidence == doctest::Approx(0.6));

    CHECK(!decide(h, 0.0).rejected());
    CHECK(decide(h, 1.0 + 1e-9).rejected());
    CHECK(decide(probs({1.0, 0.0}), 1.0 + 1e-9).rejected());

    // argmax tie resolves to the lowest index
    CHECK(decide(probs({0.5, 0.5}), 0.0).decision == 0);
}

TEST_CASE("error_clean: tau 0 is the plain misclassification rate") {
    Dataset set;
    set.num_classes = 2;
    set.samples = {keyed_sample(0, 0), keyed_sample(1, 0), keyed_sample(2, 1)};
    Framework fw = table_framework({probs({0.9, 0.1}), probs({0.2, 0.8}), probs({0.3, 0.7})});
    // predictions: 0 (correct), 1 (wrong), 1 (correct)
    CHECK(error_clean(fw, set, 0.0, CleanErrorMode::Literal) == doctest::Approx(1.0 / 3));
    CHECK(error_clean(fw, set, 0.0, CleanErrorMode::Capped) == doctest::Approx(1.0 / 3));
}

TEST_CASE("error_clean: rejected-but-correct samples, literal vs capped") {
    // all samples correct with confidence 0.9, tau = 0.95 rejects everything
    Dataset set;
    set.num_classes = 2;
    set.samples = {keyed_sample(0, 0), keyed_sample(1, 1)};
    Framework fw = table_framework({probs({0.9, 0.1}), probs({0.1, 0.9})});
    CHECK(error_clean(fw, set, 0.95, CleanErrorMode::Literal) == doctest::Approx(2.0));
    CHECK(error_clean(fw, set, 0.95, CleanErrorMode::Capped) == doctest::Approx(1.0));
}

TEST_CASE("error_clean: N=4 mixed hand case") {
    // two correct-accepted, one wrong-accepted, one correct-rejected
    Dataset set;
    set.num_classes = 2;
    set.samples = {keyed_sample(0, 0), keyed_sample(1, 1), keyed_sample(2, 0),
                   keyed_sample(3, 1)};
    Framework fw = table_framework({probs({0.9, 0.1}), probs({0.1, 0.9}), probs({0.2, 0.8}),
                                    probs({0.45, 0.55})});
    double tau = 0.7;  // sample 3: raw argmax 1 == label, confidence 0.55 -> rejected
    CHECK(error_clean(fw, set, tau, CleanErrorMode::Literal) == doctest::Approx(0.75));
    CHECK(error_clean(fw, set, tau, CleanErrorMode::Capped) == doctest::Approx(0.5));
}

TEST_CASE("error_clean: both modes agree when no correct sample is rejected") {
    Dataset set;
    set.num_classes = 2;
    set.samples = {keyed_sample(0, 0), keyed_sample(1, 1)};
    Framework fw = table_framework({probs({0.95, 0.05}), probs({0.2, 0.8})});
    for (double tau : {0.0, 0.3, 0.6}) {
        CHECK(error_clean(fw, set, tau, CleanErrorMode::Literal) ==
              doctest::Approx(error_clean(fw, set, tau, CleanErrorMode::Capped)));
    }
}

TEST_CASE("error_adv: hand case and threshold extremes") {
    std::vector<AdversarialExample> advs = {keyed_adv(0, 0), keyed_adv(1, 0), keyed_adv(2, 1)};
    Framework fw = table_framework({probs({0.4, 0.6}),    // misclassified, conf 0.6
                                    probs({0.1, 0.9}),    // misclassified, conf 0.9
                                    probs({0.2, 0.8})});  // correct, conf 0.8
    // tau 0.7: first rejected, second misclassified-accepted, third correct-accepted
    CHECK(error_adv(fw, advs, 0.7) == doctest::Approx(1.0 / 3));
    CHECK(error_adv(fw, advs, 0.0) == doctest::Approx(2.0 / 3));
    CHECK(error_adv(fw, advs, 1.0 + 1e-9) == 0.0);
    CHECK_THROWS(error_adv(fw, {}, 0.5));
}

TEST_CASE("sweep: E_A non-increasing, rejection rate non-decreasing") {
    std::vector<AdversarialExample> advs;
    std::vector<Tensor> outputs;
    Rng rng(5);
    for (int i = 0; i < 25; ++i) {
        advs.push_back(keyed_adv(i, static_cast<int>(rng.next_below(2))));
        double p = rng.next_double();
        outputs.push_back(probs({p, 1.0 - p}));
    }
    Framework fw = table_framework(outputs);
    ErrorReport rep = sweep_adv(fw, "fw", "set", advs, default_tau_grid());
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        CHECK(rep.rows[i].value <= rep.rows[i - 1].value + 1e-12);
        CHECK(rep.rows[i].rejection_rate >= rep.rows[i - 1].rejection_rate - 1e-12);
    }
    CHECK(rep.rows.front().tau == 0.0);
}

TEST_CASE("confidence_density: single top-bin mass and normalization") {
    Dataset set;
    set.num_classes = 2;
    set.samples = {keyed_sample(0, 0), keyed_sample(1, 1)};
    Framework sure = table_framework({probs({1.0, 0.0}), probs({0.0, 1.0})});
    DensityHistogram h = confidence_density_clean(sure, "fw", set);
    CHECK(h.density.back() == doctest::Approx(1.0));
    double sum = 0.0;
    for (double d : h.density) sum += d;
    CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("confidence_density: clean set restricted to correctly classified samples") {
    Dataset set;
    set.num_classes = 2;
    set.samples = {keyed_sample(0, 0), keyed_sample(1, 0)};  // second is misclassified
    Framework fw = table_framework({probs({0.52, 0.48}), probs({0.1, 0.9})});
    DensityHistogram h = confidence_density_clean(fw, "fw", set);
    double sum = 0.0;
    for (double d : h.density) sum += d;
    CHECK(sum == doctest::Approx(1.0));
    // the 0.9-confidence misclassified sample is excluded; mass sits in the 0.5-0.55 bin
    CHECK(h.density[10] == doctest::Approx(1.0));
}

TEST_CASE("confidence_density: empty set flagged") {
    Dataset set;
    set.num_classes = 2;
    set.samples = {keyed_sample(0, 1)};  // misclassified -> no correct samples
    Framework fw = table_framework({probs({0.9, 0.1})});
    DensityHistogram h = confidence_density_clean(fw, "fw", set);
    CHECK(h.empty_set);
}

TEST_CASE("rejection_rate_curve: extremes, complement identity, step positions") {
    std::vector<Tensor> inputs;
    for (int i = 0; i < 3; ++i) {
        Tensor x(Shape{1});
        x[0] = i;
        inputs.push_back(x);
    }
    // confidences 0.3, 0.6, 0.8 (four classes so a 0.3 max is possible)
    Framework fw = table_framework({probs({0.3, 0.25, 0.25, 0.2}), probs({0.6, 0.2, 0.1, 0.1}),
                                    probs({0.8, 0.1, 0.05, 0.05})});
    std::vector<double> grid{0.0, 0.2, 0.3, 0.31, 0.6, 0.61, 0.8, 0.81, 1.01};
    auto curve = rejection_rate_curve(fw, inputs, grid);
    CHECK(curve[0].rate == 0.0);                          // tau = 0
    CHECK(curve.back().rate == doctest::Approx(1.0));     // tau > 1
    CHECK(curve[2].rate == 0.0);                          // conf 0.3 >= 0.3 accepted
    CHECK(curve[3].rate == doctest::Approx(1.0 / 3));     // step just past 0.3
    CHECK(curve[5].rate == doctest::Approx(2.0 / 3));     // step just past 0.6
    CHECK(curve[7].rate == doctest::Approx(1.0));         // step just past 0.8
    for (std::size_t i = 0; i < curve.size(); ++i) {
        double acceptance = 1.0 - curve[i].rate;
        std::size_t accepted = 0;
        for (const Tensor& x : inputs)
            if (!decide(fw(x), grid[i]).rejected()) ++accepted;
        CHECK(acceptance == doctest::Approx(static_cast<double>(accepted) / 3));
    }
}

TEST_CASE("csv emitters: header plus one row per entry") {
    ErrorReport rep{"fw", "set", {{0.0, 0.5, 0.0}, {0.5, 0.25, 0.4}}};
    std::string csv = error_report_csv(rep);
    CHECK(csv.find("framework,sample_set,tau,error,rejection_rate\n") == 0);
    CHECK(csv.find("fw,set,0,0.5,0\n") != std::string::npos);
    CHECK(csv.find("fw,set,0.5,0.25,0.4\n") != std::string::npos);

    std::string svg = render_line_chart_svg("t", {{"a", {0.0, 1.0}, {0.0, 1.0}}});
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("polyline") != std::string::npos);
}
