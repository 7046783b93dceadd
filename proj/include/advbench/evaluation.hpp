#ifndef ADVBENCH_EVALUATION_HPP
#define ADVBENCH_EVALUATION_HPP

#include <functional>
#include <string>
#include <vector>

#include "advbench/attacks.hpp"
#include "advbench/dataset.hpp"
#include "advbench/tensor.hpp"

namespace advbench {

// A framework is anything that maps an input to a probability vector: a
// single network, the pure ensemble mean, or the specialists+1 fusion.
using Framework = std::function<Tensor(const Tensor&)>;

constexpr int kReject = -1;

struct ThresholdedDecision {
    int decision = 0;     // class index, or kReject
    int raw_argmax = 0;   // argmax before thresholding
    double confidence = 0.0;

    bool rejected() const { return decision == kReject; }
};

// The decision rule: argmax when the max probability reaches tau, else
// reject. Argmax ties resolve to the lowest class index.
ThresholdedDecision decide(const Tensor& probs, double tau);

// As printed, the clean-set error sums two indicators and a correct sample
// that gets rejected fires both; the capped variant counts such a sample
// once, keeping the error within [0,1].
enum class CleanErrorMode { Literal, Capped };

double error_clean(const Framework& fw, const Dataset& clean_set, double tau,
                   CleanErrorMode mode = CleanErrorMode::Capped);

// Fraction of adversaries both misclassified (vs the true label) and
// accepted.
double error_adv(const Framework& fw, const std::vector<AdversarialExample>& adv_set, double tau);

double rejection_rate(const Framework& fw, const std::vector<Tensor>& inputs, double tau);

struct SweepRow {
    double tau = 0.0;
    double value = 0.0;           // E_D or E_A
    double rejection_rate = 0.0;
};

struct ErrorReport {
    std::string framework_id;
    std::string sample_set_id;
    std::vector<SweepRow> rows;   // tau strictly increasing
};

std::vector<double> default_tau_grid();  // 0.0 .. 1.0 step 0.05

ErrorReport sweep_clean(const Framework& fw, const std::string& framework_id,
                        const Dataset& clean_set, const std::vector<double>& tau_grid,
                        CleanErrorMode mode = CleanErrorMode::Capped);

ErrorReport sweep_adv(const Framework& fw, const std::string& framework_id,
                      const std::string& set_id, const std::vector<AdversarialExample>& adv_set,
                      const std::vector<double>& tau_grid);

struct DensityHistogram {
    std::string framework_id;
    std::string sample_set_id;
    std::vector<double> edges;     // bins+1 edges over [0,1]
    std::vector<double> density;   // normalized counts, sums to 1 when nonempty
    bool empty_set = false;
};

// Histogram of decision confidences. Clean sets are restricted to correctly
// classified samples before binning; adversary sets are not restricted.
DensityHistogram confidence_density_clean(const Framework& fw, const std::string& framework_id,
                                          const Dataset& clean_set, int bins = 20);
DensityHistogram confidence_density_adv(const Framework& fw, const std::string& framework_id,
                                        const std::string& set_id,
                                        const std::vector<AdversarialExample>& adv_set,
                                        int bins = 20);

struct CurveRow {
    double tau = 0.0;
    double rate = 0.0;
};

std::vector<CurveRow> rejection_rate_curve(const Framework& fw, const std::vector<Tensor>& inputs,
                                           const std::vector<double>& tau_grid);

// CSV / SVG emission
std::string error_report_csv(const ErrorReport& report);
std::string density_csv(const std::vector<DensityHistogram>& densities);
std::string curve_csv(const std::string& framework_id, const std::string& set_id,
                      const std::vector<CurveRow>& curve);

// Minimal self-rendered line chart, one polyline per named series.
struct SvgSeries {
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
};
std::string render_line_chart_svg(const std::string& title, const std::vector<SvgSeries>& series);

}  // namespace advbench

#endif
