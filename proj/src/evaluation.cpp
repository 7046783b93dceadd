#include "advbench/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace advbench {

namespace {

// Fixed-precision float formatting keeps CSV output byte-stable across runs.
std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

ThresholdedDecision decide(const Tensor& probs, double tau) {
    ThresholdedDecision d;
    d.raw_argmax = static_cast<int>(probs.argmax());
    d.confidence = probs[static_cast<std::size_t>(d.raw_argmax)];
    d.decision = (d.confidence >= tau) ? d.raw_argmax : kReject;
    return d;
}

double error_clean(const Framework& fw, const Dataset& clean_set, double tau,
                   CleanErrorMode mode) {
    if (clean_set.empty()) throw std::invalid_argument("error_clean: empty sample set");
    double sum = 0.0;
    for (const Sample& s : clean_set.samples) {
        ThresholdedDecision d = decide(fw(s.image), tau);
        int wrong = d.decision != s.label ? 1 : 0;
        int correct_rejected = (d.rejected() && d.raw_argmax == s.label) ? 1 : 0;
        sum += (mode == CleanErrorMode::Literal) ? wrong + correct_rejected
                                                 : std::max(wrong, correct_rejected);
    }
    return sum / static_cast<double>(clean_set.size());
}

double error_adv(const Framework& fw, const std::vector<AdversarialExample>& adv_set, double tau) {
    if (adv_set.empty()) throw std::invalid_argument("error_adv: empty adversary set");
    std::size_t count = 0;
    for (const AdversarialExample& ex : adv_set) {
        ThresholdedDecision d = decide(fw(ex.perturbed), tau);
        if (!d.rejected() && d.decision != ex.true_label) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(adv_set.size());
}

double rejection_rate(const Framework& fw, const std::vector<Tensor>& inputs, double tau) {
    if (inputs.empty()) throw std::invalid_argument("rejection_rate: empty input set");
    std::size_t rejected = 0;
    for (const Tensor& x : inputs)
        if (decide(fw(x), tau).rejected()) ++rejected;
    return static_cast<double>(rejected) / static_cast<double>(inputs.size());
}

std::vector<double> default_tau_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(0.05 * i);
    return grid;
}

namespace {

void check_grid(const std::vector<double>& grid) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw std::invalid_argument("tau grid must be strictly increasing");
}

}  // namespace

ErrorReport sweep_clean(const Framework& fw, const std::string& framework_id,
                        const Dataset& clean_set, const std::vector<double>& tau_grid,
                        CleanErrorMode mode) {
    check_grid(tau_grid);
    std::vector<Tensor> inputs;
    for (const Sample& s : clean_set.samples) inputs.push_back(s.image);
    ErrorReport report{framework_id, "clean", {}};
    for (double tau : tau_grid)
        report.rows.push_back({tau, error_clean(fw, clean_set, tau, mode),
                               rejection_rate(fw, inputs, tau)});
    return report;
}

ErrorReport sweep_adv(const Framework& fw, const std::string& framework_id,
                      const std::string& set_id, const std::vector<AdversarialExample>& adv_set,
                      const std::vector<double>& tau_grid) {
    check_grid(tau_grid);
    std::vector<Tensor> inputs;
    for (const AdversarialExample& ex : adv_set) inputs.push_back(ex.perturbed);
    ErrorReport report{framework_id, set_id, {}};
    for (double tau : tau_grid)
        report.rows.push_back({tau, error_adv(fw, adv_set, tau), rejection_rate(fw, inputs, tau)});
    return report;
}

namespace {

DensityHistogram make_histogram(const std::string& framework_id, const std::string& set_id,
                                const std::vector<double>& confidences, int bins) {
    if (bins <= 0) throw std::invalid_argument("confidence_density: bins must be positive");
    DensityHistogram h;
    h.framework_id = framework_id;
    h.sample_set_id = set_id;
    for (int i = 0; i <= bins; ++i) h.edges.push_back(static_cast<double>(i) / bins);
    h.density.assign(static_cast<std::size_t>(bins), 0.0);
    if (confidences.empty()) {
        h.empty_set = true;
        return h;
    }
    for (double c : confidences) {
        // right-closed last bin: confidence 1.0 lands in the top bin
        int b = std::min(bins - 1, static_cast<int>(std::floor(c * bins)));
        h.density[static_cast<std::size_t>(std::max(0, b))] += 1.0;
    }
    for (double& d : h.density) d /= static_cast<double>(confidences.size());
    return h;
}

}  // namespace

DensityHistogram confidence_density_clean(const Framework& fw, const std::string& framework_id,
                                          const Dataset& clean_set, int bins) {
    std::vector<double> confidences;
    for (const Sample& s : clean_set.samples) {
        ThresholdedDecision d = decide(fw(s.image), 0.0);
        if (d.raw_argmax == s.label) confidences.push_back(d.confidence);
    }
    return make_histogram(framework_id, "clean-correct", confidences, bins);
}

DensityHistogram confidence_density_adv(const Framework& fw, const std::string& framework_id,
                                        const std::string& set_id,
                                        const std::vector<AdversarialExample>& adv_set, int bins) {
    std::vector<double> confidences;
    for (const AdversarialExample& ex : adv_set)
        confidences.push_back(decide(fw(ex.perturbed), 0.0).confidence);
    return make_histogram(framework_id, set_id, confidences, bins);
}

std::vector<CurveRow> rejection_rate_curve(const Framework& fw, const std::vector<Tensor>& inputs,
                                           const std::vector<double>& tau_grid) {
    check_grid(tau_grid);
    std::vector<CurveRow> curve;
    for (double tau : tau_grid) curve.push_back({tau, rejection_rate(fw, inputs, tau)});
    return curve;
}

std::string error_report_csv(const ErrorReport& report) {
    std::string out = "framework,sample_set,tau,error,rejection_rate\n";
    for (const SweepRow& r : report.rows)
        out += report.framework_id + "," + report.sample_set_id + "," + fmt(r.tau) + "," +
               fmt(r.value) + "," + fmt(r.rejection_rate) + "\n";
    return out;
}

std::string density_csv(const std::vector<DensityHistogram>& densities) {
    std::string out = "framework,sample_set,bin_low,bin_high,density\n";
    for (const DensityHistogram& h : densities)
        for (std::size_t b = 0; b + 1 < h.edges.size(); ++b)
            out += h.framework_id + "," + h.sample_set_id + "," + fmt(h.edges[b]) + "," +
                   fmt(h.edges[b + 1]) + "," + fmt(h.density[b]) + "\n";
    return out;
}

std::string curve_csv(const std::string& framework_id, const std::string& set_id,
                      const std::vector<CurveRow>& curve) {
    std::string out = "framework,sample_set,tau,rejection_rate\n";
    for (const CurveRow& r : curve)
        out += framework_id + "," + set_id + "," + fmt(r.tau) + "," + fmt(r.rate) + "\n";
    return out;
}

std::string render_line_chart_svg(const std::string& title, const std::vector<SvgSeries>& series) {
    const double width = 640, height = 420, margin = 60;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    for (const SvgSeries& s : series)
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            xmin = std::min(xmin, s.xs[i]);
            xmax = std::max(xmax, s.xs[i]);
            ymax = std::max(ymax, s.ys[i]);
        }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    auto sx = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
    auto sy = [&](double y) { return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin); };

    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) +
                      "\" height=\"" + fmt(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt(width / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
           title + "</text>\n";
    svg += "<line x1=\"" + fmt(margin) + "\" y1=\"" + fmt(height - margin) + "\" x2=\"" +
           fmt(width - margin) + "\" y2=\"" + fmt(height - margin) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt(margin) + "\" y1=\"" + fmt(margin) + "\" x2=\"" + fmt(margin) +
           "\" y2=\"" + fmt(height - margin) + "\" stroke=\"black\"/>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const SvgSeries& s = series[si];
        std::string pts;
        for (std::size_t i = 0; i < s.xs.size(); ++i)
            pts += fmt(sx(s.xs[i])) + "," + fmt(sy(s.ys[i])) + " ";
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(colors[si % 6]) +
               "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
        svg += "<text x=\"" + fmt(width - margin + 4) + "\" y=\"" + fmt(margin + 18.0 * si) +
               "\" font-size=\"11\" fill=\"" + colors[si % 6] + "\">" + s.label + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace advbench
