#include "c2l/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace c2l {

MetricEntry MetricsReport::average() const {
    MetricEntry avg;
    avg.cycle = "average";
    if (per_cycle.empty()) {
        return avg;
    }
    for (const MetricEntry& e : per_cycle) {
        avg.mae_pct += e.mae_pct;
        avg.rmse_pct += e.rmse_pct;
        avg.max_pct += e.max_pct;
        avg.count += e.count;
    }
    const Scalar n = static_cast<Scalar>(per_cycle.size());
    avg.mae_pct /= n;
    avg.rmse_pct /= n;
    avg.max_pct /= n;
    return avg;
}

MetricEntry compute_metrics(std::span<const Scalar> preds, std::span<const Scalar> targets,
                            std::string cycle_name) {
    if (preds.empty() || preds.size() != targets.size()) {
        throw ParamError("compute_metrics: need equal, non-empty series (got " +
                         std::to_string(preds.size()) + " and " +
                         std::to_string(targets.size()) + ")");
    }
    Scalar abs_sum = 0.0;
    Scalar sq_sum = 0.0;
    Scalar abs_max = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const Scalar e = preds[i] - targets[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        abs_max = std::max(abs_max, std::abs(e));
    }
    const Scalar n = static_cast<Scalar>(preds.size());
    MetricEntry entry;
    entry.cycle = std::move(cycle_name);
    entry.mae_pct = 100.0 * abs_sum / n;
    entry.rmse_pct = 100.0 * std::sqrt(sq_sum / n);
    entry.max_pct = 100.0 * abs_max;
    entry.count = preds.size();
    return entry;
}

CycleEvaluation evaluate_cycle(const Model& model, const DriveCycleRecord& raw_cycle,
                               const ScalerParams& scaler) {
    const Index window_len = model.config.window_len;
    if (static_cast<Index>(raw_cycle.size()) < window_len) {
        throw DataError("cycle '" + raw_cycle.cycle_name + "': " +
                        std::to_string(raw_cycle.size()) +
                        " samples are fewer than the window length " +
                        std::to_string(window_len));
    }
    const DriveCycleRecord scaled = apply_scaler(raw_cycle, scaler);
    const std::vector<WindowSample> samples = make_windows(scaled, window_len, 1);

    CycleEvaluation out;
    out.trace.t_s.reserve(samples.size());
    out.trace.soc_true.reserve(samples.size());
    out.trace.soc_pred.reserve(samples.size());
    out.trace.error.reserve(samples.size());
    for (const WindowSample& s : samples) {
        const Scalar pred = forward(model, s.materialize(window_len), Mode::eval);
        const std::size_t k = static_cast<std::size_t>(s.end_index);
        out.trace.t_s.push_back(raw_cycle.time_s[k]);
        out.trace.soc_true.push_back(s.target_soc);
        out.trace.soc_pred.push_back(pred);
        out.trace.error.push_back(pred - s.target_soc);
    }
    out.metrics = compute_metrics(out.trace.soc_pred, out.trace.soc_true, raw_cycle.cycle_name);
    return out;
}

MetricsReport evaluate_cycles(const Model& model, std::span<const DriveCycleRecord> raw_cycles,
                              const ScalerParams& scaler) {
    MetricsReport report;
    for (const DriveCycleRecord& cycle : raw_cycles) {
        report.per_cycle.push_back(evaluate_cycle(model, cycle, scaler).metrics);
    }
    return report;
}

void export_trace(const PredictionTrace& trace, std::ostream& out) {
    out << "t_s,soc_true,soc_pred,error\n";
    char buf[160];
    for (std::size_t i = 0; i < trace.t_s.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g", trace.t_s[i],
                      trace.soc_true[i], trace.soc_pred[i], trace.error[i]);
        out << buf << '\n';
    }
}

void export_trace_file(const PredictionTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write trace file '" + path + "'");
    }
    export_trace(trace, out);
    if (!out.good()) {
        throw IoError("write failed for trace file '" + path + "'");
    }
}

void print_metrics_table(const MetricsReport& report, std::ostream& out) {
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%-16s %12s %12s %12s %10s", "cycle", "MAE[%]",
                  "RMSE[%]", "MAX[%]", "samples");
    out << buf << '\n';
    auto line = [&](const MetricEntry& e) {
        std::snprintf(buf, sizeof(buf), "%-16s %12.4f %12.4f %12.4f %10zu", e.cycle.c_str(),
                      e.mae_pct, e.rmse_pct, e.max_pct, e.count);
        out << buf << '\n';
    };
    for (const MetricEntry& e : report.per_cycle) {
        line(e);
    }
    line(report.average());
}

} // namespace c2l
