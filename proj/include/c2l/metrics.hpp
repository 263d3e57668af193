#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "c2l/data.hpp"
#include "c2l/model.hpp"

namespace c2l {

// Errors are reported in percent state of charge.
struct MetricEntry {
    std::string cycle;
    Scalar mae_pct = 0.0;
    Scalar rmse_pct = 0.0;
    Scalar max_pct = 0.0;
    std::size_t count = 0;
};

struct MetricsReport {
    std::vector<MetricEntry> per_cycle;
    // Arithmetic mean of the per-cycle metrics.
    MetricEntry average() const;
};

MetricEntry compute_metrics(std::span<const Scalar> preds, std::span<const Scalar> targets,
                            std::string cycle_name = "");

// Stride-1 predictions over one cycle; the first prediction happens once a
// full window exists, so the time axis starts at (window_len - 1) periods.
struct PredictionTrace {
    std::vector<Scalar> t_s;
    std::vector<Scalar> soc_true;
    std::vector<Scalar> soc_pred;
    std::vector<Scalar> error; // soc_pred - soc_true
};

struct CycleEvaluation {
    PredictionTrace trace;
    MetricEntry metrics;
};

// Scales the raw cycle, slides the window by one sample at a time, and runs
// an eval-mode forward per position.
CycleEvaluation evaluate_cycle(const Model& model, const DriveCycleRecord& raw_cycle,
                               const ScalerParams& scaler);

MetricsReport evaluate_cycles(const Model& model, std::span<const DriveCycleRecord> raw_cycles,
                              const ScalerParams& scaler);

// `t_s,soc_true,soc_pred,error` CSV with round-trip-exact decimal rendering.
void export_trace(const PredictionTrace& trace, std::ostream& out);
void export_trace_file(const PredictionTrace& trace, const std::string& path);

void print_metrics_table(const MetricsReport& report, std::ostream& out);

} // namespace c2l
