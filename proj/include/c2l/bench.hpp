#pragma once

#include <string>
#include <vector>

#include "c2l/model.hpp"

namespace c2l {

struct LatencyReport {
    Scalar p50_ms = 0.0;
    Scalar p90_ms = 0.0;
    Scalar mean_ms = 0.0;
    Scalar throughput_per_s = 0.0; // 1000 / mean_ms
    int trials = 0;
    int warmup = 0;
    std::string hardware_note;
};

// Nearest-rank percentile: element ceil(p/100 * n) of the sorted samples.
Scalar percentile_nearest_rank(std::vector<Scalar> samples, Scalar percentile);

// Builds the report from raw per-trial latencies (warmup already excluded);
// no outlier trimming.
LatencyReport summarize_latencies(const std::vector<Scalar>& samples_ms);

// Times single-window eval-mode forwards on one thread with a monotonic
// clock. The probe window is deterministic. trials >= 100, warmup >= 10.
LatencyReport benchmark_latency(const Model& model, int trials, int warmup);

std::string hardware_note();

} // namespace c2l
