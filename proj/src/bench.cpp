#include "c2l/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "c2l/rng.hpp"

namespace c2l {

Scalar percentile_nearest_rank(std::vector<Scalar> samples, Scalar percentile) {
    if (samples.empty()) {
        throw ParamError("percentile_nearest_rank: no samples");
    }
    if (percentile <= 0.0 || percentile > 100.0) {
        throw ParamError("percentile_nearest_rank: percentile must lie in (0, 100]");
    }
    std::sort(samples.begin(), samples.end());
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(percentile / 100.0 * static_cast<Scalar>(samples.size())));
    return samples[std::max<std::size_t>(rank, 1) - 1];
}

LatencyReport summarize_latencies(const std::vector<Scalar>& samples_ms) {
    if (samples_ms.empty()) {
        throw ParamError("summarize_latencies: no samples");
    }
    LatencyReport report;
    report.trials = static_cast<int>(samples_ms.size());
    Scalar sum = 0.0;
    for (Scalar v : samples_ms) {
        sum += v;
    }
    report.mean_ms = sum / static_cast<Scalar>(samples_ms.size());
    report.p50_ms = percentile_nearest_rank(samples_ms, 50.0);
    report.p90_ms = percentile_nearest_rank(samples_ms, 90.0);
    report.throughput_per_s = 1000.0 / report.mean_ms;
    return report;
}

LatencyReport benchmark_latency(const Model& model, int trials, int warmup) {
    if (trials < 100) {
        throw ParamError("benchmark_latency: need at least 100 trials");
    }
    if (warmup < 10) {
        throw ParamError("benchmark_latency: need at least 10 warmup runs");
    }
    Rng rng(42);
    Mat window(model.config.window_len, model.config.channels);
    for (Index i = 0; i < window.rows(); ++i) {
        for (Index j = 0; j < window.cols(); ++j) {
            window(i, j) = rng.uniform();
        }
    }

    volatile Scalar sink = 0.0;
    for (int i = 0; i < warmup; ++i) {
        sink = sink + forward(model, window, Mode::eval);
    }

    std::vector<Scalar> samples_ms;
    samples_ms.reserve(static_cast<std::size_t>(trials));
    for (int i = 0; i < trials; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        sink = sink + forward(model, window, Mode::eval);
        const auto t1 = std::chrono::steady_clock::now();
        samples_ms.push_back(std::chrono::duration<Scalar, std::milli>(t1 - t0).count());
    }

    LatencyReport report = summarize_latencies(samples_ms);
    report.warmup = warmup;
    report.hardware_note = hardware_note();
    return report;
}

std::string hardware_note() {
    std::ifstream cpuinfo("/proc/cpuinfo");
    std::string line;
    while (std::getline(cpuinfo, line)) {
        if (line.rfind("model name", 0) == 0) {
            const std::size_t colon = line.find(':');
            if (colon != std::string::npos) {
                return "single-threaded on " + line.substr(colon + 2);
            }
        }
    }
    return "single-threaded CPU";
}

} // namespace c2l
