#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace c2l::cli {

inline constexpr const char* kToolVersion = "c2l 1.0.0";

struct TrainArgs {
    std::string config_path; // empty: C2L_CONFIG env or built-in defaults
    std::string data_dir;
    std::string out_dir;
    std::optional<std::vector<std::uint64_t>> seeds;
    std::optional<int> epochs;
    std::optional<int> batch_size;
    std::optional<double> learning_rate;
    std::optional<int> train_stride;
    std::optional<int> val_stride;
    int jobs = 1;
};

struct EvalArgs {
    std::string checkpoint;
    std::string data_dir;
    std::string out_dir;  // optional; metrics/traces are written when set
    std::string split = "test";
    std::string scaler_path; // optional override, must match the checkpoint
    bool export_traces = false;
};

struct BenchArgs {
    std::string checkpoint; // empty: bench a freshly built default model
    std::string config_path;
    int trials = 1000;
    int warmup = 50;
};

struct SynthArgs {
    std::string out_dir;
    int cycles = 10;
    std::uint64_t seed = 7;
    double ambient_temp_c = 25.0;
    std::string style = "mix"; // mix | pulse | cruise | constant
    double max_duration_s = 420.0;
    double sample_period_s = 0.1;
};

struct PredictArgs {
    std::string checkpoint;
    std::string input_csv;
    std::string output = "-"; // "-" streams to stdout
    int stride = 1;
};

int cmd_train(const TrainArgs& args);
int cmd_eval(const EvalArgs& args);
int cmd_bench(const BenchArgs& args);
int cmd_synth(const SynthArgs& args);
int cmd_predict(const PredictArgs& args);

} // namespace c2l::cli
