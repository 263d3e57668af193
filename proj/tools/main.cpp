#include <CLI11.hpp>

#include <string>
#include <vector>

#include "c2l/cli.hpp"

namespace {

std::optional<std::vector<std::uint64_t>> parse_seeds(const std::string& csv) {
    if (csv.empty()) {
        return std::nullopt;
    }
    std::vector<std::uint64_t> seeds;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::string item = csv.substr(pos, comma == std::string::npos
                                                     ? std::string::npos
                                                     : comma - pos);
        if (!item.empty()) {
            seeds.push_back(std::stoull(item));
        }
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    return seeds;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"state-of-charge estimation engine: train, evaluate, benchmark"};
    app.require_subcommand(1);

    // train
    c2l::cli::TrainArgs train_args;
    std::string train_seeds;
    int train_epochs = -1, train_batch = -1, train_stride = -1, val_stride = -1;
    double train_lr = -1.0;
    auto* train = app.add_subcommand("train", "train models, one per seed");
    train->add_option("--config", train_args.config_path, "key = value config file")
        ->envname("C2L_CONFIG");
    train->add_option("--data", train_args.data_dir, "directory of cycle CSVs")->required();
    train->add_option("--out", train_args.out_dir, "output run directory")->required();
    train->add_option("--seeds", train_seeds, "comma-separated seed list");
    train->add_option("--epochs", train_epochs, "override epochs");
    train->add_option("--batch-size", train_batch, "override batch size");
    train->add_option("--lr", train_lr, "override learning rate");
    train->add_option("--stride", train_stride, "training window stride");
    train->add_option("--val-stride", val_stride, "validation window stride");
    train->add_option("--jobs", train_args.jobs, "concurrent seed trainings");

    // eval
    c2l::cli::EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "per-cycle error metrics for a checkpoint");
    eval->add_option("--checkpoint", eval_args.checkpoint, "model checkpoint")->required();
    eval->add_option("--data", eval_args.data_dir, "directory of cycle CSVs")->required();
    eval->add_option("--out", eval_args.out_dir, "directory for metrics/traces");
    eval->add_option("--split", eval_args.split, "train|val|test (default test)");
    eval->add_option("--scaler", eval_args.scaler_path, "scaler json, must match training");
    eval->add_flag("--export-traces", eval_args.export_traces, "write one trace CSV per cycle");

    // bench
    c2l::cli::BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "parameter count, storage and latency");
    bench->add_option("--checkpoint", bench_args.checkpoint, "checkpoint to benchmark");
    bench->add_option("--config", bench_args.config_path, "config for a fresh model")
        ->envname("C2L_CONFIG");
    bench->add_option("--trials", bench_args.trials, "timed forwards (>= 100)");
    bench->add_option("--warmup", bench_args.warmup, "untimed warmup forwards (>= 10)");

    // synth
    c2l::cli::SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate synthetic drive cycles");
    synth->add_option("--out", synth_args.out_dir, "output directory")->required();
    synth->add_option("--cycles", synth_args.cycles, "number of cycles");
    synth->add_option("--seed", synth_args.seed, "generator seed");
    synth->add_option("--ambient", synth_args.ambient_temp_c, "ambient temperature [C]");
    synth->add_option("--style", synth_args.style, "mix|pulse|cruise|constant");
    synth->add_option("--max-duration", synth_args.max_duration_s, "cap per cycle [s]");
    synth->add_option("--period", synth_args.sample_period_s, "sample period [s]");

    // predict
    c2l::cli::PredictArgs predict_args;
    auto* predict = app.add_subcommand("predict", "stream windows from a CSV, one estimate per line");
    predict->add_option("--checkpoint", predict_args.checkpoint, "model checkpoint")->required();
    predict->add_option("--input", predict_args.input_csv, "input cycle CSV")->required();
    predict->add_option("--output", predict_args.output, "output file, '-' for stdout");
    predict->add_option("--stride", predict_args.stride, "window stride");

    CLI11_PARSE(app, argc, argv);

    if (train->parsed()) {
        train_args.seeds = parse_seeds(train_seeds);
        if (train_epochs > 0) train_args.epochs = train_epochs;
        if (train_batch > 0) train_args.batch_size = train_batch;
        if (train_lr > 0) train_args.learning_rate = train_lr;
        if (train_stride > 0) train_args.train_stride = train_stride;
        if (val_stride > 0) train_args.val_stride = val_stride;
        return c2l::cli::cmd_train(train_args);
    }
    if (eval->parsed()) {
        return c2l::cli::cmd_eval(eval_args);
    }
    if (bench->parsed()) {
        return c2l::cli::cmd_bench(bench_args);
    }
    if (synth->parsed()) {
        return c2l::cli::cmd_synth(synth_args);
    }
    if (predict->parsed()) {
        return c2l::cli::cmd_predict(predict_args);
    }
    return 2;
}
