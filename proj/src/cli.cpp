#include "c2l/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include <json.hpp>

#include "c2l/bench.hpp"
#include "c2l/checkpoint.hpp"
#include "c2l/config.hpp"
#include "c2l/manifest.hpp"
#include "c2l/metrics.hpp"
#include "c2l/synth.hpp"
#include "c2l/training.hpp"

namespace c2l::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Bad inputs (config, paths, data) exit with 2; internal failures with 1.
template <class Fn>
int run_guarded(Fn&& fn) {
    try {
        fn();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ParamError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

RunConfig resolve_config(const std::string& config_path) {
    std::string path = config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("C2L_CONFIG"); env != nullptr && env[0] != '\0') {
            path = env;
        }
    }
    if (path.empty()) {
        return RunConfig{};
    }
    return parse_run_config(parse_kv_file(path));
}

json config_to_json(const RunConfig& cfg) {
    return json{{"window_len", cfg.model.window_len},
                {"chunks", cfg.model.chunks},
                {"channels", cfg.model.channels},
                {"hidden", cfg.model.hidden},
                {"harmonics", cfg.model.harmonics},
                {"token_len", cfg.model.token_len},
                {"dropout", cfg.model.dropout},
                {"attention_temp", cfg.model.attention_temp},
                {"layernorm_eps", cfg.model.layernorm_eps},
                {"seed", cfg.model.seed},
                {"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"learning_rate", cfg.train.learning_rate},
                {"beta1", cfg.train.beta1},
                {"beta2", cfg.train.beta2},
                {"adam_eps", cfg.train.adam_eps},
                {"weight_decay", cfg.train.weight_decay},
                {"seeds", cfg.train.seeds},
                {"shuffle", cfg.train.shuffle},
                {"train_stride", cfg.train.train_stride},
                {"val_stride", cfg.train.val_stride},
                {"select_best", cfg.train.select_best}};
}

json metrics_to_json(const MetricsReport& report) {
    json cycles = json::array();
    auto entry_to_json = [](const MetricEntry& e) {
        return json{{"cycle", e.cycle},
                    {"mae_pct", e.mae_pct},
                    {"rmse_pct", e.rmse_pct},
                    {"max_pct", e.max_pct},
                    {"samples", e.count}};
    };
    for (const MetricEntry& e : report.per_cycle) {
        cycles.push_back(entry_to_json(e));
    }
    return json{{"cycles", cycles}, {"average", entry_to_json(report.average())}};
}

void write_json_file(const json& doc, const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out << doc.dump(2) << '\n';
}

void write_metrics_files(const MetricsReport& report, const fs::path& dir,
                         const std::string& stem) {
    fs::create_directories(dir);
    write_json_file(metrics_to_json(report), dir / (stem + ".json"));
    std::ofstream table(dir / (stem + ".txt"));
    if (!table) {
        throw IoError("cannot write '" + (dir / (stem + ".txt")).string() + "'");
    }
    print_metrics_table(report, table);
}

bool scaler_equal(const ScalerParams& a, const ScalerParams& b) {
    auto range_equal = [](const ChannelRange& x, const ChannelRange& y) {
        return x.min == y.min && x.max == y.max;
    };
    return range_equal(a.current, b.current) && range_equal(a.voltage, b.voltage) &&
           range_equal(a.temperature, b.temperature);
}

std::vector<const DriveCycleRecord*> pick_split(const LoadedDataset& data,
                                                const std::string& split) {
    const std::vector<DriveCycleRecord>* records = nullptr;
    if (split == "train") {
        records = &data.records.train;
    } else if (split == "val") {
        records = &data.records.val;
    } else if (split == "test") {
        records = &data.records.test;
    } else {
        throw ConfigError("unknown split '" + split + "' (train|val|test)");
    }
    std::vector<const DriveCycleRecord*> out;
    for (const DriveCycleRecord& r : *records) {
        out.push_back(&r);
    }
    return out;
}

} // namespace

int cmd_train(const TrainArgs& args) {
    return run_guarded([&args]() {
        RunConfig cfg = resolve_config(args.config_path);
        if (args.seeds) cfg.train.seeds = *args.seeds;
        if (args.epochs) cfg.train.epochs = *args.epochs;
        if (args.batch_size) cfg.train.batch_size = *args.batch_size;
        if (args.learning_rate) cfg.train.learning_rate = *args.learning_rate;
        if (args.train_stride) cfg.train.train_stride = *args.train_stride;
        if (args.val_stride) cfg.train.val_stride = *args.val_stride;
        cfg.model.validate();
        cfg.train.validate();

        LoadedDataset data = load_dataset(args.data_dir);
        if (data.records.train.empty() || data.records.val.empty()) {
            throw DataError("training needs non-empty train and val splits under '" +
                            args.data_dir + "'");
        }

        const ScalerParams scaler = fit_scaler(data.records.train);

        auto scale_all = [&scaler](const std::vector<DriveCycleRecord>& records) {
            std::vector<DriveCycleRecord> out;
            out.reserve(records.size());
            for (const DriveCycleRecord& r : records) {
                out.push_back(apply_scaler(r, scaler));
            }
            return out;
        };
        WindowDataset train_set = build_window_dataset(
            scale_all(data.records.train), cfg.model.window_len, cfg.train.train_stride);
        WindowDataset val_set = build_window_dataset(
            scale_all(data.records.val), cfg.model.window_len, cfg.train.val_stride);

        const std::string hash = config_hash(cfg);
        const fs::path out_dir(args.out_dir);
        fs::create_directories(out_dir);
        fs::create_directories(out_dir / "logs");
        fs::create_directories(out_dir / "checkpoints");
        fs::create_directories(out_dir / "metrics");

        // Reproducibility record, written before any training step.
        json manifest = {{"tool_version", kToolVersion},
                         {"config_path", args.config_path},
                         {"config_hash", hash},
                         {"config", config_to_json(cfg)},
                         {"data_dir", args.data_dir},
                         {"splits",
                          {{"train", data.catalog.train},
                           {"val", data.catalog.val},
                           {"test", data.catalog.test}}},
                         {"seeds", cfg.train.seeds},
                         {"jobs", args.jobs},
                         {"output_dir", args.out_dir}};
        write_json_file(manifest, out_dir / "manifest.json");
        write_scaler_json(scaler, (out_dir / "scaler.json").string());

        std::map<std::uint64_t, std::unique_ptr<std::ofstream>> logs;
        for (std::uint64_t seed : cfg.train.seeds) {
            auto path = out_dir / "logs" / ("train_seed" + std::to_string(seed) + ".log");
            auto stream = std::make_unique<std::ofstream>(path);
            if (!*stream) {
                throw IoError("cannot write log '" + path.string() + "'");
            }
            logs.emplace(seed, std::move(stream));
        }
        auto log_factory = [&logs](std::uint64_t seed) -> std::ostream* {
            auto it = logs.find(seed);
            return it == logs.end() ? nullptr : it->second.get();
        };

        MultiSeedResult result =
            run_seeds(cfg.model, cfg.train, train_set, val_set, data.records.val, scaler,
                      args.jobs, log_factory);

        for (const SeedRun& run : result.runs) {
            const fs::path seed_dir =
                out_dir / "checkpoints" / (hash.substr(0, 8) + "-seed" + std::to_string(run.seed));
            fs::create_directories(seed_dir);
            save_checkpoint(run.result.model, scaler, (seed_dir / "best.ckpt").string());
            std::printf("seed %llu: best epoch %d, val MSE %.8e\n",
                        static_cast<unsigned long long>(run.seed),
                        run.result.history.best_epoch,
                        run.result.history.best_epoch >= 0
                            ? run.result.history.val_loss[static_cast<std::size_t>(
                                  run.result.history.best_epoch)]
                            : std::numeric_limits<Scalar>::quiet_NaN());
        }

        write_metrics_files(result.averaged, out_dir / "metrics", "validation");
        std::printf("validation metrics (averaged over %zu seed(s)):\n", result.runs.size());
        print_metrics_table(result.averaged, std::cout);
    });
}

int cmd_eval(const EvalArgs& args) {
    return run_guarded([&args]() {
        LoadedCheckpoint ckpt = load_checkpoint(args.checkpoint);

        ScalerParams scaler;
        if (!args.scaler_path.empty()) {
            scaler = read_scaler_json(args.scaler_path);
            if (ckpt.scaler.has_value() && !scaler_equal(scaler, *ckpt.scaler)) {
                throw DataError("leakage guard: scaler file '" + args.scaler_path +
                                "' does not match the scaler fitted on this checkpoint's "
                                "training cycles");
            }
        } else if (ckpt.scaler.has_value()) {
            scaler = *ckpt.scaler;
        } else {
            throw ConfigError("checkpoint has no embedded scaler; pass --scaler");
        }

        LoadedDataset data = load_dataset(args.data_dir);
        const auto cycles = pick_split(data, args.split);
        if (cycles.empty()) {
            throw DataError("split '" + args.split + "' has no cycles under '" +
                            args.data_dir + "'");
        }

        MetricsReport report;
        std::vector<std::pair<std::string, PredictionTrace>> traces;
        for (const DriveCycleRecord* cycle : cycles) {
            CycleEvaluation eval = evaluate_cycle(ckpt.model, *cycle, scaler);
            report.per_cycle.push_back(eval.metrics);
            if (args.export_traces) {
                traces.emplace_back(cycle->cycle_name, std::move(eval.trace));
            }
        }

        print_metrics_table(report, std::cout);
        if (!args.out_dir.empty()) {
            const fs::path out_dir(args.out_dir);
            write_metrics_files(report, out_dir / "metrics", args.split);
            if (args.export_traces) {
                fs::create_directories(out_dir / "traces");
                for (const auto& [name, trace] : traces) {
                    export_trace_file(trace,
                                      (out_dir / "traces" / (name + ".csv")).string());
                }
            }
        } else if (args.export_traces) {
            for (const auto& [name, trace] : traces) {
                export_trace_file(trace, name + ".csv");
            }
        }
    });
}

int cmd_bench(const BenchArgs& args) {
    return run_guarded([&args]() {
        Model model;
        if (!args.checkpoint.empty()) {
            model = load_checkpoint(args.checkpoint).model;
        } else {
            RunConfig cfg = resolve_config(args.config_path);
            model = build_model(cfg.model);
        }

        const std::int64_t params = count_params(model.params);
        const double f64_mb =
            static_cast<double>(storage_bytes(model.params, CheckpointPrecision::f64)) /
            (1024.0 * 1024.0);
        const double f32_mb =
            static_cast<double>(storage_bytes(model.params, CheckpointPrecision::f32)) /
            (1024.0 * 1024.0);
        LatencyReport lat = benchmark_latency(model, args.trials, args.warmup);

        std::printf("parameters      %lld\n", static_cast<long long>(params));
        std::printf("storage (f64)   %.2f MB\n", f64_mb);
        std::printf("storage (f32)   %.2f MB\n", f32_mb);
        std::printf("p50 latency     %.4f ms\n", lat.p50_ms);
        std::printf("p90 latency     %.4f ms\n", lat.p90_ms);
        std::printf("mean latency    %.4f ms\n", lat.mean_ms);
        std::printf("throughput      %.1f inf/s\n", lat.throughput_per_s);
        std::printf("trials          %d (warmup %d)\n", lat.trials, lat.warmup);
        std::printf("hardware        %s\n", lat.hardware_note.c_str());
    });
}

int cmd_synth(const SynthArgs& args) {
    return run_guarded([&args]() {
        if (args.cycles < 1) {
            throw ParamError("synth: need at least one cycle");
        }
        const fs::path out_dir(args.out_dir);
        fs::create_directories(out_dir);

        DataManifest manifest;
        for (int i = 0; i < args.cycles; ++i) {
            SynthConfig cfg;
            cfg.ambient_temp_c = args.ambient_temp_c;
            cfg.max_duration_s = args.max_duration_s;
            cfg.sample_period_s = args.sample_period_s;
            if (args.style == "mix") {
                cfg.style = (i % 2 == 0) ? ProfileStyle::pulse : ProfileStyle::cruise;
            } else {
                cfg.style = profile_style_from_string(args.style);
            }

            char name[64];
            std::snprintf(name, sizeof(name), "%s%02d",
                          to_string(cfg.style) == "pulse"
                              ? "PULSE"
                              : (to_string(cfg.style) == "cruise" ? "CRUISE" : "CONST"),
                          i);
            DriveCycleRecord record =
                synth_drive_cycle(cfg, name, args.seed + static_cast<std::uint64_t>(i));

            char file[96];
            std::snprintf(file, sizeof(file), "%s_%gC.csv", name, args.ambient_temp_c);
            write_cycle_csv_file(record, (out_dir / file).string());

            const int slot = i % 5;
            const std::string split = slot < 3 ? "train" : (slot == 3 ? "val" : "test");
            manifest.entries.push_back(
                DataManifestEntry{file, name, args.ambient_temp_c, split});
            std::printf("wrote %s (%zu samples, split %s)\n", file, record.size(),
                        split.c_str());
        }
        write_data_manifest(manifest, (out_dir / "manifest.json").string());
    });
}

int cmd_predict(const PredictArgs& args) {
    return run_guarded([&args]() {
        LoadedCheckpoint ckpt = load_checkpoint(args.checkpoint);
        if (!ckpt.scaler.has_value()) {
            throw ConfigError("checkpoint has no embedded scaler; cannot scale inputs");
        }
        if (args.stride < 1) {
            throw ParamError("predict: stride must be >= 1");
        }

        std::ifstream in(args.input_csv);
        if (!in) {
            throw IoError("cannot open input '" + args.input_csv + "'");
        }
        CycleMeta meta;
        try {
            meta = meta_from_filename(args.input_csv);
        } catch (const DataError&) {
            meta = CycleMeta{args.input_csv, 25.0};
        }
        DriveCycleRecord record = load_drive_cycle(in, meta, /*require_soc=*/false);
        if (record.soc.empty()) {
            record.soc.assign(record.size(), 0.0); // targets unused for prediction
        }
        DriveCycleRecord scaled = apply_scaler(record, *ckpt.scaler);
        const std::vector<WindowSample> samples =
            make_windows(scaled, ckpt.model.config.window_len, args.stride);

        std::ofstream file_out;
        std::ostream* out = &std::cout;
        if (args.output != "-") {
            file_out.open(args.output);
            if (!file_out) {
                throw IoError("cannot write output '" + args.output + "'");
            }
            out = &file_out;
        }
        char buf[64];
        for (const WindowSample& s : samples) {
            const Scalar soc =
                forward(ckpt.model, s.materialize(ckpt.model.config.window_len), Mode::eval);
            std::snprintf(buf, sizeof(buf), "%.10g", soc);
            *out << buf << '\n';
        }
    });
}

} // namespace c2l::cli
