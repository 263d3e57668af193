// Acceptance suite: one self-contained check per release criterion, each
// printing a single PASS/FAIL line. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>
#include <unistd.h>

#include "c2l/bench.hpp"
#include "c2l/checkpoint.hpp"
#include "c2l/gradcheck.hpp"
#include "c2l/metrics.hpp"
#include "c2l/model.hpp"
#include "c2l/rng.hpp"
#include "c2l/synth.hpp"
#include "c2l/training.hpp"

using namespace c2l;
namespace fs = std::filesystem;

namespace {

int failures = 0;
std::string detail;

void check(bool ok, const std::string& message) {
    if (!ok && detail.empty()) {
        detail = message;
    }
}

void run_criterion(int number, const char* name, const std::function<void()>& body) {
    detail.clear();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const std::exception& e) {
        if (detail.empty()) {
            detail = std::string("exception: ") + e.what();
        }
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = detail.empty();
    failures += !ok;
    std::printf("criterion %2d [%-24s] %s (%.1fs)%s%s\n", number, name,
                ok ? "PASS" : "FAIL", seconds, ok ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
}

Mat random_window(Index rows, Index cols, Rng& rng) {
    Mat w(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            w(i, j) = rng.uniform();
        }
    }
    return w;
}

ModelConfig small_config(std::uint64_t seed) {
    ModelConfig cfg;
    cfg.window_len = 40;
    cfg.chunks = 5;
    cfg.hidden = 16;
    cfg.harmonics = 3;
    cfg.dropout = 0.0;
    cfg.seed = seed;
    return cfg;
}

// 2 profile styles x `seeds_per_style` noise seeds, plus one held-out pair.
std::vector<DriveCycleRecord> make_cycles(int seeds_per_style, std::uint64_t base_seed,
                                          const char* tag) {
    std::vector<DriveCycleRecord> cycles;
    for (int s = 0; s < seeds_per_style; ++s) {
        for (ProfileStyle style : {ProfileStyle::pulse, ProfileStyle::cruise}) {
            SynthConfig cfg;
            cfg.style = style;
            cfg.max_duration_s = 420.0;
            const std::string name = std::string(tag) + "-" + to_string(style) + "-" +
                                     std::to_string(s);
            cycles.push_back(
                synth_drive_cycle(cfg, name, base_seed + 2 * s + (style == ProfileStyle::cruise)));
        }
    }
    return cycles;
}

WindowDataset scaled_windows(const std::vector<DriveCycleRecord>& raw,
                             const ScalerParams& scaler, Index window_len, Index stride) {
    std::vector<DriveCycleRecord> scaled;
    scaled.reserve(raw.size());
    for (const DriveCycleRecord& r : raw) {
        scaled.push_back(apply_scaler(r, scaler));
    }
    return build_window_dataset(std::move(scaled), window_len, stride);
}

// --------------------------------------------------------------------------

void criterion_parameter_count() {
    Model model = build_model(ModelConfig{});
    const std::int64_t count = count_params(model.params);
    check(count == 161347,
          "count_params(default) = " + std::to_string(count) + ", expected 161347");
}

void criterion_shape_trace() {
    Model model = build_model(ModelConfig{});
    Rng rng(2024);
    const Index batch = 2;

    const std::vector<std::pair<std::string, std::vector<Index>>> expected = {
        {"input", {batch, 200, 3}},
        {"chunked", {batch, 5, 40, 3}},
        {"coefficients_current", {batch, 5, 21}},
        {"coefficients_voltage", {batch, 5, 21}},
        {"coefficients_temperature", {batch, 5, 21}},
        {"token_current", {batch, 5, 1}},
        {"token_voltage", {batch, 5, 1}},
        {"token_temperature", {batch, 5, 1}},
        {"token_sequence", {batch, 5, 3}},
        {"recurrent_hidden", {batch, 5, 128}},
        {"attended", {batch, 5, 128}},
        {"context", {batch, 128}},
        {"decoder_state", {batch, 128}},
        {"estimate", {batch, 1}},
    };

    // one trace per batch element; the batch axis is the element count
    std::vector<ShapeTrace> traces(batch);
    for (Index b = 0; b < batch; ++b) {
        forward(model, random_window(200, 3, rng), Mode::eval, nullptr, &traces[b]);
    }
    for (const auto& [name, want] : expected) {
        for (Index b = 0; b < batch; ++b) {
            const ShapeTrace& trace = traces[b];
            bool found = false;
            for (const auto& stage : trace.stages) {
                if (stage.name != name) {
                    continue;
                }
                found = true;
                std::vector<Index> got = {batch};
                got.insert(got.end(), stage.dims.begin(), stage.dims.end());
                check(got == want, "stage " + name + " has unexpected shape");
            }
            check(found, "stage " + name + " missing from trace");
        }
    }
}

void criterion_causality() {
    Rng rng(7);
    int checked_pairs = 0;
    for (int pair = 0; pair < 100; ++pair) {
        ModelConfig cfg = small_config(1000 + pair);
        cfg.hidden = 8 + static_cast<int>(rng.below(16));
        Model model = build_model(cfg);
        Mat window = random_window(cfg.window_len, 3, rng);

        // (a) exact zeros above the causal diagonal
        ShapeTrace trace;
        forward(model, window, Mode::eval, nullptr, &trace);
        for (Index i = 0; i < trace.attention.rows(); ++i) {
            for (Index j = i + 1; j < trace.attention.cols(); ++j) {
                check(trace.attention(i, j) == 0.0, "attention leaks above the diagonal");
            }
        }

        // (b) perturbing token row j leaves earlier hidden/attended rows
        // bit-identical
        ModelValues values = bind_params(model.params, false);
        Value tokens = extract_tokens(
            Value::constant(window),
            {&values.current, &values.voltage, &values.temperature},
            Value::constant(model.basis.table), cfg.chunks);
        Value hidden = gru_forward(tokens, values.encoder_gru);
        Value attended = causal_cosine_attention(hidden, cfg.attention_temp);

        Mat z = tokens.val();
        const Index j = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(z.rows() - 1)));
        Mat z2 = z;
        z2.row(j).array() += rng.uniform(0.05, 1.0);
        Value hidden2 = gru_forward(Value::constant(z2), values.encoder_gru);
        Value attended2 = causal_cosine_attention(hidden2, cfg.attention_temp);
        for (Index i = 0; i < j; ++i) {
            check(hidden.val().row(i) == hidden2.val().row(i),
                  "hidden state before the perturbed token changed");
            check(attended.val().row(i) == attended2.val().row(i),
                  "attended state before the perturbed token changed");
        }
        ++checked_pairs;
    }
    check(checked_pairs == 100, "expected 100 random pairs");

    // (c) prefix truncation: predictions never consume future samples
    SynthConfig sc;
    sc.max_duration_s = 12.0;
    DriveCycleRecord cycle = synth_drive_cycle(sc, "CAUSAL", 17);
    ScalerParams scaler = fit_scaler(std::span(&cycle, 1));
    for (int m = 0; m < 3; ++m) {
        Model model = build_model(small_config(50 + m));
        CycleEvaluation full = evaluate_cycle(model, cycle, scaler);
        DriveCycleRecord prefix = cycle;
        const std::size_t cut = cycle.size() - 30;
        prefix.time_s.resize(cut);
        prefix.current_a.resize(cut);
        prefix.voltage_v.resize(cut);
        prefix.temperature_c.resize(cut);
        prefix.soc.resize(cut);
        CycleEvaluation head = evaluate_cycle(model, prefix, scaler);
        for (std::size_t i = 0; i < head.trace.soc_pred.size(); ++i) {
            check(head.trace.soc_pred[i] == full.trace.soc_pred[i],
                  "prefix prediction differs from full-series prediction");
        }
    }
}

void criterion_gradient_oracle() {
    ModelConfig cfg;
    cfg.window_len = 40;
    cfg.chunks = 5;
    cfg.hidden = 8;
    cfg.harmonics = 2;
    cfg.dropout = 0.0;
    cfg.seed = 99;
    Model model = build_model(cfg);

    Rng rng(11);
    std::vector<Mat> windows;
    Mat targets(4, 1);
    for (int i = 0; i < 4; ++i) {
        windows.push_back(random_window(cfg.window_len, 3, rng));
        targets(i, 0) = rng.uniform();
    }

    auto loss_value = [&]() {
        ModelValues values = bind_params(model.params, false);
        std::vector<Value> preds;
        for (const Mat& w : windows) {
            preds.push_back(forward_graph(values, model.basis, model.config,
                                          Value::constant(w), Mode::eval, nullptr));
        }
        return mse_loss(concat_rows(preds), targets).val()(0, 0);
    };

    // analytic gradients
    ModelValues leaves = bind_params(model.params, true);
    std::vector<Value> preds;
    for (const Mat& w : windows) {
        preds.push_back(forward_graph(leaves, model.basis, model.config,
                                      Value::constant(w), Mode::eval, nullptr));
    }
    backward(mse_loss(concat_rows(preds), targets));

    std::vector<Mat> grads;
    std::vector<NamedLeaf> leaf_list = collect_leaves(leaves);
    for (const NamedLeaf& l : leaf_list) {
        grads.push_back(l.leaf->grad());
    }
    std::vector<NamedTensor> tensors = collect_tensors(model.params);
    std::vector<GradCheckEntry> entries;
    std::int64_t coords = 0;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        entries.push_back({tensors[i].name, tensors[i].tensor, &grads[i]});
        coords += tensors[i].tensor->size();
    }
    check(coords == 1075, "expected 1075 parameters in the small config, got " +
                              std::to_string(coords));

    GradCheckResult result = finite_difference_check(loss_value, entries, 1e-5);
    check(result.max_rel_error < 1e-4,
          "max relative error " + std::to_string(result.max_rel_error) + " at " +
              result.worst_tensor);
}

void criterion_range_and_determinism() {
    // output range over 100k random eval forwards
    Rng rng(5);
    std::int64_t done = 0;
    for (int m = 0; m < 50; ++m) {
        ModelConfig cfg = small_config(3000 + m);
        cfg.hidden = 4 + static_cast<int>(rng.below(20));
        Model model = build_model(cfg);
        for (int w = 0; w < 2000; ++w) {
            const Scalar soc = forward(model, random_window(cfg.window_len, 3, rng));
            if (!(soc > 0.0 && soc < 1.0)) {
                check(false, "estimate " + std::to_string(soc) + " outside (0, 1)");
                return;
            }
            ++done;
        }
    }
    check(done == 100000, "expected 100000 forwards");

    // bit-identical checkpoints from two identical training runs
    std::vector<DriveCycleRecord> raw = make_cycles(1, 900, "MEM");
    ScalerParams scaler = fit_scaler(raw);
    WindowDataset train_set = scaled_windows(raw, scaler, 40, 97);
    WindowDataset subset = scaled_windows(raw, scaler, 40, 97);
    subset.samples.resize(32);
    train_set.samples.resize(32);

    TrainConfig tc;
    tc.epochs = 8;
    tc.batch_size = 32;
    tc.seeds = {412};

    const fs::path dir =
        fs::temp_directory_path() / ("c2l_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    for (int run = 0; run < 2; ++run) {
        ModelConfig mc = small_config(412);
        TrainResult result = train(build_model(mc), train_set, subset, tc);
        save_checkpoint(result.model, scaler,
                        (dir / ("run" + std::to_string(run) + ".ckpt")).string());
    }
    std::ifstream a(dir / "run0.ckpt", std::ios::binary);
    std::ifstream b(dir / "run1.ckpt", std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    check(sa.str() == sb.str() && !sa.str().empty(),
          "checkpoints of identical runs differ");
    fs::remove_all(dir);
}

void criterion_optimizer_oracle() {
    TrainConfig cfg; // reference optimizer settings
    check(cfg.learning_rate == 5e-4 && cfg.beta1 == 0.9 && cfg.beta2 == 0.999 &&
              cfg.adam_eps == 1e-8 && cfg.weight_decay == 1e-2,
          "unexpected optimizer defaults");

    // closed-form first step
    Mat p = Mat::Constant(1, 1, 0.3);
    Mat g = Mat::Constant(1, 1, 0.5);
    OptimState state;
    adamw_step({&p}, {&g}, state, cfg);
    const Scalar expected = 0.3 * (1.0 - cfg.learning_rate * cfg.weight_decay) -
                            cfg.learning_rate * 0.5 / (0.5 + cfg.adam_eps);
    check(std::abs(p(0, 0) - expected) < 1e-12,
          "first step off by " + std::to_string(std::abs(p(0, 0) - expected)));

    // zero-gradient trajectory is exactly geometric
    Mat q = Mat::Constant(2, 3, 1.7);
    Mat zero = Mat::Zero(2, 3);
    OptimState decay_state;
    Scalar expect = 1.7;
    const Scalar ratio = 1.0 - cfg.learning_rate * cfg.weight_decay;
    for (int step = 0; step < 25; ++step) {
        adamw_step({&q}, {&zero}, decay_state, cfg);
        expect *= ratio;
        check((q.array() == expect).all(), "decay trajectory is not exactly geometric");
    }
}

void criterion_overfit() {
    std::vector<DriveCycleRecord> raw = make_cycles(1, 700, "OVERFIT");
    ScalerParams scaler = fit_scaler(raw);
    ModelConfig mc; // reference architecture
    mc.seed = 7;
    WindowDataset all = scaled_windows(raw, scaler, mc.window_len, 101);
    check(all.samples.size() >= 32, "not enough windows generated");
    all.samples.resize(32);
    WindowDataset val = scaled_windows(raw, scaler, mc.window_len, 101);
    val.samples.resize(8);

    TrainConfig tc; // reference optimizer
    tc.epochs = 2000; // one optimizer step per epoch at batch 32 < 128
    tc.stop_below_train_loss = 1e-4;
    tc.seeds = {7};
    tc.select_best = false;

    TrainResult result = train(build_model(mc), all, val, tc);
    const std::size_t steps = result.history.train_loss.size();
    const Scalar final_loss = result.history.train_loss.back();
    check(final_loss < 1e-4, "train MSE " + std::to_string(final_loss) + " after " +
                                 std::to_string(steps) + " steps");
    check(steps <= 2000, "needed more than 2000 steps");
    std::fprintf(stderr, "  [overfit: MSE %.3e after %zu steps]\n", final_loss, steps);
}

void criterion_desk_scale() {
    // 6 training cycles: two current-profile styles x three noise seeds
    std::vector<DriveCycleRecord> train_raw = make_cycles(3, 1000, "TRAIN");
    std::vector<DriveCycleRecord> val_raw = make_cycles(1, 2000, "VAL");
    std::vector<DriveCycleRecord> test_raw = make_cycles(1, 3000, "TEST");
    check(train_raw.size() == 6, "expected 6 training cycles");
    check(test_raw.size() == 2, "expected 2 held-out cycles");

    ScalerParams scaler = fit_scaler(train_raw);
    ModelConfig mc; // reference architecture, window 200
    mc.seed = 1;
    WindowDataset train_set = scaled_windows(train_raw, scaler, mc.window_len, 10);
    WindowDataset val_set = scaled_windows(val_raw, scaler, mc.window_len, 40);

    TrainConfig tc;
    tc.epochs = 60;
    tc.seeds = {1};
    tc.train_stride = 10;
    tc.val_stride = 40;

    TrainResult result = train(build_model(mc), train_set, val_set, tc);
    MetricsReport report = evaluate_cycles(result.model, test_raw, scaler);
    const MetricEntry avg = report.average();
    for (const MetricEntry& e : report.per_cycle) {
        std::fprintf(stderr, "  [desk-scale %s: MAE %.4f%% RMSE %.4f%% MAX %.4f%%]\n",
                     e.cycle.c_str(), e.mae_pct, e.rmse_pct, e.max_pct);
    }
    check(avg.mae_pct < 2.0,
          "held-out MAE " + std::to_string(avg.mae_pct) + "% >= 2%");
    check(avg.rmse_pct < 3.0,
          "held-out RMSE " + std::to_string(avg.rmse_pct) + "% >= 3%");
}

void criterion_efficiency() {
    Model model = build_model(ModelConfig{});
    LatencyReport lat = benchmark_latency(model, 500, 50);
    std::fprintf(stderr, "  [latency: p50 %.3f ms, p90 %.3f ms, mean %.3f ms, %.0f inf/s]\n",
                 lat.p50_ms, lat.p90_ms, lat.mean_ms, lat.throughput_per_s);
    check(lat.mean_ms < 2.0, "mean latency " + std::to_string(lat.mean_ms) + " ms >= 2 ms");
    check(lat.throughput_per_s > 500.0,
          "throughput " + std::to_string(lat.throughput_per_s) + " inf/s <= 500");

    const double mb =
        static_cast<double>(storage_bytes(model.params, CheckpointPrecision::f32)) /
        (1024.0 * 1024.0);
    check(std::abs(mb / 0.62 - 1.0) < 0.01,
          "32-bit storage " + std::to_string(mb) + " MB not within 1% of 0.62 MB");
}

void criterion_leakage_guard() {
    Rng rng(23);
    std::vector<DriveCycleRecord> train_raw = make_cycles(1, 4000, "A");
    std::vector<DriveCycleRecord> other = make_cycles(1, 5000, "B");
    const ScalerParams before = fit_scaler(train_raw);
    for (int trial = 0; trial < 50; ++trial) {
        for (DriveCycleRecord& r : other) {
            const std::size_t k = static_cast<std::size_t>(rng.below(r.size()));
            r.current_a[k] = rng.uniform(-500.0, 500.0);
            r.voltage_v[k] = rng.uniform(-500.0, 500.0);
            r.temperature_c[k] = rng.uniform(-500.0, 500.0);
        }
        const ScalerParams after = fit_scaler(train_raw);
        check(std::memcmp(&before, &after, sizeof(ScalerParams)) == 0,
              "scaler moved when non-training records mutated");
    }

    // windows are views over real samples; no padding can exist
    const DriveCycleRecord& r = train_raw.front();
    for (Index stride : {1, 7, 31}) {
        const auto windows = make_windows(r, 200, stride);
        check(windows.size() == (r.size() - 200) / static_cast<std::size_t>(stride) + 1,
              "window count formula violated");
        for (const WindowSample& s : windows) {
            Mat w = s.materialize(200);
            for (Index i = 0; i < 200; ++i) {
                const std::size_t src = static_cast<std::size_t>(s.end_index - 199 + i);
                if (w(i, 0) != r.current_a[src] || w(i, 1) != r.voltage_v[src] ||
                    w(i, 2) != r.temperature_c[src]) {
                    check(false, "window row does not map to a source sample");
                    return;
                }
            }
        }
    }
}

void criterion_metric_identities() {
    // hand-computed example, pinned to 1e-9
    std::vector<Scalar> targets = {1.0, 0.5};
    std::vector<Scalar> preds = {0.9, 0.7};
    MetricEntry e = compute_metrics(preds, targets);
    check(std::abs(e.mae_pct - 15.0) < 1e-9, "MAE != 15%");
    check(std::abs(e.rmse_pct - 15.8113883008418966) < 1e-9, "RMSE != 15.8114%");
    check(std::abs(e.max_pct - 20.0) < 1e-9, "MAX != 20%");

    Rng rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng.below(128);
        std::vector<Scalar> p(n), t(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = rng.uniform();
            t[i] = rng.uniform();
        }
        MetricEntry m = compute_metrics(p, t);
        check(m.rmse_pct >= m.mae_pct - 1e-12, "RMSE < MAE");
        check(m.max_pct >= m.mae_pct - 1e-12, "MAX < MAE");
    }
}

} // namespace

int main() {
    std::printf("acceptance suite\n");
    run_criterion(1, "parameter-count", criterion_parameter_count);
    run_criterion(2, "shape-trace", criterion_shape_trace);
    run_criterion(3, "causality", criterion_causality);
    run_criterion(4, "gradient-oracle", criterion_gradient_oracle);
    run_criterion(5, "range-determinism", criterion_range_and_determinism);
    run_criterion(6, "optimizer-oracle", criterion_optimizer_oracle);
    run_criterion(7, "overfit-sanity", criterion_overfit);
    run_criterion(8, "desk-scale-end-to-end", criterion_desk_scale);
    run_criterion(9, "efficiency-anchor", criterion_efficiency);
    run_criterion(10, "leakage-guard", criterion_leakage_guard);
    run_criterion(11, "metric-identities", criterion_metric_identities);
    if (failures == 0) {
        std::printf("all criteria passed\n");
    } else {
        std::printf("%d criterion(s) failed\n", failures);
    }
    return failures;
}
