#include "c2l/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "c2l/rng.hpp"

namespace c2l {

WindowDataset build_window_dataset(std::vector<DriveCycleRecord> scaled_cycles,
                                   Index window_len, Index stride) {
    WindowDataset ds;
    ds.window_len = window_len;
    ds.cycles = std::move(scaled_cycles);
    for (const DriveCycleRecord& cycle : ds.cycles) {
        std::vector<WindowSample> w = make_windows(cycle, window_len, stride);
        ds.samples.insert(ds.samples.end(), w.begin(), w.end());
    }
    return ds;
}

Scalar dataset_mse(const Model& model, const WindowDataset& set) {
    if (set.samples.empty()) {
        throw ParamError("dataset_mse: empty window set");
    }
    Scalar sum = 0.0;
    for (const WindowSample& s : set.samples) {
        const Scalar pred = forward(model, s.materialize(set.window_len), Mode::eval);
        const Scalar e = pred - s.target_soc;
        sum += e * e;
    }
    return sum / static_cast<Scalar>(set.samples.size());
}

namespace {

void dump_divergence(std::ostream* log, const Model& model, int epoch, std::size_t batch,
                     Scalar loss) {
    if (log == nullptr) {
        return;
    }
    *log << "divergence at epoch " << epoch << " batch " << batch << " loss " << loss
         << '\n';
    model.params.visit([log](const std::string& name, const Mat& t, TensorKind) {
        *log << "  " << name << " norm " << t.norm() << " max " << t.cwiseAbs().maxCoeff()
             << '\n';
    });
}

} // namespace

TrainResult train(Model model, const WindowDataset& train_set, const WindowDataset& val_set,
                  const TrainConfig& cfg, std::ostream* log) {
    cfg.validate();
    if (train_set.samples.empty() || val_set.samples.empty()) {
        throw ParamError("train: training and validation sets must be non-empty");
    }

    Rng run_rng(model.config.seed);
    Rng shuffle_rng = run_rng.fork("shuffle");
    Rng dropout_rng = run_rng.fork("dropout");

    OptimState opt;
    TrainHistory history;
    Model best = model;
    Scalar best_val = std::numeric_limits<Scalar>::infinity();

    std::vector<std::size_t> order(train_set.samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        if (cfg.shuffle) {
            // Fisher-Yates from the seeded stream.
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[shuffle_rng.below(i)]);
            }
        }

        Scalar epoch_loss_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t count =
                std::min<std::size_t>(cfg.batch_size, order.size() - start);
            const Scalar inv_batch = 1.0 / static_cast<Scalar>(count);

            ModelValues leaves = bind_params(model.params, true);
            std::vector<NamedLeaf> leaf_list = collect_leaves(leaves);

            // Per-sample backward keeps peak graph memory at one window; the
            // per-batch loss is the sum of the scaled per-sample terms, so
            // the accumulated leaf gradients equal the batch-loss gradient.
            Scalar batch_loss = 0.0;
            for (std::size_t k = 0; k < count; ++k) {
                const WindowSample& sample = train_set.samples[order[start + k]];
                Value window =
                    Value::constant(sample.materialize(train_set.window_len));
                Value pred = forward_graph(leaves, model.basis, model.config, window,
                                           Mode::train, &dropout_rng);
                Mat target(1, 1);
                target(0, 0) = sample.target_soc;
                Value loss = scale(mse_loss(pred, target), inv_batch);
                batch_loss += loss.val()(0, 0);
                backward(loss);
            }

            if (!std::isfinite(batch_loss)) {
                dump_divergence(log, model, epoch, batch_index, batch_loss);
                throw Error("train: non-finite loss " + std::to_string(batch_loss) +
                            " at epoch " + std::to_string(epoch) + " batch " +
                            std::to_string(batch_index));
            }

            // Leaves were bound to copies of the parameters at batch start;
            // the optimizer steps the stored tensors in place using the
            // gradients accumulated on those leaves.
            std::vector<Mat*> tensors;
            std::vector<const Mat*> grads;
            tensors.reserve(leaf_list.size());
            grads.reserve(leaf_list.size());
            auto named = collect_tensors(model.params);
            for (std::size_t i = 0; i < leaf_list.size(); ++i) {
                tensors.push_back(named[i].tensor);
                grads.push_back(&leaf_list[i].leaf->grad());
            }
            adamw_step(tensors, grads, opt, cfg);

            epoch_loss_sum += batch_loss * static_cast<Scalar>(count);
            ++batch_index;
        }

        const Scalar train_loss = epoch_loss_sum / static_cast<Scalar>(order.size());
        const Scalar val_loss = dataset_mse(model, val_set);
        const auto t1 = std::chrono::steady_clock::now();
        const Scalar seconds = std::chrono::duration<Scalar>(t1 - t0).count();

        history.train_loss.push_back(train_loss);
        history.val_loss.push_back(val_loss);
        history.epoch_seconds.push_back(seconds);
        if (val_loss < best_val) {
            best_val = val_loss;
            best = model;
            history.best_epoch = epoch;
        }
        if (log != nullptr) {
            char line[160];
            std::snprintf(line, sizeof(line), "epoch %d train %.8e val %.8e seconds %.3f",
                          epoch, train_loss, val_loss, seconds);
            *log << line << '\n';
        }
        if (cfg.stop_below_train_loss > 0.0 && train_loss < cfg.stop_below_train_loss) {
            break;
        }
    }

    TrainResult result;
    result.history = std::move(history);
    result.model = cfg.select_best ? std::move(best) : std::move(model);
    return result;
}

MultiSeedResult run_seeds(const ModelConfig& base_config, const TrainConfig& cfg,
                          const WindowDataset& train_set, const WindowDataset& val_set,
                          std::span<const DriveCycleRecord> eval_cycles,
                          const ScalerParams& scaler, int jobs,
                          const SeedLogFactory& log_factory) {
    cfg.validate();
    MultiSeedResult out;
    out.runs.resize(cfg.seeds.size());

    auto run_one = [&](std::size_t idx) {
        ModelConfig mc = base_config;
        mc.seed = cfg.seeds[idx];
        std::ostream* log = log_factory ? log_factory(mc.seed) : nullptr;
        SeedRun run;
        run.seed = mc.seed;
        run.result = train(build_model(mc), train_set, val_set, cfg, log);
        if (!eval_cycles.empty()) {
            run.report = evaluate_cycles(run.result.model, eval_cycles, scaler);
        }
        out.runs[idx] = std::move(run);
    };

    if (jobs <= 1 || cfg.seeds.size() == 1) {
        for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
            run_one(i);
        }
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        const int workers = std::min<int>(jobs, static_cast<int>(cfg.seeds.size()));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= cfg.seeds.size()) {
                        return;
                    }
                    run_one(i);
                }
            });
        }
        for (std::thread& t : pool) {
            t.join();
        }
    }

    if (!eval_cycles.empty()) {
        // Mean per (cycle, metric) across seeds.
        const std::size_t cycles = out.runs.front().report.per_cycle.size();
        for (std::size_t c = 0; c < cycles; ++c) {
            MetricEntry avg;
            avg.cycle = out.runs.front().report.per_cycle[c].cycle;
            for (const SeedRun& run : out.runs) {
                avg.mae_pct += run.report.per_cycle[c].mae_pct;
                avg.rmse_pct += run.report.per_cycle[c].rmse_pct;
                avg.max_pct += run.report.per_cycle[c].max_pct;
                avg.count = run.report.per_cycle[c].count;
            }
            const Scalar n = static_cast<Scalar>(out.runs.size());
            avg.mae_pct /= n;
            avg.rmse_pct /= n;
            avg.max_pct /= n;
            out.averaged.per_cycle.push_back(std::move(avg));
        }
    }
    return out;
}

} // namespace c2l
